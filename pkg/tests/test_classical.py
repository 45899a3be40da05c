import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from kickosc import classical as cl
from kickosc.numerics import RandomStream

CHAOTIC = cl.MapParams(0.5, 2.0)


def test_pure_twist():
    q = cl.map_step(cl.PhasePoint.from_action_angle(1.0, 0.0), cl.MapParams(0.5, 0.0))
    assert q.action == pytest.approx(1.0, abs=1e-14)
    assert q.theta_unwrapped == pytest.approx(2.5, abs=1e-14)


def test_kick_from_origin():
    # alpha = 0 -> 2i lands on theta = -pi/2, then twists by 2 I = 8
    q = cl.map_step(cl.PhasePoint(0j, -np.pi / 2), cl.MapParams(0.0, 2.0))
    assert q.action == pytest.approx(4.0, abs=1e-12)
    assert q.theta_unwrapped == pytest.approx(-np.pi / 2 + 8, abs=1e-12)


@given(action=st.floats(0, 20), theta=st.floats(-10, 10), g0=st.floats(-3, 3), w0=st.floats(-2, 2))
@settings(max_examples=200, deadline=None)
def test_inverse_composition(action, theta, g0, w0):
    params = cl.MapParams(w0, g0)
    p = cl.PhasePoint.from_action_angle(action, theta)
    fwd = cl.map_step(p, params)
    back = cl.inverse_map_step(fwd, params)
    scale = 1 + action + g0**2
    assert abs(back.alpha - p.alpha) < 1e-12 * scale
    # at the origin the angle is a free label the map cannot carry through
    assume(action > 1e-6 and abs(p.alpha + 1j * g0) > 1e-3)
    assert abs(back.theta_unwrapped - p.theta_unwrapped) < 1e-11 * scale**2


def test_origin_fixed_without_kick():
    q = cl.inverse_map_step(cl.PhasePoint(0j, 0.0), cl.MapParams(0.5, 0.0))
    assert q.alpha == 0


def test_round_trip_short_chaotic():
    # the chaotic map doubles rounding errors every step or so; beyond ~5
    # steps a double-precision round trip no longer returns to 1e-6
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = cl.PhasePoint.from_action_angle(rng.exponential(0.5), rng.uniform(0, 2 * np.pi))
        y = x
        for _ in range(5):
            y = cl.map_step(y, CHAOTIC)
        for _ in range(5):
            y = cl.inverse_map_step(y, CHAOTIC)
        assert abs(y.alpha - x.alpha) < 1e-6


def test_sample_isotropic_moments():
    n = 200_000
    e = cl.sample_isotropic(0.5, n, RandomStream(1, 0))
    assert abs(cl.mean_action(e) - 0.5) < 3 * 0.5 / np.sqrt(n)
    assert abs(np.mean(np.exp(1j * e.theta))) < 3 / np.sqrt(n)


def test_evolve_zero_steps_and_determinism():
    e = cl.sample_isotropic(0.5, 1000, RandomStream(2, 0), CHAOTIC)
    same = cl.evolve_ensemble(e, 0)
    np.testing.assert_array_equal(same.alpha, e.alpha)
    a = cl.evolve_ensemble(e, 5, 0.3, RandomStream(9, 1))
    b = cl.evolve_ensemble(e, 5, 0.3, RandomStream(9, 1))
    np.testing.assert_array_equal(a.alpha, b.alpha)


def test_noise_independent_of_partition():
    e = cl.sample_isotropic(0.5, 1000, RandomStream(2, 0), CHAOTIC)
    whole = cl.evolve_ensemble(e, 3, 0.2, RandomStream(4, 1))
    split = cl.evolve_ensemble(cl.evolve_ensemble(e, 1, 0.2, RandomStream(4, 1)), 2, 0.2, RandomStream(4, 1))
    np.testing.assert_array_equal(whole.alpha, split.alpha)


def test_mean_action_single_point():
    e = cl.ClassicalEnsemble([np.sqrt(2.0)], [0.0], CHAOTIC)
    assert cl.mean_action(e) == pytest.approx(2.0)


def test_action_conserved_without_kick():
    params = cl.MapParams(0.5, 0.0)
    e = cl.sample_isotropic(1.0, 1000, RandomStream(3, 0), params)
    before = cl.mean_action(e)
    for _ in range(10):
        e = cl.evolve_ensemble(e, 1)
        assert cl.mean_action(e) == pytest.approx(before, rel=1e-13)


def _action_curve(t_max=50):
    e = cl.sample_isotropic(0.5, 100_000, RandomStream(0, 0), CHAOTIC)
    out = [cl.mean_action(e)]
    for _ in range(t_max):
        e = cl.evolve_ensemble(e, 1)
        out.append(cl.mean_action(e))
    return np.array(out)


def test_diffusion_linear_at_late_times():
    i = _action_curve()
    t = np.arange(51)
    np.testing.assert_allclose(i[20:], i[0] + 4 * t[20:], rtol=0.05)
    assert np.polyfit(t, i, 1)[0] == pytest.approx(4.0, rel=0.05)


def test_strong_noise_isotropic_and_diffusive():
    # random angles turn every kick into a step of fixed length and random direction
    params = cl.MapParams(0.5, 0.5)
    e = cl.sample_isotropic(0.5, 50_000, RandomStream(4, 0), params)
    i0 = cl.mean_action(e)
    e = cl.evolve_ensemble(e, 40, 5.0, RandomStream(4, 1))
    assert abs(np.mean(np.exp(1j * e.theta))) < 5 / np.sqrt(50_000)
    assert cl.mean_action(e) - i0 == pytest.approx(40 * params.g0**2, rel=0.03)


@pytest.mark.xfail(strict=True, reason="transient kick-twist correlation pulls <I> 5.8% low near t=5 at omega0=0.5")
def test_diffusion_pointwise_all_t():
    i = _action_curve()
    t = np.arange(51)
    np.testing.assert_allclose(i[1:], i[0] + 4 * t[1:], rtol=0.05)


def test_phase_correlation_basics():
    e = cl.sample_isotropic(0.5, 10_000, RandomStream(0, 0), CHAOTIC)
    assert cl.phase_correlation(e, 0) == 1.0
    series = cl.phase_correlation_series(e, 4)
    assert series[3] == pytest.approx(cl.phase_correlation(e, 3), rel=1e-12)


def test_frozen_phases_do_not_decorrelate():
    # every trajectory at the same action: the twist is a common rotation
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, 500)
    e = cl.ClassicalEnsemble(np.exp(-1j * theta), theta, cl.MapParams(0.0, 0.0))
    assert cl.phase_correlation(e, 7) == pytest.approx(1.0, abs=1e-12)


def test_phase_correlation_decays_log_linearly():
    e = cl.sample_isotropic(0.5, 10**6, RandomStream(0, 0), CHAOTIC)
    c = cl.phase_correlation_series(e, 10)
    rate, t_end = cl.log_decay_rate(c, cutoff=10 / 10**6)
    t = np.arange(1, t_end + 1)
    resid = -np.log(c[1:t_end + 1]) - rate * t
    assert t_end >= 2
    assert np.max(np.abs(resid)) < 0.35 * rate * t_end
    assert cl.correlation_time(CHAOTIC) == pytest.approx(1 / rate)


def test_log_decay_rate_exact_exponential():
    v = np.exp(-0.7 * np.arange(20))
    rate, t_end = cl.log_decay_rate(v, cutoff=np.exp(-3))
    assert rate == pytest.approx(0.7)
    assert t_end == 5


def test_harmonics_of_fresh_ensemble():
    n = 10**6
    e = cl.sample_isotropic(0.5, n, RandomStream(5, 0))
    w = cl.classical_harmonics(e, 128, 1024, 128).weights
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert abs(w[0] - 1) < 5 / np.sqrt(n) * 128


def test_harmonics_alias_guard():
    e = cl.sample_isotropic(0.5, 100, RandomStream(5, 0))
    with pytest.raises(ValueError, match="alias"):
        cl.classical_harmonics(e, 8, 64, 32)


def test_liouville_m2_initial_value():
    # W0 = exp(-I/s)/(pi s) is isotropic, so no theta-harmonic at t = 0
    m2 = cl.liouville_m2(cl.MapParams(0.5, 1.5), 0.5, 1000, 3, RandomStream(0, 0))
    assert m2[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(m2) > 0)


def test_liouville_m2_grows_exponentially():
    m2 = cl.liouville_m2(cl.MapParams(0.5, 1.5), 0.5, 200_000, 12, RandomStream(0, 0))
    t = np.arange(1, 13)
    y = np.log(m2[1:])
    coef = np.polyfit(t, y, 1)
    r2 = 1 - np.sum((y - np.polyval(coef, t)) ** 2) / np.sum((y - y.mean()) ** 2)
    assert r2 > 0.95


@pytest.mark.xfail(strict=True, reason="growth rate of <m^2> is ~4x the phase-correlation rate")
def test_harmonic_growth_rate_matches_tau_c():
    params = cl.MapParams(0.5, 1.5)
    m2 = cl.liouville_m2(params, 0.5, 200_000, 8, RandomStream(0, 0))
    rate = np.polyfit(np.arange(1, 9), np.log(m2[1:]), 1)[0]
    tau_c = cl.correlation_time(params)
    assert rate == pytest.approx(2 / tau_c, rel=0.3)


def test_reversal_without_probe_is_exact():
    for t_r in (1, 2, 4):
        f = cl.reversal_experiment(CHAOTIC, 0.5, t_r, 0.0, 50_000, RandomStream(0, 0))
        assert f == pytest.approx(1.0, abs=1e-12)


def test_reversal_monotone_in_probe():
    fids = [cl.reversal_experiment(CHAOTIC, 0.5, 2, s, 100_000, RandomStream(0, 0)) for s in (0, 0.03, 0.1, 0.3, 1, 3)]
    assert all(b <= a + 3e-3 for a, b in zip(fids, fids[1:]))


@pytest.mark.xfail(strict=True, reason="large-probe fidelity plateaus at the coarse-grained overlap")
def test_reversal_large_probe_follows_tau_c():
    tau_c = cl.correlation_time(CHAOTIC)
    for t_r in (2, 4, 8):
        f = cl.reversal_experiment(CHAOTIC, 0.5, t_r, 100.0, 100_000, RandomStream(0, 0))
        ref = np.exp(-t_r / tau_c)
        assert ref / 2 <= f <= 2 * ref


def test_ehrenfest_time():
    assert cl.ehrenfest_time(1.0, 0.5, 1.0) == 0.0
    assert cl.ehrenfest_time(1.0, np.e / 2, 1.0) == pytest.approx(1.0)
    assert cl.ehrenfest_time(1.0, 5.0, 0.01) > cl.ehrenfest_time(1.0, 5.0, 1.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_detected():
    with pytest.raises(cl.DivergenceError):
        cl.evolve_ensemble(cl.ClassicalEnsemble([np.inf + 0j], [0.0], CHAOTIC), 1)
