"""Classical kicked nonlinear oscillator.

Phase-space points are stored as alpha = sqrt(I) exp(-i theta). One period is
a kick alpha -> alpha + i g0 followed by the twist theta -> theta + omega0 + 2I,
the same order as the quantum Floquet operator.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numerics import RandomStream
from .spectrum import HarmonicSpectrum


class DivergenceError(FloatingPointError):
    pass


@dataclass(frozen=True)
class MapParams:
    omega0: float = 0.5
    g0: float = 2.0
    period: int = 1

    def __post_init__(self):
        if self.period != 1:
            raise ValueError("kicks are at integer times; period must be 1")

    @property
    def chaotic(self):
        return abs(self.g0) > 1


@dataclass(frozen=True)
class PhasePoint:
    alpha: complex
    theta_unwrapped: float

    @classmethod
    def from_action_angle(cls, action, theta):
        return cls(np.sqrt(action) * np.exp(-1j * theta), float(theta))

    @property
    def action(self):
        return abs(self.alpha) ** 2


@dataclass
class ClassicalEnsemble:
    """Samples of the phase-space density as parallel arrays."""

    alpha: np.ndarray
    theta: np.ndarray
    params: MapParams
    time: int = 0

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=complex)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.alpha.size == 0:
            raise ValueError("ensemble must be non-empty")
        if self.alpha.shape != self.theta.shape:
            raise ValueError("alpha and theta must have the same shape")

    def __len__(self):
        return self.alpha.size

    @property
    def action(self):
        return np.abs(self.alpha) ** 2

    def copy(self):
        return replace(self, alpha=self.alpha.copy(), theta=self.theta.copy())


def _check_finite(alpha):
    if not np.all(np.isfinite(alpha)):
        raise DivergenceError("action overflowed during map iteration")


def _kick_angle(a_from, a_to, theta):
    # continuous change of theta = -arg(alpha) along the straight kick segment
    d = -np.angle(a_to * np.conj(a_from))
    at_origin = a_from == 0
    if np.any(at_origin):
        fresh = -np.angle(a_to) - theta
        fresh = (fresh + np.pi) % (2 * np.pi) - np.pi
        d = np.where(at_origin, fresh, d)
    return d


def forward(alpha, theta, params):
    """Vectorized map_step on arrays."""
    a1 = alpha + 1j * params.g0
    th = theta + _kick_angle(alpha, a1, theta)
    psi = params.omega0 + 2 * np.abs(a1) ** 2
    a2 = a1 * np.exp(-1j * psi)
    _check_finite(a2)
    return a2, th + psi


def backward(alpha, theta, params):
    """Vectorized inverse_map_step: untwist, then un-kick."""
    psi = params.omega0 + 2 * np.abs(alpha) ** 2
    a1 = alpha * np.exp(1j * psi)
    th = theta - psi
    a0 = a1 - 1j * params.g0
    th = th + _kick_angle(a1, a0, th)
    _check_finite(a0)
    return a0, th


def map_step(p, params):
    a, th = forward(np.array([p.alpha]), np.array([p.theta_unwrapped]), params)
    return PhasePoint(complex(a[0]), float(th[0]))


def inverse_map_step(p, params):
    a, th = backward(np.array([p.alpha]), np.array([p.theta_unwrapped]), params)
    return PhasePoint(complex(a[0]), float(th[0]))


def sample_isotropic(scale, n, stream, params=MapParams()):
    """Exponential action with mean `scale`, uniform angle."""
    if scale <= 0 or n < 1:
        raise ValueError("need scale > 0 and n >= 1")
    rng = stream.rng
    action = rng.exponential(scale, n)
    theta = rng.uniform(0.0, 2 * np.pi, n)
    return ClassicalEnsemble(np.sqrt(action) * np.exp(-1j * theta), theta, params)


def evolve_ensemble(e, t, noise_sigma=0.0, stream=None):
    """Apply t map steps, each followed by a Gaussian angle kick when noise_sigma > 0.

    The angle noise of step k is drawn from the stream's sub-key (k,), one
    variate per trajectory in index order, so every trajectory sees the same
    noise no matter how the ensemble is partitioned.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if noise_sigma > 0 and stream is None:
        raise ValueError("a RandomStream is required when noise_sigma > 0")
    alpha, theta = e.alpha, e.theta
    for k in range(t):
        alpha, theta = forward(alpha, theta, e.params)
        if noise_sigma > 0:
            xi = noise_sigma * stream.substream(e.time + k).standard_normal(alpha.size)
            alpha = alpha * np.exp(-1j * xi)
            theta = theta + xi
    return ClassicalEnsemble(alpha, theta, e.params, e.time + t)


def mean_action(e):
    return float(np.mean(e.action))


def phase_correlation(e0, t):
    """|<exp(i(theta_t - theta_0))>|^2 for the noise-free evolution of e0."""
    if t == 0:
        return 1.0
    et = evolve_ensemble(e0, t)
    return float(np.abs(np.mean(np.exp(1j * (et.theta - e0.theta)))) ** 2)


def phase_correlation_series(e0, t_max):
    """Phase correlation at t = 0..t_max from a single pass."""
    out = np.empty(t_max + 1)
    out[0] = 1.0
    alpha, theta = e0.alpha, e0.theta
    for t in range(1, t_max + 1):
        alpha, theta = forward(alpha, theta, e0.params)
        out[t] = np.abs(np.mean(np.exp(1j * (theta - e0.theta)))) ** 2
    return out


def log_decay_rate(values, cutoff=np.exp(-3.0), window=None):
    """Rate r of values(t) ~ exp(-r t), values[0] taken as 1 at t = 0.

    Least-squares slope of -ln(values) through the origin over t = 1..t_end,
    where t_end is the first step whose value drops below `cutoff` (the
    remaining points sit on the statistical floor). Passing `window` fixes
    t_end instead; returns (rate, t_end).
    """
    v = np.asarray(values, dtype=float)
    if window is None:
        below = np.nonzero(v[1:] < cutoff)[0]
        window = int(below[0]) + 1 if below.size else v.size - 1
    t = np.arange(1, window + 1)
    y = -np.log(np.maximum(v[1:window + 1], np.finfo(float).tiny))
    return float(np.dot(t, y) / np.dot(t, t)), window


def correlation_time(params, scale=0.5, n=10**6, t_max=10, seed=0, cutoff=None):
    """Lyapunov-time estimate tau_c from the phase-correlation decay.

    Points below 10/n are indistinguishable from the sampling floor |<e^{i phi}>|^2 ~ 1/n.
    """
    e0 = sample_isotropic(scale, n, RandomStream(seed, 0), params)
    c = phase_correlation_series(e0, t_max)
    rate, _ = log_decay_rate(c, cutoff=10.0 / n if cutoff is None else cutoff)
    return 1.0 / rate


def classical_harmonics(e, n_I_bins=128, n_theta_bins=1024, m_max=128):
    """Theta-harmonic weights of the binned sample density.

    Counts on an (I, theta) grid are Fourier transformed along theta in each
    action bin. The shot-noise bias of the squared amplitudes (equal to the
    bin count for m > 0) is subtracted before normalizing.
    """
    if n_theta_bins < 4 * m_max:
        raise ValueError(f"n_theta_bins={n_theta_bins} < 4*m_max={4 * m_max}: harmonics would alias")
    action = e.action
    top = action.max()
    top = top if top > 0 else 1.0
    counts, _, _ = np.histogram2d(
        action, np.mod(e.theta, 2 * np.pi),
        bins=(n_I_bins, n_theta_bins), range=((0.0, top * (1 + 1e-12)), (0.0, 2 * np.pi)),
    )
    amp = np.fft.rfft(counts, axis=1)[:, : m_max + 1]
    power = np.abs(amp) ** 2
    power[:, 1:] -= counts.sum(axis=1)[:, None]
    w = np.clip(power.sum(axis=0), 0.0, None)
    w[1:] *= 2
    return HarmonicSpectrum.from_unnormalized(w)


def liouville_m2(params, scale, n, t_max, stream):
    """<m^2>_t of the Liouville density that starts as exp(-I/scale)/(pi scale).

    Uses <m^2> = int (d_theta W_t)^2 / int W_t^2 with W_t = W_0 o Phi_t^{-1}. The
    theta-derivative is carried back to t = 0 by the inverse tangent map, so
    the estimate is a Monte Carlo average over points drawn from W_0^2 (action
    exponential with mean scale/2) and never saturates on a grid.
    """
    rng = stream.rng
    action = rng.exponential(scale / 2, n)
    theta = rng.uniform(0.0, 2 * np.pi, n)
    a = np.sqrt(action) * np.exp(-1j * theta)
    x0 = a.copy()
    # images of the unit tangent vectors along x and y
    v1 = np.ones(n, complex)
    v2 = np.full(n, 1j)
    out = np.empty(t_max + 1)
    for t in range(t_max + 1):
        e = -1j * a
        jx = v2.imag * e.real - v2.real * e.imag
        jy = -v1.imag * e.real + v1.real * e.imag
        out[t] = (4 / scale**2) * np.mean((x0.real * jx + x0.imag * jy) ** 2)
        if t == t_max:
            break
        a = a + 1j * params.g0
        ph = np.exp(-1j * (params.omega0 + 2 * np.abs(a) ** 2))
        dpsi1 = 4 * (a.conj() * v1).real
        dpsi2 = 4 * (a.conj() * v2).real
        v1 = ph * (v1 - 1j * a * dpsi1)
        v2 = ph * (v2 - 1j * a * dpsi2)
        a = a * ph
        _check_finite(a)
    return out


def _grid_bins(action, theta, i_max, n_I_bins, n_theta_bins):
    ib = np.floor(action / i_max * n_I_bins).astype(np.int64)
    tb = np.floor(np.mod(theta, 2 * np.pi) / (2 * np.pi) * n_theta_bins).astype(np.int64)
    tb = np.minimum(tb, n_theta_bins - 1)
    inside = ib < n_I_bins
    return np.where(inside, ib * n_theta_bins + tb, -1)


def reversal_experiment(params, init_scale, t_r, probe_sigma, n, stream, n_I_bins=32, n_theta_bins=64):
    """Fidelity of a forward / rotate / backward round trip.

    Overlap int W_0 W_ret / int W_0^2 of the initial and returned densities,
    binned on an (I, theta) grid covering I < 8 init_scale. Same-trajectory
    pairs are excluded from both sums, which removes the shot-noise bias.
    """
    if t_r < 1:
        raise ValueError("t_r must be >= 1")
    e0 = sample_isotropic(init_scale, n, stream, params)
    alpha, theta = e0.alpha, e0.theta
    for _ in range(t_r):
        alpha, theta = forward(alpha, theta, params)
    if probe_sigma > 0:
        xi = probe_sigma * stream.substream(t_r).standard_normal(n)
        alpha = alpha * np.exp(-1j * xi)
        theta = theta + xi
    for _ in range(t_r):
        alpha, theta = backward(alpha, theta, params)
    i_max = 8 * init_scale
    nb = n_I_bins * n_theta_bins
    b0 = _grid_bins(e0.action, e0.theta, i_max, n_I_bins, n_theta_bins)
    b1 = _grid_bins(np.abs(alpha) ** 2, theta, i_max, n_I_bins, n_theta_bins)
    c0 = np.bincount(b0[b0 >= 0], minlength=nb).astype(float)
    c1 = np.bincount(b1[b1 >= 0], minlength=nb).astype(float)
    same = np.count_nonzero((b0 == b1) & (b0 >= 0))
    num = c0 @ c1 - same
    den = c0 @ c0 - np.count_nonzero(b0 >= 0)
    return float(num / den)


def ehrenfest_time(tau_c, mean_I, hbar):
    if tau_c <= 0 or mean_I <= 0 or hbar <= 0:
        raise ValueError("tau_c, mean_I and hbar must be positive")
    return tau_c * np.log(2 * mean_I / hbar)
