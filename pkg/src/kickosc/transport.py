"""Doorway resonance coupled to a picket-fence background.

Energies are measured in the same units as the widths. The background has
equidistant levels with spacing d, so the loop functions are cot and
1/sin^2. Weak-localization quantities use the dimensionless widths
gamma = Gamma * t_H with t_H the Heisenberg time of the dot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

POLE_TOL = 1e-12


class PoleError(ValueError):
    def __init__(self, energy, distance):
        super().__init__(f"E={energy!r} lies {distance:.3e} spacings from a pole of cot(pi E/d)")
        self.distance = distance


def _pole_guard(E, d):
    x = np.asarray(E, dtype=float) / d
    dist = np.abs(x - np.round(x))
    if np.any(dist < POLE_TOL):
        i = int(np.argmin(dist)) if dist.ndim else 0
        raise PoleError(np.ravel(E)[i] if np.ndim(E) else E, float(np.min(dist)))


def loop_g(E, d):
    _pole_guard(E, d)
    return 1.0 / np.tan(np.pi * np.asarray(E, dtype=float) / d)


def loop_l(E, d):
    _pole_guard(E, d)
    return (np.pi / d) / np.sin(np.pi * np.asarray(E, dtype=float) / d) ** 2


@dataclass(frozen=True)
class DoorwayParams:
    gamma_lead1: tuple
    gamma_lead2: tuple
    gamma_s: float
    d: float
    e_res: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gamma_lead1", tuple(float(g) for g in self.gamma_lead1))
        object.__setattr__(self, "gamma_lead2", tuple(float(g) for g in self.gamma_lead2))
        if any(g <= 0 for g in self.channels):
            raise ValueError("partial widths must be positive")
        if self.gamma_s < 0 or self.d <= 0:
            raise ValueError("need gamma_s >= 0 and d > 0")

    @property
    def channels(self):
        return self.gamma_lead1 + self.gamma_lead2

    @property
    def gamma(self):
        return sum(self.channels)

    @property
    def gamma_1(self):
        return sum(self.gamma_lead1)

    @property
    def gamma_2(self):
        return sum(self.gamma_lead2)


@dataclass(frozen=True)
class AbsorptionParams:
    gamma_e: float
    d: float

    def __post_init__(self):
        if self.gamma_e < 0 or self.d <= 0:
            raise ValueError("need gamma_e >= 0 and d > 0")

    @property
    def xi(self):
        return float(np.tanh(np.pi * self.gamma_e / (2 * self.d)))

    @property
    def gamma_e_dimless(self):
        return 2 * np.pi * self.gamma_e / self.d

    @property
    def kappa(self):
        xi = self.xi
        return 4 * xi / (1 - xi) ** 2

    @property
    def quasiparticle_valid(self):
        return self.gamma_e_dimless <= 1


def kappa_of(gamma_e, d):
    return AbsorptionParams(gamma_e, d)


def absorption_for_kappa(kappa, d):
    """Inverse of kappa = exp(gamma_e) - 1."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    return AbsorptionParams(np.log1p(kappa) * d / (2 * np.pi), d)


def fine_structure_roots(p, window, tol=1e-12):
    """Real roots of E - E_res - (Gamma_s/2) cot(pi E/d) in the open window.

    The residual rises monotonically from -inf to +inf between adjacent
    poles of the cotangent, so every inter-pole interval holds exactly one
    root; brentq solves it there to tol*d. Intervals cut by the
    window edges are kept only when the root falls inside the window.
    """
    lo, hi = window
    if not hi > lo:
        raise ValueError("window must be a non-empty interval")
    d = p.d
    if p.gamma_s == 0:
        # decoupled doorway: the only root is E_res itself
        return np.array([p.e_res]) if lo < p.e_res < hi else np.array([])

    def resid(E):
        return E - p.e_res - 0.5 * p.gamma_s / np.tan(np.pi * E / d)

    roots = []
    for k in range(int(np.floor(lo / d)), int(np.ceil(hi / d)) + 1):
        a, b = k * d, (k + 1) * d
        if b <= lo or a >= hi:
            continue
        # step inside the poles; the residual has the right sign there
        eps = d * 1e-15 * max(1.0, abs(k))
        r = brentq(resid, a + eps, b - eps, xtol=tol * d)
        if lo < r < hi:
            roots.append(r)
    return np.array(roots)


def _bracket(E, p):
    shift = 0.5 * p.gamma_s * loop_g(E, p.d) if p.gamma_s else 0.0
    return (np.asarray(E, dtype=float) - p.e_res) - shift


def cross_section_fine(E, p, a, b):
    ch = p.channels
    return ch[a] * ch[b] / (_bracket(E, p) ** 2 + 0.25 * p.gamma**2)


def wigner_delay_fine(E, p):
    num = p.gamma * (1 + 0.5 * p.gamma_s * loop_l(E, p.d)) if p.gamma_s else p.gamma
    return num / (_bracket(E, p) ** 2 + 0.25 * p.gamma**2)


def _lorentz(E, p):
    return (np.asarray(E, dtype=float) - p.e_res) ** 2 + 0.25 * (p.gamma + p.gamma_s) ** 2


def averaged_cross_section_parts(E, p, a, b):
    """(direct, re-emitted) contributions to the fine-averaged cross section."""
    ch = p.channels
    direct = ch[a] * ch[b] / _lorentz(E, p)
    return direct, direct * p.gamma_s / p.gamma


def averaged_cross_section(E, p, a, b):
    direct, reemitted = averaged_cross_section_parts(E, p, a, b)
    return direct + reemitted


def averaged_delay(E, p):
    """Fine-averaged delay; the 2 pi/d background term stays even when gamma_s = 0."""
    return (p.gamma + p.gamma_s) / _lorentz(E, p) + 2 * np.pi / p.d


def period_average(fn, p, k=0, points=100_000):
    """Midpoint-rule mean of fn over the pole-to-pole period [k d, (k+1) d].

    Such a period holds exactly one fine-structure resonance in full. Compare
    the result with the smooth closed forms at the period centre (k + 1/2) d.
    """
    h = p.d / points
    E = k * p.d + h * (np.arange(points) + 0.5)
    return float(np.mean(fn(E)))


@dataclass
class Conductance:
    G: float
    T12: float
    T1s: float
    Ts2: float


def conductance(E, p, absorption=None):
    """G = T12 + T1s Ts2 / (T1s + Ts2) with absorption-reduced T_sk."""
    lam = _lorentz(E, p)
    kappa = 0.0 if absorption is None else absorption.kappa
    suppression = 1 + kappa * lam / (p.gamma * p.gamma_s) if kappa > 0 and p.gamma_s > 0 else 1.0
    inv_lam_k = 1.0 / (lam * suppression)
    t12 = p.gamma_1 * p.gamma_2 / lam
    t1s = p.gamma_s * p.gamma_1 * inv_lam_k
    ts2 = p.gamma_s * p.gamma_2 * inv_lam_k
    denom = t1s + ts2
    reemitted = t1s * ts2 / denom if denom > 0 else 0.0
    return Conductance(float(t12 + reemitted), float(t12), float(t1s), float(ts2))


def resonant_denominator(E, p, absorption):
    xi = absorption.xi
    eta = loop_g(E, p.d)
    den = 1 + xi**2 * eta**2
    shift = 0.5 * p.gamma_s * (1 - xi**2) * eta / den
    width = p.gamma + p.gamma_s * xi * (1 + eta**2) / den
    return (np.asarray(E, dtype=float) - p.e_res) - shift + 0.5j * width


# Weak localization. Both Delta-sigma and Delta-G integrate the kernel
#   phi(x) = (a - c q(x)^{-1/2}) / x,  q(x) = x + k (x + s)^2
# against a weight made of delta(x - x_W) and its first two derivatives.

def _kernel_derivs(x, a, c, k, s):
    """phi, phi', phi'' at x, differentiated by hand."""
    q = x + k * (x + s) ** 2
    q1 = 1 + 2 * k * (x + s)
    q2 = 2 * k
    h = a - c * q**-0.5
    h1 = 0.5 * c * q**-1.5 * q1
    h2 = 0.5 * c * (-1.5 * q**-2.5 * q1**2 + q**-1.5 * q2)
    phi = h / x
    phi1 = h1 / x - h / x**2
    phi2 = h2 / x - 2 * h1 / x**2 + 2 * h / x**3
    return phi, phi1, phi2


def _strong_kernel_derivs(x, s):
    # -s / (x (x + s)) = -(1/x - 1/(x+s))
    phi = -(1 / x - 1 / (x + s))
    phi1 = 1 / x**2 - 1 / (x + s) ** 2
    phi2 = -2 / x**3 + 2 / (x + s) ** 3
    return phi, phi1, phi2


def _weighted(derivs, ensemble, m, t_h):
    phi, phi1, phi2 = derivs
    if ensemble == "GUE":
        return phi
    if ensemble == "GOE":
        # delta' acts as -d/dx and delta'' as +d^2/dx^2 under the integral
        return phi + (2 / t_h) * phi1 + (m / (2 * t_h**2)) * phi2
    raise ValueError(f"ensemble must be 'GOE' or 'GUE', got {ensemble!r}")


def weisskopf_width(m, t_h=1.0):
    """Gamma_W = M / t_H (= M D / 2 pi with t_H = 2 pi / D)."""
    return m / t_h


def delta_sigma(kappa, gamma_s, ensemble, m, t_h=1.0, gamma_w=None):
    """Absorption correction to the ensemble-averaged cross section.

    Vanishes at kappa = 0, where the averaged cross section equals the
    kappa-free baseline (see mean_cross_section).
    """
    if m < 2 or kappa < 0:
        raise ValueError("need m >= 2 and kappa >= 0")
    gw = weisskopf_width(m, t_h) if gamma_w is None else gamma_w
    c = np.sqrt(kappa * gamma_s / 4)
    derivs = _kernel_derivs(gw, 0.0, c, kappa / (4 * gamma_s), gamma_s)
    return float(_weighted(derivs, ensemble, m, t_h))


def mean_cross_section(kappa, gamma_s, ensemble, m, t_h=1.0, gamma_w=None):
    """Baseline int w/Gamma plus delta_sigma."""
    gw = weisskopf_width(m, t_h) if gamma_w is None else gamma_w
    c = np.sqrt(kappa * gamma_s / 4)
    derivs = _kernel_derivs(gw, 1.0, c, kappa / (4 * gamma_s), gamma_s)
    return float(_weighted(derivs, ensemble, m, t_h))


def delta_sigma_strong_absorption(gamma_s, ensemble, m, t_h=1.0, gamma_w=None):
    """kappa -> infinity limit -Gamma_s int w / (Gamma (Gamma + Gamma_s))."""
    gw = weisskopf_width(m, t_h) if gamma_w is None else gamma_w
    return float(_weighted(_strong_kernel_derivs(gw, gamma_s), ensemble, m, t_h))


@dataclass(frozen=True)
class WeakLocParams:
    m1: int
    m2: int
    gamma_s: float
    kappa: float

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise ValueError("each lead needs at least one channel")
        if self.kappa < 0 or self.gamma_s <= 0:
            raise ValueError("need kappa >= 0 and gamma_s > 0")

    @property
    def m(self):
        return self.m1 + self.m2


def weak_localization_kernel(mu, gamma_s, kappa):
    """(1/mu) [1 - sqrt(kappa gamma_s/4) / sqrt(mu + kappa/(4 gamma_s) (mu + gamma_s)^2)]."""
    return _kernel_derivs(mu, 1.0, np.sqrt(kappa * gamma_s / 4), kappa / (4 * gamma_s), gamma_s)[0]


def weak_localization(w):
    """Delta G = M1 M2 (2 d/dmu + (mu/2) d^2/dmu^2) kernel(mu) at mu = M."""
    mu = float(w.m)
    _, p1, p2 = _kernel_derivs(mu, 1.0, np.sqrt(w.kappa * w.gamma_s / 4), w.kappa / (4 * w.gamma_s), w.gamma_s)
    return float(w.m1 * w.m2 * (2 * p1 + 0.5 * mu * p2))


def weak_localization_strong_absorption(w):
    """Large-kappa limit: the kernel collapses to 1/(mu + gamma_s)."""
    mu, s = float(w.m), w.gamma_s
    p1 = -1 / (mu + s) ** 2
    p2 = 2 / (mu + s) ** 3
    return float(w.m1 * w.m2 * (2 * p1 + 0.5 * mu * p2))
