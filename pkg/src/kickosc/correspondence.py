"""Classical versus quantum position densities of a harmonic oscillator level.

A single eigenstate density oscillates on the scale of the local de Broglie
wavelength. An incoherent mixture of a few neighbouring levels, or a boxcar
average over half a wavelength, recovers the classical density mw/(pi p_c).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

MAX_LEVEL = 10_000


@dataclass(frozen=True)
class WellSpec:
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.mass, self.omega, self.hbar) <= 0:
            raise ValueError("mass, omega and hbar must be positive")

    def energy(self, n):
        return self.hbar * self.omega * (n + 0.5)

    def amplitude(self, n):
        """Classical turning point at energy E_n."""
        return np.sqrt(2 * self.energy(n) / (self.mass * self.omega**2))

    def momentum(self, x, n):
        """p_c(x) inside the turning points, 0 outside."""
        a = self.amplitude(n)
        return self.mass * self.omega * np.sqrt(np.clip(a**2 - np.asarray(x) ** 2, 0.0, None))

    @property
    def length(self):
        return np.sqrt(self.hbar / (self.mass * self.omega))


def default_grid(well, n, points=2001, span=1.5):
    a = well.amplitude(n)
    return np.linspace(-span * a, span * a, points)


def classical_density(well, n, x=None):
    """Classical density at E_n, averaged over the grid cell centred on each x.

    Cell averages come from the exact distribution function
    1/2 + arcsin(x/A)/pi, so the inverse-square-root edges are integrable.
    """
    x = default_grid(well, n) if x is None else np.asarray(x, dtype=float)
    a = well.amplitude(n)
    edges = np.concatenate([[x[0] - (x[1] - x[0]) / 2], (x[1:] + x[:-1]) / 2, [x[-1] + (x[-1] - x[-2]) / 2]])
    cdf = np.arcsin(np.clip(edges / a, -1.0, 1.0)) / np.pi
    return x, np.diff(cdf) / np.diff(edges)


def classical_density_pointwise(well, n, x):
    x = np.asarray(x, dtype=float)
    p = well.momentum(x, n)
    with np.errstate(divide="ignore"):
        return np.where(p > 0, well.mass * well.omega / (np.pi * p), 0.0)


def _hermite_functions(xi, n_top):
    """|psi_k(xi)|^2 for k = 0..n_top in units of the oscillator length.

    Three-term recurrence on mantissas with a running log scale per point,
    so the Gaussian factor never underflows.
    """
    if n_top > MAX_LEVEL:
        raise OverflowError(f"level {n_top} exceeds the supported maximum {MAX_LEVEL}")
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_top + 1, xi.size))
    log_scale = -0.5 * xi**2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(xi)
    cur = np.ones_like(xi)
    out[0] = np.exp(2 * log_scale)
    for k in range(n_top):
        nxt = np.sqrt(2.0 / (k + 1)) * xi * cur - np.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur, prev = cur / s, prev / s
            log_scale = log_scale + np.log(s)
        out[k + 1] = cur**2 * np.exp(2 * log_scale)
    return out


def quantum_density(well, n, x=None):
    """Exact |psi_n(x)|^2."""
    x = default_grid(well, n) if x is None else np.asarray(x, dtype=float)
    if n < 0:
        raise ValueError("level must be non-negative")
    ell = well.length
    return x, _hermite_functions(x / ell, n)[n] / ell


def mixed_density(well, n_center, dn, x=None):
    """Equal-weight incoherent mixture of levels n_center-dn .. n_center+dn."""
    if dn < 0 or n_center - dn < 0:
        raise ValueError("need 0 <= dn <= n_center")
    x = default_grid(well, n_center) if x is None else np.asarray(x, dtype=float)
    dens = _hermite_functions(x / well.length, n_center + dn)[n_center - dn:] / well.length
    return x, dens.mean(axis=0)


def window_averaged_density(well, n, x=None):
    """Boxcar average of |psi_n|^2 over dx = pi hbar / p_c(x) centred on each x.

    Defined inside the turning points; outside them the bare density is returned.
    """
    x = default_grid(well, n) if x is None else np.asarray(x, dtype=float)
    _, rho = quantum_density(well, n, x)
    cum = cumulative_trapezoid(rho, x, initial=0.0)
    p = well.momentum(x, n)
    inside = p > 0
    half = np.where(inside, np.pi * well.hbar / np.where(inside, p, 1.0) / 2, 0.0)
    lo = np.interp(x - half, x, cum)
    hi = np.interp(x + half, x, cum)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = (hi - lo) / (2 * half)
    return x, np.where(inside, avg, rho)


def inner_distance(well, n, density, x, fraction=0.8):
    """Max |density - classical| over |x| < fraction*A, relative to the classical peak there."""
    a = well.amplitude(n)
    sel = np.abs(x) < fraction * a
    wc = classical_density_pointwise(well, n, x[sel])
    return float(np.max(np.abs(density[sel] - wc)) / np.max(wc))
