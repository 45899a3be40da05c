"""Quantum kicked oscillator in a truncated Fock basis.

States are kept as their populated upper-left block. The rest of the n_max x
n_max matrix is zero to below 1e-16 and is materialized only on request,
which keeps early-time steps cheap even at large n_max.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import RandomStream, asymmetry, displacement_matrix, gaussian_draw

# populations below this are dropped from the active block
TRIM_TOL = 1e-16


class TruncationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FloquetSpec:
    omega0: float = 0.5
    g0: float = 2.0
    hbar: float = 1.0
    n_max: int = 1024

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.n_max < 16:
            raise ValueError("n_max must be at least 16")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError("sigma must be finite and non-negative")


class FockDensityMatrix:
    """Density matrix whose support lies in the first `dim` Fock levels."""

    def __init__(self, block, n_max):
        block = np.asarray(block, dtype=complex)
        if block.ndim != 2 or block.shape[0] != block.shape[1]:
            raise ValueError("density block must be square")
        if block.shape[0] > n_max:
            raise ValueError("block larger than n_max")
        self.block = block
        self.n_max = int(n_max)

    @property
    def dim(self):
        return self.block.shape[0]

    @property
    def rho(self):
        full = np.zeros((self.n_max, self.n_max), dtype=complex)
        full[: self.dim, : self.dim] = self.block
        return full

    def trace(self):
        return float(np.trace(self.block).real)

    def validate(self, herm_tol=1e-10, trace_tol=1e-9, psd_tol=1e-10):
        """Raise ValueError if Hermiticity, unit trace or PSD fails."""
        asym = asymmetry(self.block)
        if asym > herm_tol:
            raise ValueError(f"density matrix not Hermitian (asymmetry {asym:.3e})")
        tr = np.trace(self.block)
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"trace {tr.real:.12f} differs from 1")
        lam_min = np.linalg.eigvalsh(self.block)[0]
        if lam_min < -psd_tol:
            raise ValueError(f"negative eigenvalue {lam_min:.3e}")
        return self

    @classmethod
    def from_matrix(cls, rho):
        rho = np.asarray(rho, dtype=complex)
        return cls(rho, rho.shape[0]).trimmed()

    def trimmed(self, tol=TRIM_TOL):
        d = np.diagonal(self.block).real
        tail = np.cumsum(d[::-1])[::-1]
        keep = np.nonzero(tail >= tol)[0]
        k = int(keep[-1]) + 1 if keep.size else 1
        if k == self.dim:
            return self
        return FockDensityMatrix(self.block[:k, :k], self.n_max)

    @classmethod
    def pure(cls, psi, n_max=None):
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), n_max or psi.size).trimmed()


class FloquetOperator:
    """One-period propagator with a per-column reach table.

    reach[k] is the number of rows that carry all but TRIM_TOL of the weight
    of columns 0..k-1, so a state confined to k levels maps into reach[k].
    """

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=complex)
        w = np.abs(self.matrix) ** 2
        tail = np.cumsum(w[::-1], axis=0)[::-1]
        # first row index r with sum_{i >= r} |U_ik|^2 < tol, per column
        col_reach = np.argmax(tail < TRIM_TOL, axis=0)
        col_reach[np.all(tail >= TRIM_TOL, axis=0)] = self.n_max
        self.reach = np.concatenate([[0], np.maximum.accumulate(col_reach)])

    @property
    def n_max(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def apply(self, block):
        """U rho U^dagger restricted to rows/cols the image can populate."""
        k = block.shape[0]
        r = max(int(self.reach[k]), 1)
        u = self.matrix[:r, :k]
        return u @ block @ u.conj().T

    def columns(self, a):
        """U @ a for a thin matrix a whose rows beyond len(a) are zero."""
        k = a.shape[0]
        r = max(int(self.reach[k]), 1)
        return self.matrix[:r, :k] @ a


@lru_cache(maxsize=8)
def _floquet_cached(spec):
    n = np.arange(spec.n_max)
    d = displacement_matrix(1j * spec.g0 / np.sqrt(spec.hbar), spec.n_max)
    phase = np.exp(-1j * (spec.omega0 * n + spec.hbar * n.astype(float) ** 2))
    return FloquetOperator(phase[:, None] * d)


def build_floquet(spec):
    """U = diag(exp(-i(omega0 n + hbar n^2))) D(i g0 / sqrt(hbar)); cached per spec."""
    return _floquet_cached(spec)


def _as_operator(u):
    return u if isinstance(u, FloquetOperator) else np.asarray(u, dtype=complex)


def _conjugate(rho, u):
    u = _as_operator(u)
    if isinstance(u, FloquetOperator):
        return u.apply(rho.block)
    k = rho.dim
    return u[:, :k] @ rho.block @ u[:, :k].conj().T


def initial_mixed_state(delta, spec):
    """Thermal-like diagonal state rho_nn = (hbar/(delta+hbar)) (delta/(delta+hbar))^n."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    hbar = spec.hbar
    q = delta / (delta + hbar)
    lost = q ** spec.n_max
    if lost > 1e-10:
        raise TruncationError(f"n_max={spec.n_max} drops {lost:.3e} of the initial population")
    if q == 0:
        k = 1
    else:
        k = min(spec.n_max, int(np.ceil(np.log(TRIM_TOL) / np.log(q))) + 1)
    p = (1 - q) * q ** np.arange(k)
    p /= p.sum()
    return FockDensityMatrix(np.diag(p).astype(complex), spec.n_max)


def unitary_step(rho, u):
    return FockDensityMatrix(_conjugate(rho, u), rho.n_max).trimmed()


def _phase_kick(block, xi):
    ph = np.exp(-1j * xi * np.arange(block.shape[0]))
    return ph[:, None] * block * ph.conj()[None, :]


def noisy_step(rho, u, xi):
    """exp(-i xi n) U rho U^dagger exp(i xi n) for one noise value xi."""
    return FockDensityMatrix(_phase_kick(_conjugate(rho, u), xi), rho.n_max).trimmed()


def dephasing_mask(dim, sigma):
    k = np.arange(dim)
    profile = np.exp(-0.5 * sigma**2 * k.astype(float) ** 2)
    return profile[np.abs(k[:, None] - k[None, :])]


def averaged_step(rho, u, sigma):
    """Noise-averaged step: off-diagonal (n', n) damped by exp(-sigma^2 (n'-n)^2 / 2)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    b = _conjugate(rho, u)
    if sigma > 0:
        b = b * dephasing_mask(b.shape[0], sigma)
    return FockDensityMatrix(b, rho.n_max).trimmed()


def occupation_distribution(rho):
    w = np.zeros(rho.n_max)
    w[: rho.dim] = np.diagonal(rho.block).real
    return w


def truncation_check(rho, tail_fraction, threshold=1e-8):
    """Occupation of the top `tail_fraction` levels; passes below `threshold`."""
    if not 0 < tail_fraction < rho.n_max:
        raise ValueError("tail_fraction must lie in (0, n_max)")
    start = rho.n_max - tail_fraction
    leak = float(np.sum(np.diagonal(rho.block).real[start:])) if rho.dim > start else 0.0
    return leak < threshold, leak


def evolve(rho0, spec, t, noise=None, mode="averaged", realization=0,
           check_every=10, tail_fraction=None, leak_threshold=1e-8):
    """Yield the state at times 0..t.

    mode "averaged" applies the closed-form dephasing channel; mode
    "per_realization" draws xi_tau = sigma * N(0,1) from the stream
    (noise.master_seed, realization). Every `check_every` steps the top
    `tail_fraction` levels (default n_max // 8) must hold less than
    `leak_threshold`, else TruncationError is raised.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if mode not in ("averaged", "per_realization"):
        raise ValueError(f"unknown mode {mode!r}")
    noise = noise or NoiseSpec()
    u = build_floquet(spec)
    tail_fraction = tail_fraction or spec.n_max // 8
    stream = RandomStream(noise.master_seed, realization) if mode == "per_realization" else None
    rho = rho0
    yield rho
    for step in range(1, t + 1):
        if mode == "averaged":
            rho = averaged_step(rho, u, noise.sigma)
        else:
            rho = noisy_step(rho, u, noise.sigma * gaussian_draw(stream))
        if check_every and step % check_every == 0:
            ok, leak = truncation_check(rho, tail_fraction, leak_threshold)
            if not ok:
                raise TruncationError(f"step {step}: top {tail_fraction} levels hold {leak:.3e}")
        yield rho


def echo_operator(spec, epsilon, t):
    """f(t) = U^{-t} U_V^t with U_V built from H0 + epsilon*hbar*n (omega0 -> omega0 + epsilon)."""
    u = build_floquet(spec).matrix
    uv = build_floquet(FloquetSpec(spec.omega0 + epsilon, spec.g0, spec.hbar, spec.n_max)).matrix
    return np.linalg.matrix_power(u.conj().T, t) @ np.linalg.matrix_power(uv, t)


def echo_blocks(spec, epsilon, k, t_max):
    """Yield f(t) restricted to the first k levels for t = 0..t_max.

    Only the first k columns of U^t and U_V^t are propagated; the restricted
    echo operator is their overlap A^dagger B.
    """
    u = build_floquet(spec)
    uv = build_floquet(FloquetSpec(spec.omega0 + epsilon, spec.g0, spec.hbar, spec.n_max))
    a = np.eye(k, dtype=complex)
    b = a.copy()
    yield a.copy()
    for _ in range(t_max):
        a = u.columns(a)
        b = uv.columns(b)
        r = min(a.shape[0], b.shape[0])
        yield a[:r].conj().T @ b[:r]
        a, b = _trim_rows(a), _trim_rows(b)


def _trim_rows(a):
    w = np.sum(np.abs(a) ** 2, axis=1)
    tail = np.cumsum(w[::-1])[::-1]
    keep = np.nonzero(tail >= TRIM_TOL)[0]
    return a[: int(keep[-1]) + 1] if keep.size else a[:1]


def pure_step(psi, u, xi=0.0):
    """exp(-i xi n) U psi for a state vector confined to its leading entries."""
    u = _as_operator(u)
    out = u.columns(psi[:, None])[:, 0] if isinstance(u, FloquetOperator) else u[:, : psi.size] @ psi
    if xi:
        out = out * np.exp(-1j * xi * np.arange(out.size))
    w = np.abs(out) ** 2
    tail = np.cumsum(w[::-1])[::-1]
    keep = np.nonzero(tail >= TRIM_TOL)[0]
    return out[: int(keep[-1]) + 1] if keep.size else out[:1]
