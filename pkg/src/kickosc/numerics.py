"""Dense matrix kernels and seeded random streams shared by the other modules."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl

HERMITIAN_TOL = 1e-12


class NotHermitianError(ValueError):
    def __init__(self, asymmetry):
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {asymmetry:.3e}")
        self.asymmetry = asymmetry


def asymmetry(a):
    """Largest absolute entry of A - A^H."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def hermitian_eigensystem(a, tol=HERMITIAN_TOL):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    Raises NotHermitianError when the input deviates from Hermiticity by more
    than `tol` in max-norm.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = asymmetry(a)
    if asym > tol:
        raise NotHermitianError(asym)
    return sl.eigh(a)


def hermitian_eigenvalues(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    asym = asymmetry(a)
    if asym > tol:
        raise NotHermitianError(asym)
    return sl.eigvalsh(a)


def _position_eigensystem(n_max):
    # a + a^dagger in the truncated Fock basis is real symmetric tridiagonal
    off = np.sqrt(np.arange(1, n_max, dtype=float))
    return sl.eigh_tridiagonal(np.zeros(n_max), off)


def displacement_matrix(eta, n_max):
    """Truncated displacement operator exp(eta a^dagger - conj(eta) a).

    The truncated generator is exponentiated exactly. Up to diagonal phases it
    equals |eta| (a^dagger - a), whose spectrum follows from the tridiagonal
    a + a^dagger, so the result is unitary on the truncated space to rounding.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    eta = complex(eta)
    r = abs(eta)
    if r == 0.0:
        return np.eye(n_max, dtype=complex)
    lam, v = _position_eigensystem(n_max)
    d = (v * np.exp(1j * r * lam)) @ v.T
    psi = np.angle(eta) - np.pi / 2
    if psi != 0.0:
        ph = np.exp(1j * psi * np.arange(n_max))
        d = ph[:, None] * d * ph.conj()[None, :]
    return d


@dataclass
class RandomStream:
    """Reproducible normal-variate stream keyed by (master_seed, stream_index).

    Distinct indices give independent streams through numpy's SeedSequence
    spawn keys; the same pair always replays the same draws.
    """

    master_seed: int
    stream_index: int = 0
    rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.rng = np.random.default_rng(self.seed_sequence())

    def seed_sequence(self, *extra):
        return np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_index), *extra))

    def substream(self, *key):
        """Fresh generator for a sub-key, independent of this stream's position."""
        return np.random.default_rng(self.seed_sequence(*key))


def gaussian_draw(stream, size=None):
    """Standard normal variate(s) from the stream."""
    return stream.rng.standard_normal(size)


def richardson_derivative(f, x, order=1, h=1e-2, levels=6):
    """First or second derivative of f at x by Richardson-extrapolated central differences."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")

    def central(step):
        if order == 1:
            return (f(x + step) - f(x - step)) / (2 * step)
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2

    table = [[central(h / 2**i)] for i in range(levels)]
    for j in range(1, levels):
        for i in range(j, levels):
            # error series of central differences is even in the step
            table[i].append(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (4**j - 1))
    return table[-1][-1]
