"""Scalar diagnostics of quantum states and harmonic spectra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import hermitian_eigenvalues
from .spectrum import HarmonicSpectrum

PSD_TOL = 1e-9


class PSDViolation(ValueError):
    pass


@dataclass
class MetricSeries:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _block(rho):
    return rho.block if hasattr(rho, "block") else np.asarray(rho)


def purity(rho):
    b = _block(rho)
    return float(np.vdot(b, b).real)


def harmonic_weights(rho):
    """W_m = (2 - delta_m0)/P * sum_n |rho_{n+m,n}|^2 for m = 0..dim-1."""
    b = _block(rho)
    k = b.shape[0]
    idx = np.arange(k)
    dist = np.abs(idx[:, None] - idx[None, :]).ravel()
    # each |m| > 0 diagonal is counted twice by the full matrix, which is the 2 - delta_m0 factor
    w = np.bincount(dist, weights=(np.abs(b) ** 2).ravel(), minlength=k)
    return HarmonicSpectrum(w / w.sum())


def fidelity_from_spectrum(spectrum, sigma):
    """F(sigma) = sum_m exp(-sigma^2 m^2 / 2) W_m."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    m = spectrum.m.astype(float)
    return float(np.dot(np.exp(-0.5 * sigma**2 * m**2), spectrum.weights))


def mean_m2(spectrum):
    m = spectrum.m.astype(float)
    return float(np.dot(m**2, spectrum.weights))


def mean_abs_m(spectrum):
    return float(np.sqrt(mean_m2(spectrum)))


def peres_fidelity_general(rho_a, rho_b):
    """Tr[rho_a rho_b] / Tr[rho_a^2]; blocks of different size are zero padded."""
    a, b = _block(rho_a), _block(rho_b)
    k = min(a.shape[0], b.shape[0])
    overlap = np.vdot(a[:k, :k], b[:k, :k]).real  # a Hermitian: Tr[a b] = sum conj(a) * b
    return float(overlap / purity(a))


def averaged_noise_fidelity(rho_clean_traj, rho_av_traj, times=None):
    """F(sigma; t) = Tr[rho(t) rho_av(sigma; t)] / P(t) along aligned trajectories."""
    clean, av = list(rho_clean_traj), list(rho_av_traj)
    if len(clean) != len(av):
        raise ValueError(f"trajectory lengths differ: {len(clean)} vs {len(av)}")
    times = np.arange(len(clean)) if times is None else times
    vals = [peres_fidelity_general(c, a) for c, a in zip(clean, av)]
    return MetricSeries(times, vals, "noise_fidelity")


def shannon_entropy(spectrum):
    w = spectrum.weights
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def shannon_entropy_asymptotic(mean_abs):
    """Large-<|m|> form ln<|m|> + 1 - ln(2)/2."""
    return float(np.log(mean_abs) + 1 - 0.5 * np.log(2))


def von_neumann_entropy(rho, psd_tol=PSD_TOL):
    lam = hermitian_eigenvalues(_block(rho), tol=1e-10)
    if lam[0] < -psd_tol:
        raise PSDViolation(f"eigenvalue {lam[0]:.3e} below -{psd_tol:g}")
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def decoherence_time(sigma, hbar, diffusion_D):
    """Order-of-magnitude estimate sqrt(hbar / (sigma^2 D)); infinite without noise."""
    if hbar <= 0 or diffusion_D <= 0 or sigma < 0:
        raise ValueError("hbar and diffusion_D must be positive, sigma non-negative")
    if sigma == 0:
        return float("inf")
    return float(np.sqrt(hbar / (sigma**2 * diffusion_D)))


def allegiance(rho0, f_t):
    """|Tr[f rho0]|^2; f may be the full operator or its restriction to rho0's block."""
    b = _block(rho0)
    k = b.shape[0]
    f = np.asarray(f_t)[:k, :k]
    return float(abs(np.sum(f.T * b)) ** 2)


def transition_fidelity(rho0, f_t):
    """Tr[f rho0 f^dagger rho0] / Tr[rho0^2]."""
    b = _block(rho0)
    k = b.shape[0]
    f = np.asarray(f_t)[:k, :k]
    x = f @ b @ f.conj().T
    return float(np.vdot(b, x).real / purity(b))


def harmonic_weights_pure(psi):
    """harmonic_weights of |psi><psi| from the autocorrelation of |psi_n|^2."""
    p = np.abs(np.asarray(psi)) ** 2
    n = p.size
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(p, size)
    acf = np.fft.irfft(np.abs(f) ** 2, size)[:n]
    acf = np.clip(acf, 0.0, None)
    acf[1:] *= 2
    return HarmonicSpectrum(acf / acf.sum())
