from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Normalized weights W_0..W_M of the theta-harmonics of a phase-space density.

    Classical (sampled) and quantum (density matrix) pipelines both produce
    this type, so every metric built on it runs the same code for both.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0):
            raise ValueError("harmonic weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"harmonic weights sum to {w.sum():.12f}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_unnormalized(cls, w):
        w = np.asarray(w, dtype=float)
        total = w.sum()
        if not total > 0:
            raise ValueError("cannot normalize an all-zero spectrum")
        return cls(w / total)

    @property
    def m(self):
        return np.arange(self.weights.size)

    def __len__(self):
        return self.weights.size
