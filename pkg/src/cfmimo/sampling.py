"""Shared randomness helpers: seed-keyed streams and complex Gaussian draws."""

from __future__ import annotations

import numpy as np


def stream(seed, *key) -> np.random.Generator:
    """Independent generator derived from a base seed and an integer key path.

    Streams for distinct key paths are statistically independent and
    reproducible regardless of the order they are created in, which is what
    keeps results identical across worker counts.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key)))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: unit-variance circularly symmetric complex Gaussians."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def cov_factor(r: np.ndarray, rel_tol: float = 1e-6) -> np.ndarray:
    """Factor F with F F^H = R for a batch of Hermitian PSD matrices.

    Tries Cholesky first; on failure falls back to an eigendecomposition with
    small negative eigenvalues (relative to the largest) clamped to zero.
    Violations beyond rel_tol indicate a broken covariance and raise.
    """
    try:
        return np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(r)
        scale = np.maximum(w.max(axis=-1, keepdims=True), np.finfo(float).tiny)
        if np.any(w < -rel_tol * scale):
            raise np.linalg.LinAlgError(
                "covariance matrix has a significantly negative eigenvalue")
        w = np.clip(w, 0.0, None)
        return v * np.sqrt(w)[..., None, :]
