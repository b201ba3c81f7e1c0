"""Shared result container for per-UE spectral efficiency."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aging import FrameConfig


@dataclass
class SEResult:
    """Per-UE effective SINR trajectory and the resulting spectral efficiency.

    se[k] = (1/tau_c) * sum over data instants of log2(1 + sinr[k, n]); the
    pilot overhead is absorbed by the 1/tau_c normalization, since only
    tau_c - tau_p instants contribute.  Schemes whose bound averages the
    log directly (the small-cell bound) store an equivalent SINR so that
    this identity still holds.
    """

    scheme: str
    sinr: np.ndarray           # (K, n_data) real
    se: np.ndarray             # (K,) bits/s/Hz
    instants: np.ndarray       # (n_data,)
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_sinr(cls, scheme: str, sinr: np.ndarray, frame: FrameConfig, **extras):
        sinr = np.asarray(sinr, dtype=float)
        se = np.log2(1.0 + sinr).sum(axis=1) / frame.tau_c
        return cls(scheme=scheme, sinr=sinr, se=se,
                   instants=frame.data_instants, extras=dict(extras))
