"""Network geometry, large-scale fading, and spatial correlation.

A drop places L APs (N-antenna ULAs) and K single-antenna UEs uniformly at
random on a square service area.  Large-scale gains follow a three-slope
distance law with log-normal shadowing beyond 50 m; shadowing terms are
correlated across links through both the UE and the AP ends.  Per-link
antenna correlation matrices use a Gaussian local-scattering profile around
the UE's nominal angle as seen from the AP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

_SHADOW_STD_DB = 8.0        # log-normal shadowing standard deviation
_SHADOW_DECORR_M = 100.0    # distance at which end-point correlation halves
_SHADOW_MIN_DIST = 50.0     # shadowing applies only beyond this distance


@dataclass(frozen=True)
class SystemDims:
    """Network size: L APs with N antennas each, K single-antenna UEs."""

    L: int
    K: int
    N: int

    def __post_init__(self):
        if self.L < 1 or self.K < 1 or self.N < 1:
            raise ValueError("L, K, N must all be positive")


@dataclass
class ScenarioGeometry:
    ap_positions: np.ndarray   # (L, 2) meters
    ue_positions: np.ndarray   # (K, 2) meters
    dist: np.ndarray           # (K, L) UE-to-AP distances
    ue_dist: np.ndarray        # (K, K) UE-to-UE distances
    ap_dist: np.ndarray        # (L, L) AP-to-AP distances
    area_side: float


@dataclass
class LargeScaleFading:
    beta: np.ndarray           # (K, L) linear channel gains
    beta_db: np.ndarray        # (K, L) same in dB
    shadow_db: np.ndarray      # (K, L) shadowing component (zero below 50 m)


@dataclass
class SpatialCorrelation:
    """Per-link antenna correlation matrices R[k, l] with tr(R)/N = beta."""

    R: np.ndarray              # (K, L, N, N) complex
    asd_deg: Optional[float]   # None means uncorrelated (R = beta * I)
    nominal_angle: np.ndarray  # (K, L) radians, AP-to-UE bearing


@dataclass
class Scenario:
    """One network drop bundled with its statistics."""

    dims: SystemDims
    geometry: ScenarioGeometry
    lsf: LargeScaleFading
    correlation: SpatialCorrelation


def pathloss_db(dist):
    """Three-slope distance law in dB, without shadowing.

    Flat below 10 m, 20 dB/decade to 50 m, 35 dB/decade beyond.  The model
    is discontinuous at the 50 m breakpoint; callers should not assume
    continuity.
    """
    d = np.asarray(dist, dtype=float)
    with np.errstate(divide="ignore"):
        logd = np.log10(np.maximum(d, np.finfo(float).tiny))
    out = np.where(d < 10.0, -81.2, -61.2 - 20.0 * logd)
    return np.where(d >= _SHADOW_MIN_DIST, -35.7 - 35.0 * logd, out)


def _pairwise_dist(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def shadowing_covariance(geometry: ScenarioGeometry):
    """Covariance of the shadowing terms over links with dist >= 50 m.

    Returns (cov, pairs) where pairs lists the (k, l) indices in row order.
    Cov[(k,l),(i,j)] = (std^2/2) * (2^(-d_ue(k,i)/100) + 2^(-d_ap(l,j)/100)):
    links fade together when they share a congested UE region or AP region.
    """
    mask = geometry.dist >= _SHADOW_MIN_DIST
    ks, ls = np.nonzero(mask)
    a = 2.0 ** (-geometry.ue_dist[np.ix_(ks, ks)] / _SHADOW_DECORR_M)
    b = 2.0 ** (-geometry.ap_dist[np.ix_(ls, ls)] / _SHADOW_DECORR_M)
    cov = (_SHADOW_STD_DB ** 2 / 2.0) * (a + b)
    return cov, list(zip(ks.tolist(), ls.tolist()))


def _sample_shadowing(geometry: ScenarioGeometry, rng: np.random.Generator):
    """Draw correlated shadowing for every link, zeroed below 50 m.

    Realized as the sum of one Gaussian field over UEs and one over APs,
    F[k,l] = (std/sqrt(2)) * (u[k] + v[l]); this reproduces the covariance
    of shadowing_covariance exactly while only factoring KxK and LxL
    matrices.  The two component fields use a 2^(-d/100) distance kernel,
    which is positive definite, so tiny negative eigenvalues are numerical
    noise; anything beyond -1e-6 would be a bug.
    """
    def field_draw(distmat, n):
        cov = 2.0 ** (-distmat / _SHADOW_DECORR_M)
        w, v = np.linalg.eigh(cov)
        if np.any(w < -1e-6):
            raise np.linalg.LinAlgError("shadowing kernel is not PSD")
        w = np.clip(w, 0.0, None)
        return (v * np.sqrt(w)) @ rng.standard_normal(n)

    u = field_draw(geometry.ue_dist, geometry.ue_dist.shape[0])
    v = field_draw(geometry.ap_dist, geometry.ap_dist.shape[0])
    f = (_SHADOW_STD_DB / np.sqrt(2.0)) * (u[:, None] + v[None, :])
    return np.where(geometry.dist >= _SHADOW_MIN_DIST, f, 0.0)


def generate_drop(dims: SystemDims, area_side: float, seed, shadowing: bool = True):
    """Uniform iid placement plus large-scale gains; deterministic in seed."""
    if area_side <= 0:
        raise ValueError("area side must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    ap = rng.uniform(0.0, area_side, size=(dims.L, 2))
    ue = rng.uniform(0.0, area_side, size=(dims.K, 2))
    geom = ScenarioGeometry(
        ap_positions=ap,
        ue_positions=ue,
        dist=_pairwise_dist(ue, ap),
        ue_dist=_pairwise_dist(ue, ue),
        ap_dist=_pairwise_dist(ap, ap),
        area_side=float(area_side),
    )
    shadow = _sample_shadowing(geom, rng) if shadowing else np.zeros_like(geom.dist)
    beta_db = pathloss_db(geom.dist) + shadow
    lsf = LargeScaleFading(beta=10.0 ** (beta_db / 10.0), beta_db=beta_db, shadow_db=shadow)
    return geom, lsf


def build_correlation(dims: SystemDims, geometry: ScenarioGeometry,
                      lsf: LargeScaleFading, asd_deg) -> SpatialCorrelation:
    """Per-link correlation matrices for half-wavelength ULAs.

    asd_deg is the angular standard deviation of the Gaussian local
    scattering profile, or None/"uncorrelated" for R = beta * I.  Arrays are
    broadside along the x axis, so the nominal angle is the AP-to-UE bearing
    measured from that axis.

    [R]_{m,n} = beta * exp(j pi (m-n) sin(phi))
                     * exp(-(sigma_phi * pi * (m-n) * cos(phi))^2 / 2)

    The diagonal equals beta, so tr(R)/N = beta holds by construction.  The
    matrix is a diagonal-phase congruence of a Gaussian-kernel Toeplitz
    matrix, hence PSD up to rounding.
    """
    diff = geometry.ue_positions[:, None, :] - geometry.ap_positions[None, :, :]
    phi = np.arctan2(diff[..., 1], diff[..., 0])
    if asd_deg is None or (isinstance(asd_deg, str) and asd_deg == "uncorrelated"):
        eye = np.eye(dims.N)
        r = lsf.beta[:, :, None, None] * eye[None, None, :, :]
        return SpatialCorrelation(R=r.astype(complex), asd_deg=None, nominal_angle=phi)

    sigma = np.deg2rad(float(asd_deg))
    m = np.arange(dims.N)
    gap = m[:, None] - m[None, :]                       # (N, N) antenna index offsets
    phase = np.exp(1j * np.pi * gap[None, None] * np.sin(phi)[..., None, None])
    spread = np.exp(-0.5 * (sigma * np.pi * gap[None, None] * np.cos(phi)[..., None, None]) ** 2)
    r = lsf.beta[:, :, None, None] * phase * spread
    return SpatialCorrelation(R=r, asd_deg=float(asd_deg), nominal_angle=phi)


def generate_scenario(dims: SystemDims, area_side: float, seed,
                      shadowing: bool = True, asd_deg=30.0) -> Scenario:
    """Full drop: placement, large-scale fading, and correlation matrices."""
    geom, lsf = generate_drop(dims, area_side, seed, shadowing)
    corr = build_correlation(dims, geom, lsf, asd_deg)
    return Scenario(dims=dims, geometry=geom, lsf=lsf, correlation=corr)


def drop_to_json(scenario: Scenario, include_correlation: bool = False) -> dict:
    """JSON-serializable dump of a drop (positions and gains in dB).

    Correlation matrices are optional and stored as separate real and
    imaginary arrays.
    """
    out = {
        "L": scenario.dims.L,
        "K": scenario.dims.K,
        "N": scenario.dims.N,
        "area_side_m": scenario.geometry.area_side,
        "ap_positions_m": scenario.geometry.ap_positions.tolist(),
        "ue_positions_m": scenario.geometry.ue_positions.tolist(),
        "beta_dB": scenario.lsf.beta_db.tolist(),
        "shadow_dB": scenario.lsf.shadow_db.tolist(),
        "asd_deg": scenario.correlation.asd_deg,
    }
    if include_correlation:
        out["R_real"] = scenario.correlation.R.real.tolist()
        out["R_imag"] = scenario.correlation.R.imag.tolist()
    return out
