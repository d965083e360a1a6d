"""Distance-decay, correlation, attenuation and feature statistics of encodings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoder import EncoderConfig, map_to_complex, projection_for, stabilize, raw_features
from .lattice import nearest_lattice_distance

N_BINS = 80
C_BASE = 6.0
C_RANGE = 14.0
SAT_THRESHOLD = 0.99
ZERO_THRESHOLD = 0.01


class ZeroVector(ValueError):
    pass


class NormFloorViolated(ValueError):
    pass


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("cosine similarity of a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def pearson(x, y) -> float:
    """Two-pass Pearson correlation; NaN when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx == 0 or syy == 0:
        return math.nan
    return float((dx @ dy) / math.sqrt(sxx * syy))


def _unit_rows(e: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(e, axis=1, keepdims=True)
    if np.any(n == 0):
        raise ZeroVector("encoding field contains a zero vector")
    return e / n


def _pair_geometry(h: int, w: int):
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    pos = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(np.float64)
    iu = np.triu_indices(h * w, k=1)
    dist = np.linalg.norm(pos[iu[0]] - pos[iu[1]], axis=1)
    return iu, dist


def pairwise_cosine(e: np.ndarray, iu) -> np.ndarray:
    q = _unit_rows(e)
    return np.clip((q @ q.T)[iu], -1.0, 1.0)


@dataclass
class DecayReport:
    bin_centers: np.ndarray
    bin_means: np.ndarray          # NaN for empty bins
    bin_counts: np.ndarray
    pearson_rho: float             # over the non-empty bins
    pearson_rho_unbinned: float
    rho_defined: bool
    n_pairs: int
    raw_sim_min: float
    raw_sim_max: float
    monotonicity_fraction: float
    raw_bin_means: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(x) else float(x) for x in a]
        return {
            "bin_centers": clean(self.bin_centers),
            "bin_means": clean(self.bin_means),
            "bin_counts": [int(c) for c in self.bin_counts],
            "pearson_rho": None if not self.rho_defined else self.pearson_rho,
            "pearson_rho_unbinned": None if math.isnan(self.pearson_rho_unbinned) else self.pearson_rho_unbinned,
            "rho_defined": self.rho_defined,
            "n_pairs": self.n_pairs,
            "raw_sim_min": self.raw_sim_min,
            "raw_sim_max": self.raw_sim_max,
            "monotonicity_fraction": self.monotonicity_fraction,
        }


def distance_decay_report(encodings: np.ndarray, h: int, w: int,
                          content_seed: int | None = None,
                          content_scale: float = 1.0) -> DecayReport:
    """Binned cosine-similarity vs. relative-distance curve over all patch pairs.

    Distances are rescaled to [0, 100] by the largest pair distance and
    similarities min-max rescaled to [6, 20].  With ``content_seed`` set,
    N(0, content_scale^2) content vectors are added to the encodings first.
    """
    if h * w < 4:
        raise ValueError("need at least 4 patches")
    e = np.asarray(encodings, dtype=np.float64).reshape(h * w, -1)
    if content_seed is not None:
        rng = np.random.default_rng(content_seed)
        e = e + content_scale * rng.standard_normal(e.shape)

    iu, dist = _pair_geometry(h, w)
    sim = pairwise_cosine(e, iu)
    d_rel = dist / dist.max() * 100.0
    s_min, s_max = float(sim.min()), float(sim.max())
    span = s_max - s_min
    if span > 0:
        s_rel = C_BASE + (sim - s_min) / span * C_RANGE
    else:
        s_rel = np.full_like(sim, C_BASE)

    edges = np.linspace(0.0, 100.0, N_BINS + 1)
    idx = np.clip(np.searchsorted(edges, d_rel, side="right") - 1, 0, N_BINS - 1)
    counts = np.bincount(idx, minlength=N_BINS)
    sums = np.bincount(idx, weights=s_rel, minlength=N_BINS)
    raw_sums = np.bincount(idx, weights=sim, minlength=N_BINS)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
        raw_means = np.where(counts > 0, raw_sums / counts, np.nan)
    centers = 0.5 * (edges[:-1] + edges[1:])

    ok = counts > 0
    rho = pearson(centers[ok], means[ok]) if span > 0 else math.nan
    steps = np.diff(means[ok])
    mono = float(np.mean(steps < 0)) if steps.size else math.nan
    return DecayReport(
        bin_centers=centers,
        bin_means=means,
        bin_counts=counts,
        pearson_rho=rho,
        pearson_rho_unbinned=pearson(d_rel, s_rel) if span > 0 else math.nan,
        rho_defined=not math.isnan(rho),
        n_pairs=int(sim.size),
        raw_sim_min=s_min,
        raw_sim_max=s_max,
        monotonicity_fraction=mono,
        raw_bin_means=raw_means,
    )


def dissimilarity_correlation(field: np.ndarray) -> float:
    """Pearson rho between grid distance and ``1 - cos`` over every unordered patch pair."""
    f = np.asarray(field, dtype=np.float64)
    h, w = f.shape[:2]
    iu, dist = _pair_geometry(h, w)
    sim = pairwise_cosine(f.reshape(h * w, -1), iu)
    return pearson(dist, 1.0 - sim)


@dataclass(frozen=True)
class FeatureStats:
    mean_abs: float
    std: float
    sat_frac: float
    zero_frac: float


def feature_stats(field: np.ndarray) -> FeatureStats:
    """Stats over all components; fractions are in [0, 1] (not percent)."""
    f = np.asarray(field, dtype=np.float64).ravel()
    a = np.abs(f)
    return FeatureStats(
        mean_abs=float(a.mean()),
        std=float(f.std()),
        sat_frac=float(np.mean(a > SAT_THRESHOLD)),
        zero_frac=float(np.mean(a < ZERO_THRESHOLD)),
    )


# --- local attenuation -----------------------------------------------------

@dataclass
class AttenuationReport:
    n_base: int
    radii: np.ndarray
    n_angles: int
    violations: int                 # samples with 1 - s < -1e-12
    min_one_minus_s: float
    c_hat: np.ndarray               # max (1 - s)/r^2 per radius
    c_hat_ratio_small: float        # c_hat[r1] / c_hat[r0] for the two smallest radii
    fit_coeff: np.ndarray           # per base point, c in 1 - s_bar = c r^2
    fit_r2: np.ndarray              # per base point
    s_bar: np.ndarray               # (n_base, n_radii)

    @property
    def min_r2(self) -> float:
        return float(np.min(self.fit_r2))

    @property
    def c_hat_stable(self) -> bool:
        return 0.5 <= self.c_hat_ratio_small <= 2.0

    def to_dict(self) -> dict:
        return {
            "n_base": self.n_base,
            "radii": self.radii.tolist(),
            "n_angles": self.n_angles,
            "violations": self.violations,
            "min_one_minus_s": self.min_one_minus_s,
            "c_hat": self.c_hat.tolist(),
            "c_hat_ratio_small": self.c_hat_ratio_small,
            "c_hat_stable": self.c_hat_stable,
            "min_fit_r2": self.min_r2,
            "median_fit_coeff": float(np.median(self.fit_coeff)),
        }


def projected_unit(z, cfg: EncoderConfig, spec=None, norm_floor: float = 1e-8) -> np.ndarray:
    """``p(z) = W tanh(alpha_scale psi(z)) + b`` normalised to unit length."""
    spec = spec if spec is not None else projection_for(cfg)
    phi = stabilize(raw_features(z, cfg), cfg)
    p = phi @ spec.weights.T + spec.bias
    n = np.linalg.norm(p, axis=-1, keepdims=True)
    if np.any(n < norm_floor):
        raise NormFloorViolated(f"min encoding norm {float(n.min()):.3g} below floor {norm_floor:g}")
    return p / n


def local_attenuation_check(cfg: EncoderConfig, domain_margin: float = 0.3, n_base: int = 50,
                            delta_radii=(0.005, 0.01, 0.02, 0.03, 0.04, 0.05),
                            n_angles: int = 16, seed: int = 0,
                            norm_floor: float = 1e-8) -> AttenuationReport:
    """Sample ``s(z, delta)`` on circles around base points drawn from the patch domain.

    Base points are mapped patch coordinates whose whole sampling disc stays
    at least ``domain_margin`` from the lattice.
    """
    radii = np.sort(np.asarray(delta_radii, dtype=np.float64))
    if radii[0] <= 0:
        raise ValueError("radii must be positive")
    lat = cfg.effective_lattice()
    rng = np.random.default_rng(seed)
    base = []
    while len(base) < n_base:
        u, v = rng.uniform(0, 1, size=2 * n_base), rng.uniform(0, 1, size=2 * n_base)
        z = np.asarray(map_to_complex(u, v, cfg))
        ok = nearest_lattice_distance(z, lat) >= domain_margin + radii[-1]
        base.extend(z[ok].tolist())
    base = np.array(base[:n_base])

    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    offsets = radii[:, None] * np.exp(1j * angles)[None, :]          # (R, A)
    q0 = projected_unit(base, cfg, norm_floor=norm_floor)             # (B, d)
    q1 = projected_unit(base[:, None, None] + offsets[None], cfg, norm_floor=norm_floor)
    s = np.einsum("bd,brad->bra", q0, q1)
    gap = 1.0 - s                                                     # (B, R, A)

    c_hat = (gap / radii[None, :, None] ** 2).max(axis=(0, 2))
    s_bar = s.mean(axis=2)
    y = 1.0 - s_bar                                                   # (B, R)
    x = radii**2
    coeff = (y @ x) / (x @ x)
    resid = y - coeff[:, None] * x[None, :]
    ss_res = np.sum(resid**2, axis=1)
    ss_tot = np.sum((y - y.mean(axis=1, keepdims=True)) ** 2, axis=1)
    r2 = np.where(ss_tot > 0, 1.0 - ss_res / np.where(ss_tot > 0, ss_tot, 1.0), 1.0)

    return AttenuationReport(
        n_base=n_base,
        radii=radii,
        n_angles=n_angles,
        violations=int(np.sum(gap < -1e-12)),
        min_one_minus_s=float(gap.min()),
        c_hat=c_hat,
        c_hat_ratio_small=float(c_hat[1] / c_hat[0]) if radii.size > 1 else math.nan,
        fit_coeff=coeff,
        fit_r2=r2,
        s_bar=s_bar,
    )
