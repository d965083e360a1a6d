"""Pre-training positional encoder: patch grid -> complex plane -> 4 features -> d dims."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeParams, lemniscatic_preset
from .wp import wp_pair


def softplus(x: float) -> float:
    return math.log1p(math.exp(-abs(x))) + max(x, 0.0)


def softplus_inv(y: float) -> float:
    if y <= 0:
        raise ValueError("softplus range is (0, inf)")
    return y + math.log(-math.expm1(-y))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class EncoderConfig:
    alpha_u: float = 0.4
    alpha_v: float = 0.4
    alpha_scale_raw: float = softplus_inv(0.15)
    alpha_learn: float = softplus_inv(lemniscatic_preset().omega3_im)
    beta_pos: float = 1.0
    grid_h: int = 14
    grid_w: int = 14
    proj_dim: int = 192
    proj_seed: int = 0
    lattice: LatticeParams = field(default_factory=lemniscatic_preset)

    def __post_init__(self):
        if not (self.alpha_u > 0 and self.alpha_v > 0):
            raise ValueError("alpha_u and alpha_v must be positive")
        if self.grid_h < 1 or self.grid_w < 1:
            raise ValueError("grid must be at least 1x1")
        if self.proj_dim < 4:
            raise ValueError("proj_dim must be >= 4")

    @property
    def alpha_scale(self) -> float:
        return softplus(self.alpha_scale_raw)

    @property
    def omega3_im(self) -> float:
        return softplus(self.alpha_learn)

    def effective_lattice(self) -> LatticeParams:
        """The lattice with its imaginary half-period taken from ``alpha_learn``."""
        return self.lattice.replace(omega3_im=self.omega3_im)

    def replace(self, **changes) -> "EncoderConfig":
        return dataclasses.replace(self, **changes)

    def with_lattice(self, **changes) -> "EncoderConfig":
        return self.replace(lattice=self.lattice.replace(**changes))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lattice"] = self.lattice.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        d = dict(d)
        if "lattice" in d:
            d["lattice"] = LatticeParams.from_dict(d["lattice"])
        # convenience keys for hand-written configs
        if "alpha_scale" in d:
            d["alpha_scale_raw"] = softplus_inv(d.pop("alpha_scale"))
        if "omega3_im" in d:
            d["alpha_learn"] = softplus_inv(d.pop("omega3_im"))
        return cls(**d)


@dataclass(frozen=True, eq=False)
class ProjectionSpec:
    weights: np.ndarray        # (d, 4)
    bias: np.ndarray           # (d,)
    ln_gain: np.ndarray
    ln_bias: np.ndarray
    ln_eps: float = 1e-5
    cls: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def make_projection(dim: int = 192, seed: int = 0) -> ProjectionSpec:
    """Seeded N(0, 1) weights scaled by 1/2, zero bias, identity LayerNorm."""
    rng = np.random.default_rng(seed)
    return ProjectionSpec(
        weights=0.5 * rng.standard_normal((dim, 4)),
        bias=np.zeros(dim),
        ln_gain=np.ones(dim),
        ln_bias=np.zeros(dim),
        cls=np.zeros(dim),
    )


def projection_for(cfg: EncoderConfig) -> ProjectionSpec:
    return make_projection(cfg.proj_dim, cfg.proj_seed)


def normalize_coords(i: int, j: int, h: int, w: int) -> tuple[float, float]:
    """Patch-centre coordinates ``u = (j + 0.5)/W``, ``v = (i + 0.5)/H``."""
    if not (0 <= i < h and 0 <= j < w):
        raise IndexError(f"patch ({i}, {j}) outside a {h}x{w} grid")
    return (j + 0.5) / w, (i + 0.5) / h


def grid_coords(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(u, v)`` of shape (h, w) for every patch centre."""
    v = (np.arange(h) + 0.5) / h
    u = (np.arange(w) + 0.5) / w
    vv, uu = np.meshgrid(v, u, indexing="ij")
    return uu, vv


def map_to_complex(u, v, cfg: EncoderConfig):
    """``z = alpha_u * u * 2 omega1 + i alpha_v * v * 2 omega3'``; vectorised."""
    lat = cfg.effective_lattice()
    z = (cfg.alpha_u * np.asarray(u) * 2.0 * lat.omega1
         + 1j * cfg.alpha_v * np.asarray(v) * 2.0 * lat.omega3_im)
    return complex(z) if np.ndim(z) == 0 else z


def raw_features(z, cfg: EncoderConfig) -> np.ndarray:
    """``[Re wp, Im wp, Re wp', Im wp']`` along a trailing axis of length 4."""
    p, d, _ = wp_pair(z, cfg.effective_lattice())
    return np.stack([p.real, p.imag, d.real, d.imag], axis=-1)


def stabilize(f, cfg: EncoderConfig) -> np.ndarray:
    return np.tanh(cfg.alpha_scale * np.asarray(f, dtype=np.float64))


def stabilized_field(u, v, cfg: EncoderConfig) -> np.ndarray:
    """Stabilised 4-channel field at arbitrary ``(u, v)`` (shape ``u.shape + (4,)``)."""
    return stabilize(raw_features(map_to_complex(u, v, cfg), cfg), cfg)


def encode_grid(cfg: EncoderConfig) -> np.ndarray:
    """H x W x 4 stabilised features for the configured patch grid."""
    u, v = grid_coords(cfg.grid_h, cfg.grid_w)
    return stabilized_field(u, v, cfg)


def layer_norm(y: np.ndarray, gain, bias, eps: float) -> np.ndarray:
    mu = y.mean(axis=-1, keepdims=True)
    var = y.var(axis=-1, keepdims=True)
    return gain * (y - mu) / np.sqrt(var + eps) + bias


def project(field: np.ndarray, spec: ProjectionSpec, cfg: EncoderConfig) -> np.ndarray:
    """``beta_pos * LayerNorm(W f + b)`` per position."""
    if spec.dim != cfg.proj_dim:
        raise ValueError(f"projection has d={spec.dim}, config expects {cfg.proj_dim}")
    field = np.asarray(field, dtype=np.float64)
    if field.shape[-1] != 4:
        raise ValueError("field must have 4 channels")
    y = field @ spec.weights.T + spec.bias
    return cfg.beta_pos * layer_norm(y, spec.ln_gain, spec.ln_bias, spec.ln_eps)


def encode(cfg: EncoderConfig, spec: ProjectionSpec | None = None) -> np.ndarray:
    """H x W x d encodings for the configured grid."""
    spec = spec if spec is not None else projection_for(cfg)
    return project(encode_grid(cfg), spec, cfg)


def with_class_token(encodings: np.ndarray, spec: ProjectionSpec) -> np.ndarray:
    """Flatten patch encodings row-major and prepend the constant class encoding."""
    d = encodings.shape[-1]
    cls = spec.cls if spec.cls is not None else np.zeros(d)
    return np.vstack([cls.reshape(1, d), encodings.reshape(-1, d)])
