"""Bounded surrogate field used in place of the lattice sum during fine-tuning.

A regularised radial term ``1/(r^2 + beta)`` carries the polar angle of
``z``, and a short Fourier-like series adds directional periodicity.  A
second branch with ``-2/(r^3 + beta)`` plays the role of the derivative.
Everything is finite for every input, including ``z = 0``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .encoder import ProjectionSpec, grid_coords, layer_norm, sigmoid, softplus, softplus_inv
from .lattice import LEMNISCATIC_OMEGA1

#: positive floor added to softplus for the vertical half-period
OMEGA3_FLOOR = 0.1


def _default_amplitudes(scale: float = 0.1, k: int = 3) -> tuple[float, ...]:
    return tuple(scale / n**2 for n in range(1, k + 1))


@dataclass(frozen=True)
class SurrogateConfig:
    omega1: float = LEMNISCATIC_OMEGA1
    omega3_raw: float = softplus_inv(LEMNISCATIC_OMEGA1 - OMEGA3_FLOOR)
    eps_u: float = 0.01
    eps_v: float = 0.01
    beta: float = 0.10
    a_k: tuple[float, ...] = field(default_factory=_default_amplitudes)
    b_k: tuple[float, ...] = field(default_factory=_default_amplitudes)
    eta: float = 0.5
    eta_prime: float = 0.5
    alpha: float = 0.15
    r_eps: float = 1e-4
    lambda_raw: float = 0.0

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError("omega1 must be positive")
        if not (self.beta > 0 and self.r_eps > 0):
            raise ValueError("beta and r_eps must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        object.__setattr__(self, "a_k", tuple(float(a) for a in self.a_k))
        object.__setattr__(self, "b_k", tuple(float(b) for b in self.b_k))

    @property
    def omega3_im(self) -> float:
        return softplus(self.omega3_raw) + OMEGA3_FLOOR

    @property
    def gate(self) -> float:
        return sigmoid(self.lambda_raw)

    def replace(self, **changes) -> "SurrogateConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["a_k"] = list(self.a_k)
        d["b_k"] = list(self.b_k)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateConfig":
        d = dict(d)
        if "omega3_im" in d:
            d["omega3_raw"] = softplus_inv(d.pop("omega3_im") - OMEGA3_FLOOR)
        if "amplitude_scale" in d:
            scale = d.pop("amplitude_scale")
            d.setdefault("a_k", _default_amplitudes(scale))
            d.setdefault("b_k", _default_amplitudes(scale))
        return cls(**d)


def ft_map(u, v, cfg: SurrogateConfig):
    """Perturbed affine map of ``(u, v)`` onto the complex plane."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    re = cfg.omega1 * u + cfg.eps_u * np.sin(2 * np.pi * u)
    im = cfg.omega3_im * v + cfg.eps_v * np.cos(2 * np.pi * v)
    z = re + 1j * im
    return complex(z) if z.ndim == 0 else z


def _polar(z, cfg):
    z = np.asarray(z, dtype=np.complex128)
    x, y = z.real, z.imag
    r = np.maximum(np.hypot(x, y), cfg.r_eps)
    theta = np.arctan2(y, x)
    return r, theta, x / cfg.omega1, y / cfg.omega3_im


def _correction(amps, up, vp, deriv):
    c = np.zeros(np.shape(up))
    for k, a in enumerate(amps, start=1):
        ev = np.exp(-k * np.pi * np.abs(vp))
        eu = np.exp(-k * np.pi * np.abs(up))
        if deriv:
            c = c + a * k * (-np.sin(k * np.pi * up) * ev + np.cos(k * np.pi * vp) * eu)
        else:
            c = c + a * (np.cos(k * np.pi * up) * ev + np.sin(k * np.pi * vp) * eu)
    return c


def _out(z, v):
    return complex(v) if np.ndim(z) == 0 else v


def surrogate_field(z, cfg: SurrogateConfig):
    r, theta, up, vp = _polar(z, cfg)
    m = 1.0 / (r**2 + cfg.beta)
    c = _correction(cfg.a_k, up, vp, deriv=False)
    return _out(z, (m * np.cos(theta) + c) + 1j * (m * np.sin(theta) + cfg.eta * c))


def surrogate_deriv(z, cfg: SurrogateConfig):
    """Derivative proxy branch; deliberately not the complex derivative of the field."""
    r, theta, up, vp = _polar(z, cfg)
    m = -2.0 / (r**3 + cfg.beta)
    c = _correction(cfg.b_k, up, vp, deriv=True)
    return _out(z, (m * np.cos(theta) + c) + 1j * (m * np.sin(theta) + cfg.eta_prime * c))


def ft_features(u, v, cfg: SurrogateConfig) -> np.ndarray:
    """Four tanh-compressed channels at ``(u, v)``; shape ``u.shape + (4,)``."""
    z = ft_map(u, v, cfg)
    s = np.asarray(surrogate_field(z, cfg))
    d = np.asarray(surrogate_deriv(z, cfg))
    raw = np.stack([s.real, s.imag, d.real, d.imag], axis=-1)
    return np.tanh(cfg.alpha * raw)


def ft_grid(cfg: SurrogateConfig, h: int, w: int) -> np.ndarray:
    u, v = grid_coords(h, w)
    return ft_features(u, v, cfg)


def finetune_encodings(field: np.ndarray, spec: ProjectionSpec, b_off=None) -> np.ndarray:
    """``Proj(f) + b_off`` with the same linear + LayerNorm head as pre-training."""
    y = np.asarray(field, dtype=np.float64) @ spec.weights.T + spec.bias
    out = layer_norm(y, spec.ln_gain, spec.ln_bias, spec.ln_eps)
    if b_off is not None:
        out = out + np.asarray(b_off)
    return out


def blend(e_wepe, e_learned, lam: float) -> np.ndarray:
    e_wepe = np.asarray(e_wepe, dtype=np.float64)
    e_learned = np.asarray(e_learned, dtype=np.float64)
    if e_wepe.shape != e_learned.shape:
        raise ValueError(f"shape mismatch: {e_wepe.shape} vs {e_learned.shape}")
    return lam * e_wepe + (1.0 - lam) * e_learned


def hybrid_blend(e_wepe, e_learned, lambda_raw: float) -> np.ndarray:
    """Gate patch rows only; the class-token row is the caller's business."""
    return blend(e_wepe, e_learned, sigmoid(lambda_raw))
