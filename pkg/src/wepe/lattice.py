"""Rectangular period lattice: parameters, enumeration and reduction.

The lattice is ``{2*m*omega1 + 2*n*i*omega3_im}``.  Only rectangular lattices
are supported (real ``omega1``, purely imaginary ``omega3``).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Real half-period of the square lattice used throughout, Gamma(1/4)^2 / (2 sqrt(2 pi)).
LEMNISCATIC_OMEGA1 = 2.62205755429212

#: g2 of the square lattice with half-period LEMNISCATIC_OMEGA1.
#: Scaling the g2 = 1 lattice (half-period Gamma(1/4)^2 / (4 sqrt(pi))) by sqrt(2)
#: divides g2 by 4.
LEMNISCATIC_G2 = 0.25


@dataclass(frozen=True)
class LatticeParams:
    omega1: float
    omega3_im: float
    g2: float
    g3: float
    trunc_m: int = 12
    trunc_n: int = 12
    epsilon: float = 1e-8
    kappa: float = 15.0
    c_large: float = 1e3
    m_clip: float = 1e6

    def __post_init__(self):
        if not (self.omega1 > 0 and self.omega3_im > 0):
            raise ValueError("half-periods must be positive")
        if self.trunc_m < 1 or self.trunc_n < 1:
            raise ValueError("truncation window must satisfy M, N >= 1")
        for name in ("epsilon", "kappa", "c_large", "m_clip"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def omega3(self) -> complex:
        return complex(0.0, self.omega3_im)

    @property
    def pole_radius(self) -> float:
        return self.kappa * self.epsilon

    def replace(self, **changes) -> "LatticeParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeParams":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown lattice fields: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LatticeParams":
        return cls.from_dict(json.loads(text))


def lemniscatic_preset(**overrides) -> LatticeParams:
    """Square lattice with ``omega1 = omega3' = 2.62205755429212`` and g3 = 0."""
    params = LatticeParams(
        omega1=LEMNISCATIC_OMEGA1,
        omega3_im=LEMNISCATIC_OMEGA1,
        g2=LEMNISCATIC_G2,
        g3=0.0,
        trunc_m=12,
        trunc_n=12,
        epsilon=1e-8,
        kappa=15.0,
        c_large=1e3,
        m_clip=1e6,
    )
    return params.replace(**overrides) if overrides else params


@lru_cache(maxsize=64)
def _sorted_points(omega1: float, omega3_im: float, m: int, n: int) -> np.ndarray:
    mm, nn = np.meshgrid(np.arange(-m, m + 1), np.arange(-n, n + 1), indexing="ij")
    mm = mm.ravel()
    nn = nn.ravel()
    keep = (mm != 0) | (nn != 0)
    mm, nn = mm[keep], nn[keep]
    pts = 2.0 * mm * omega1 + 2j * nn * omega3_im
    # lexsort: last key is primary
    order = np.lexsort((nn, mm, np.abs(pts)))
    out = pts[order]
    out.setflags(write=False)
    return out


def enumerate_sorted_lattice(params: LatticeParams) -> np.ndarray:
    """All nonzero lattice points in the truncation window, ascending by modulus.

    Ties in modulus are broken by ``(m, n)`` in lexicographic order.  The
    returned array is read-only and shared between callers.
    """
    return _sorted_points(float(params.omega1), float(params.omega3_im),
                          int(params.trunc_m), int(params.trunc_n))


def max_modulus(params: LatticeParams) -> float:
    """Largest modulus in the enumerated window (R_max)."""
    return math.hypot(2 * params.trunc_m * params.omega1, 2 * params.trunc_n * params.omega3_im)


def reduce_to_cell(z, params: LatticeParams):
    """Shift ``z`` by a lattice vector into the origin-centred cell.

    Works on scalars and arrays.  ``rint`` rounds halves to even, so the
    reduction commutes with negation.
    """
    z = np.asarray(z, dtype=np.complex128)
    p1 = 2.0 * params.omega1
    p3 = 2.0 * params.omega3_im
    re = z.real - p1 * np.rint(z.real / p1)
    im = z.imag - p3 * np.rint(z.imag / p3)
    out = re + 1j * im
    return out[()] if out.ndim == 0 else out


def nearest_lattice_distance(z, params: LatticeParams):
    """Euclidean distance from ``z`` to the nearest lattice point.

    For a rectangular lattice the Voronoi cell of the origin is the centred
    period rectangle, so this is just ``|reduce_to_cell(z)|``.
    """
    d = np.abs(reduce_to_cell(z, params))
    return float(d) if np.ndim(d) == 0 else d


def lattice_invariants(params: LatticeParams, m: int = 200) -> tuple[float, float]:
    """g2 and g3 from the Eisenstein sums ``60*sum w^-4`` and ``140*sum w^-6``.

    Independent of the stored ``params.g2``/``params.g3``; used to check that
    a parameter set is self-consistent.
    """
    pts = _sorted_points(float(params.omega1), float(params.omega3_im), m, m)
    g2 = 60.0 * np.sum(pts ** -4.0)
    g3 = 140.0 * np.sum(pts ** -6.0)
    return float(g2.real), float(g3.real)
