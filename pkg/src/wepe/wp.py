"""Truncated lattice-sum evaluation of the Weierstrass function and its derivative.

Evaluation reduces the argument into the origin-centred period cell and then
accumulates the terms ``1/(z-w)^2 - 1/w^2`` over the lattice points in
ascending modulus order.  Each term is clipped to ``m_clip`` in magnitude
before it is added.  Arguments within ``kappa * epsilon`` of a lattice point
return the pole substitute ``c_large`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticeParams,
    enumerate_sorted_lattice,
    max_modulus,
    nearest_lattice_distance,
    reduce_to_cell,
)

DEGENERACY_FLOOR = 1e-6


class DegenerateArguments(ValueError):
    """The addition formula is undefined: the two arguments agree up to sign mod the lattice."""


@dataclass(frozen=True)
class WpValue:
    value: complex
    is_pole_substituted: bool
    trunc_bound: float


def _needs_clip(params: LatticeParams) -> bool:
    # For z in the centred cell and w != 0, |z - w| >= min half-period and
    # |w| >= 2 * min half-period, which bounds both term families.
    h = min(params.omega1, params.omega3_im)
    worst = max(1.0 / h**2 + 1.0 / (4.0 * h**2), 2.0 / h**3)
    return worst > params.m_clip


def _clip(t: np.ndarray, bound: float) -> np.ndarray:
    mag = np.abs(t)
    over = mag > bound
    if np.any(over):
        t = t.copy()
        t[over] *= bound / mag[over]
    return t


def _accumulate(acc, comp, term, compensated):
    if not compensated:
        acc += term
        return
    # Kahan summation, component-wise on complex arrays
    y = term - comp
    t = acc + y
    comp[...] = (t - acc) - y
    acc[...] = t


def _terms(d, c, clip, m_clip):
    inv = np.reciprocal(d)
    inv2 = inv * inv
    tp = inv2 - c
    td = -2.0 * inv2 * inv
    if clip:
        tp = _clip(tp, m_clip)
        td = _clip(td, m_clip)
    return tp, td


def _sum_loop(zs, acc_p, acc_d, pts, inv_w2, clip, m_clip, compensated):
    """One lattice point at a time, vectorised over the evaluation points."""
    comp_p = np.zeros_like(acc_p) if compensated else None
    comp_d = np.zeros_like(acc_d) if compensated else None
    d = np.empty_like(zs)
    for w, c in zip(pts, inv_w2):
        np.subtract(zs, w, out=d)
        tp, td = _terms(d, c, clip, m_clip)
        _accumulate(acc_p, comp_p, tp, compensated)
        _accumulate(acc_d, comp_d, td, compensated)


# inputs up to this many points are summed as a (points x terms) matrix; the
# per-row accumulate is sequential in the same order as the loop, so both
# paths give bit-identical results
_SMALL_INPUT = 64
_ROW_BLOCK = 8


def _sum_small(zs, acc_p, acc_d, pts, inv_w2, clip, m_clip):
    for a in range(0, zs.size, _ROW_BLOCK):
        b = min(a + _ROW_BLOCK, zs.size)
        tp, td = _terms(zs[a:b, None] - pts[None, :], inv_w2[None, :], clip, m_clip)
        acc_p[a:b] = np.add.accumulate(np.concatenate([acc_p[a:b, None], tp], axis=1), axis=1)[:, -1]
        acc_d[a:b] = np.add.accumulate(np.concatenate([acc_d[a:b, None], td], axis=1), axis=1)[:, -1]


def wp_pair(z, params: LatticeParams, *, compensated: bool = False):
    """Vectorised core: returns ``(wp, wp_prime, pole_mask)`` as arrays.

    ``z`` may be a scalar or any array shape.  Sums run sequentially over
    the modulus-sorted lattice points, so results are bit-reproducible.
    """
    z = np.asarray(z, dtype=np.complex128)
    shape = z.shape
    zr = np.atleast_1d(reduce_to_cell(z, params)).ravel()
    pole = np.abs(zr) < params.pole_radius
    zs = np.where(pole, 1.0, zr)

    pts = enumerate_sorted_lattice(params)
    inv_w2 = 1.0 / pts**2
    clip = _needs_clip(params)

    acc_p = 1.0 / zs**2
    acc_d = -2.0 / zs**3
    if zs.size <= _SMALL_INPUT and not compensated:
        _sum_small(zs, acc_p, acc_d, pts, inv_w2, clip, params.m_clip)
    else:
        _sum_loop(zs, acc_p, acc_d, pts, inv_w2, clip, params.m_clip, compensated)

    acc_p[pole] = params.c_large
    acc_d[pole] = params.c_large
    return acc_p.reshape(shape), acc_d.reshape(shape), pole.reshape(shape)


def truncation_bound(z, params: LatticeParams):
    """A-priori tail bound ``2 * C * |z*| / R_max`` with ``C = 2 pi / (2 omega1)^2``.

    ``z*`` is ``z`` reduced into the centred cell, which is what the sum
    actually sees.
    """
    c_lattice = 2.0 * math.pi / (2.0 * params.omega1) ** 2
    r = np.abs(reduce_to_cell(z, params))
    b = 2.0 * c_lattice * r / max_modulus(params)
    return float(b) if np.ndim(b) == 0 else b


def _scalar(z, params, which):
    p, d, pole = wp_pair(complex(z), params)
    v = complex(p if which == 0 else d)
    return WpValue(v, bool(pole), truncation_bound(z, params))


def wp(z: complex, params: LatticeParams) -> WpValue:
    return _scalar(z, params, 0)


def wp_prime(z: complex, params: LatticeParams) -> WpValue:
    return _scalar(z, params, 1)


def wp_laurent(z: complex, params: LatticeParams, n_terms: int = 4) -> complex:
    """Partial sum of ``1/z^2 + g2/20 z^2 + g3/28 z^4 + g2^2/1200 z^6``."""
    if not 1 <= n_terms <= 4:
        raise ValueError("n_terms must be between 1 and 4")
    z = complex(z)
    radius = 0.25 * min(2 * params.omega1, 2 * params.omega3_im)
    if z == 0 or abs(z) > radius:
        raise ValueError(f"Laurent oracle needs 0 < |z| <= {radius:g}")
    coeffs = (1.0, params.g2 / 20.0, params.g3 / 28.0, params.g2**2 / 1200.0)
    out = 1.0 / z**2
    for k in range(1, n_terms):
        out += coeffs[k] * z ** (2 * k)
    return out


def check_differential_eq(z: complex, params: LatticeParams) -> float:
    """Relative residual of ``wp'^2 = 4 wp^3 - g2 wp - g3`` at ``z``."""
    if nearest_lattice_distance(z, params) < 10 * params.pole_radius:
        raise ValueError("z is too close to the lattice")
    p, d, _ = wp_pair(complex(z), params)
    p, d = complex(p), complex(d)
    res = d * d - 4 * p**3 + params.g2 * p + params.g3
    return abs(res) / (1.0 + abs(p) ** 3)


def _addition_rhs(p1, d1, p2, d2, floor):
    den = p1 - p2
    if abs(den) < floor:
        raise DegenerateArguments(f"|wp(z1) - wp(z2)| = {abs(den):.3g} below floor {floor:g}")
    return -p1 - p2 + 0.25 * ((d1 - d2) / den) ** 2


def wp_addition(z1: complex, z2: complex, params: LatticeParams,
                floor: float = DEGENERACY_FLOOR) -> complex:
    """wp(z1 + z2) from values of wp and wp' at z1 and z2 only."""
    p, d, pole = wp_pair(np.array([z1, z2]), params)
    if pole.any():
        raise DegenerateArguments("argument inside the pole guard")
    return complex(_addition_rhs(p[0], d[0], p[1], d[1], floor))


def relative_wp(p_i: tuple[complex, complex], p_j: tuple[complex, complex],
                params: LatticeParams | None = None,
                floor: float = DEGENERACY_FLOOR) -> complex:
    """wp(z_j - z_i) from the absolute pairs ``(wp, wp')`` at z_i and z_j.

    Uses the addition formula with ``wp(-z_i) = wp(z_i)`` and
    ``wp'(-z_i) = -wp'(z_i)``.  ``params`` is accepted for signature
    symmetry with the other evaluators; the formula itself needs no lattice
    data.
    """
    wi, di = p_i
    wj, dj = p_j
    return complex(_addition_rhs(complex(wj), complex(dj), complex(wi), -complex(di), floor))
