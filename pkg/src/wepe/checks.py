"""Runtime invariant checks behind ``wepe verify``.

Each check returns ``(passed, detail)``.  They are deliberately cheaper
than the test suite so the CLI finishes in seconds.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import analysis, encoder, lut, surrogate
from .lattice import enumerate_sorted_lattice, lemniscatic_preset, nearest_lattice_distance
from .wp import DegenerateArguments, relative_wp, truncation_bound, wp_addition, wp_pair

Check = Callable[[], tuple[bool, str]]


def _safe_points(n, params, min_dist=0.1, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-params.omega1, params.omega1, 4 * n) + 1j * rng.uniform(
        -params.omega3_im, params.omega3_im, 4 * n)
    return z[nearest_lattice_distance(z, params) >= min_dist][:n]


def wp_even() -> tuple[bool, str]:
    p = lemniscatic_preset()
    z = _safe_points(200, p)
    a, _, _ = wp_pair(z, p)
    b, _, _ = wp_pair(-z, p)
    rel = float(np.max(np.abs(a - b) / np.abs(a)))
    return rel <= 1e-12, f"max rel diff {rel:.2e}"


def wp_prime_odd() -> tuple[bool, str]:
    p = lemniscatic_preset()
    z = _safe_points(200, p)
    _, a, _ = wp_pair(z, p)
    _, b, _ = wp_pair(-z, p)
    rel = float(np.max(np.abs(a + b) / np.abs(a)))
    return rel <= 1e-12, f"max rel diff {rel:.2e}"


def wp_real_axis() -> tuple[bool, str]:
    p = lemniscatic_preset()
    x = np.linspace(0.1, 2 * p.omega1 - 0.1, 101).astype(np.complex128)
    a, _, _ = wp_pair(x, p)
    worst = float(np.max(np.abs(a.imag) / (1 + np.abs(a))))
    return worst <= 1e-12, f"max |Im|/(1+|wp|) {worst:.2e}"


def wp_periodic() -> tuple[bool, str]:
    p = lemniscatic_preset()
    z = _safe_points(100, p)
    a, _, _ = wp_pair(z, p)
    b, _, _ = wp_pair(z + 2 * p.omega1, p)
    tol = truncation_bound(z, p) + truncation_bound(z + 2 * p.omega1, p) + 1e-9
    bad = int(np.sum(np.abs(a - b) > tol))
    return bad == 0, f"{bad} violations"


def wp_ode() -> tuple[bool, str]:
    out = []
    for m in (12, 48):
        p = lemniscatic_preset(trunc_m=m, trunc_n=m)
        z = _safe_points(50, p, min_dist=0.3, seed=1)
        a, d, _ = wp_pair(z, p)
        r = np.abs(d * d - 4 * a**3 + p.g2 * a + p.g3) / (1 + np.abs(a) ** 3)
        out.append(float(np.median(r)))
    ok = out[0] <= 1e-2 and out[1] <= 1e-4 and out[1] < out[0]
    return ok, f"median residual M=12: {out[0]:.2e}, M=48: {out[1]:.2e}"


def wp_addition_check() -> tuple[bool, str]:
    p = lemniscatic_preset(trunc_m=24, trunc_n=24)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        z1, z2 = rng.uniform(0.2, 1.2, 2) + 1j * rng.uniform(0.2, 1.2, 2)
        try:
            got = wp_addition(z1, z2, p)
        except DegenerateArguments:
            continue
        ref, _, _ = wp_pair(z1 + z2, p)
        err = abs(got - complex(ref)) / max(1.0, abs(complex(ref)))
        worst = max(worst, err)
    return worst <= 1e-3, f"max err {worst:.2e}"


def wp_relative() -> tuple[bool, str]:
    p = lemniscatic_preset(trunc_m=24, trunc_n=24)
    rng = np.random.default_rng(3)
    zi = rng.uniform(0.3, 1.5, 20) + 1j * rng.uniform(0.3, 1.5, 20)
    delta = rng.uniform(0.1, 1.0, 20) * np.exp(1j * rng.uniform(0, 2 * np.pi, 20))
    a, da, _ = wp_pair(zi, p)
    b, db, _ = wp_pair(zi + delta, p)
    ref, _, _ = wp_pair(delta, p)
    worst = 0.0
    for k in range(20):
        got = relative_wp((a[k], da[k]), (b[k], db[k]), p)
        worst = max(worst, abs(got - ref[k]) / max(1.0, abs(ref[k])))
    return worst <= 1e-3, f"max err {worst:.2e}"


def wp_sorted() -> tuple[bool, str]:
    p = lemniscatic_preset()
    pts = enumerate_sorted_lattice(p)
    mono = bool(np.all(np.diff(np.abs(pts)) >= 0))
    closed = set(np.round(pts, 9)) == set(np.round(-pts, 9))
    return mono and closed, f"sorted={mono} negation-closed={closed}"


def encoder_bounded() -> tuple[bool, str]:
    cfg = encoder.EncoderConfig(grid_h=32, grid_w=32)
    f = encoder.encode_grid(cfg)
    m = float(np.abs(f).max())
    # the corner patch maps onto the origin pole, where tanh(C_large) rounds to 1
    return bool(np.all(np.isfinite(f))) and m <= 1.0, f"max |f| {m:.6f}"


def encoder_pole_inert() -> tuple[bool, str]:
    cfg = encoder.EncoderConfig()
    base = encoder.encode_grid(cfg).tobytes()
    for kappa in (1, 5, 15, 30, 60, 120):
        for c_large in (50.0, 1e5):
            f = encoder.encode_grid(cfg.with_lattice(kappa=kappa, c_large=c_large))
            if f.tobytes() != base:
                return False, f"changed at kappa={kappa}, C_large={c_large}"
    return True, "no byte changed"


def encoder_sensitivity() -> tuple[bool, str]:
    cfg = encoder.EncoderConfig()
    f = encoder.encode_grid(cfg)
    rho = analysis.dissimilarity_correlation(f)
    st = analysis.feature_stats(f)
    ok = 0.595 <= rho <= 0.655 and 0.096 <= st.mean_abs <= 0.116
    return ok, f"rho={rho:.4f} mean|f|={st.mean_abs:.4f}"


def surrogate_bounded() -> tuple[bool, str]:
    cfg = surrogate.SurrogateConfig()
    rng = np.random.default_rng(4)
    u, v = rng.uniform(0, 1, 10_000), rng.uniform(0, 1, 10_000)
    f = surrogate.ft_features(u, v, cfg)
    ok = bool(np.all(np.isfinite(f)) and np.all(np.abs(f) < 1))
    return ok, f"max |f| {float(np.abs(f).max()):.4f}"


def surrogate_nondegenerate() -> tuple[bool, str]:
    f = surrogate.ft_grid(surrogate.SurrogateConfig(), 14, 14)
    v2, v4 = float(f[..., 1].var()), float(f[..., 3].var())
    return v2 > 0 and v4 > 0, f"var f2={v2:.3e} var f4={v4:.3e}"


def surrogate_gate() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal((2, 196, 32))
    ok = (np.array_equal(surrogate.hybrid_blend(a, b, math.inf), a)
          and np.array_equal(surrogate.hybrid_blend(a, b, -math.inf), b)
          and np.allclose(surrogate.hybrid_blend(a, b, 0.0), 0.5 * (a + b), rtol=0, atol=1e-15))
    return ok, "limits and midpoint"


def lut_node_exact() -> tuple[bool, str]:
    table = lut.build_lut(encoder.EncoderConfig(), 64)
    rng = np.random.default_rng(6)
    p, q = rng.integers(0, 64, 500), rng.integers(0, 64, 500)
    p[:32], q[32:64] = 63, 63  # clamped last row and column
    got = lut.query_many(table, q / 63, p / 63)
    ok = np.array_equal(got, table.data[p, q].astype(np.float64))
    return bool(ok), "bit-exact at 500 nodes"


def lut_convergence() -> tuple[bool, str]:
    cfg = encoder.EncoderConfig()
    errs = [lut.error_scan(cfg, r, 2048, 0.75).max_err for r in (64, 128)]
    order = math.log2(errs[0] / errs[1])
    return 1.6 <= order <= 2.3, f"order {order:.2f}"


def lut_roundtrip() -> tuple[bool, str]:
    table = lut.build_lut(encoder.EncoderConfig(), 16)
    buf = lut.encode_container(table.data, table.config)
    cfg, data = lut.decode_container(buf)
    again = lut.encode_container(data, cfg)
    return buf == again, f"{len(buf)} bytes"


def analysis_decay() -> tuple[bool, str]:
    rep = analysis.distance_decay_report(encoder.encode(encoder.EncoderConfig()), 14, 14)
    return rep.pearson_rho <= -0.85, f"binned rho {rep.pearson_rho:.3f}"


def analysis_scale_invariance() -> tuple[bool, str]:
    cfg = encoder.EncoderConfig()
    e = encoder.encode(cfg)
    a = analysis.distance_decay_report(e, 14, 14).raw_bin_means
    b = analysis.distance_decay_report(3.7 * e, 14, 14).raw_bin_means
    ok = np.allclose(a, b, rtol=0, atol=1e-12, equal_nan=True)
    return bool(ok), "raw bin means unchanged under scaling"


def analysis_attenuation() -> tuple[bool, str]:
    rep = analysis.local_attenuation_check(encoder.EncoderConfig(), n_base=20)
    ok = rep.violations == 0 and rep.min_r2 >= 0.95
    return ok, f"violations={rep.violations} min R2={rep.min_r2:.4f}"


SUITES: dict[str, dict[str, Check]] = {
    "wp": {
        "wp.even": wp_even,
        "wp.prime_odd": wp_prime_odd,
        "wp.real_axis": wp_real_axis,
        "wp.periodic": wp_periodic,
        "wp.ode": wp_ode,
        "wp.addition": wp_addition_check,
        "wp.relative": wp_relative,
        "wp.lattice_sorted": wp_sorted,
    },
    "encoder": {
        "encoder.bounded": encoder_bounded,
        "encoder.pole_inert": encoder_pole_inert,
        "encoder.sensitivity": encoder_sensitivity,
    },
    "surrogate": {
        "surrogate.bounded": surrogate_bounded,
        "surrogate.nondegenerate": surrogate_nondegenerate,
        "surrogate.gate": surrogate_gate,
    },
    "lut": {
        "lut.node_exact": lut_node_exact,
        "lut.convergence": lut_convergence,
        "lut.roundtrip": lut_roundtrip,
    },
    "analysis": {
        "analysis.decay": analysis_decay,
        "analysis.scale_invariance": analysis_scale_invariance,
        "analysis.attenuation": analysis_attenuation,
    },
}


def run_suite(name: str) -> list[dict]:
    if name == "all":
        selected = {k: v for s in SUITES.values() for k, v in s.items()}
    elif name in SUITES:
        selected = SUITES[name]
    else:
        raise KeyError(name)
    results = []
    for cid, fn in selected.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"id": cid, "passed": bool(ok), "detail": detail})
    return results
