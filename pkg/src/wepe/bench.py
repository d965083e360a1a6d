"""Direct evaluation vs. LUT query timing."""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .encoder import EncoderConfig
from .lut import Lut, build_lut, field_at, query_many


@dataclass(frozen=True)
class BenchReport:
    n_points: int
    direct_ns_per_eval: float
    lut_ns_per_query: float
    speedup: float
    trunc_m_n: tuple[int, int]
    resolution: int
    threads: int = 1
    decoupling_ratio: float | None = None   # LUT query time at the larger M over the smaller

    @property
    def decoupled(self) -> bool | None:
        if self.decoupling_ratio is None:
            return None
        return 0.8 <= self.decoupling_ratio <= 1.2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decoupled"] = self.decoupled
        return d


def _run(fn, u, v, threads):
    if threads <= 1:
        return fn(u, v)
    parts = np.array_split(np.arange(u.size), threads)
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda ix: fn(u[ix], v[ix]), parts))


def _median_ns(fn, u, v, repeats, threads):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        _run(fn, u, v, threads)
        times.append(time.perf_counter_ns() - t0)
    return statistics.median(times)


def sample_points(n_points: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, n_points), rng.uniform(0.0, 1.0, n_points)


def time_queries(luts: list[Lut], u, v, repeats: int = 15, threads: int = 1) -> list[float]:
    """Median query time per LUT, with the LUTs measured round-robin to cancel drift."""
    samples = [[] for _ in luts]
    for lut in luts:  # warm-up
        query_many(lut, u, v)
    for _ in range(repeats):
        for k, lut in enumerate(luts):
            t0 = time.perf_counter_ns()
            _run(lambda a, b: query_many(lut, a, b), u, v, threads)
            samples[k].append(time.perf_counter_ns() - t0)
    return [statistics.median(s) for s in samples]


def run_bench(cfg: EncoderConfig, res: int = 256, n_points: int = 100_000, repeats: int = 3,
              seed: int = 0, threads: int = 1, compare_m: int | None = None,
              lut: Lut | None = None) -> BenchReport:
    """Per-point cost of the direct lattice sum vs. a bilinear LUT query.

    With ``compare_m`` set, a second LUT is built with that truncation and the
    ratio of query times is reported as ``decoupling_ratio``.
    """
    if n_points < 1000:
        raise ValueError("benchmark needs at least 1000 points")
    u, v = sample_points(n_points, seed)
    lut = lut if lut is not None else build_lut(cfg, res, workers=max(threads, 1))
    direct = _median_ns(lambda a, b: field_at(a, b, cfg), u, v, repeats, threads)

    luts = [lut]
    if compare_m is not None:
        other = cfg.with_lattice(trunc_m=compare_m, trunc_n=compare_m)
        luts.append(build_lut(other, lut.resolution, workers=max(threads, 1)))
    q = time_queries(luts, u, v, repeats=max(repeats, 15), threads=threads)

    lat = cfg.lattice
    return BenchReport(
        n_points=n_points,
        direct_ns_per_eval=direct / n_points,
        lut_ns_per_query=q[0] / n_points,
        speedup=direct / q[0],
        trunc_m_n=(lat.trunc_m, lat.trunc_n),
        resolution=lut.resolution,
        threads=threads,
        decoupling_ratio=(q[1] / q[0]) if len(q) > 1 else None,
    )
