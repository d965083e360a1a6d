import numpy as np
import pytest

from wepe.bench import BenchReport, run_bench, sample_points, time_queries
from wepe.encoder import EncoderConfig
from wepe.lut import build_lut


class TestBench:
    def test_report_fields(self):
        rep = run_bench(EncoderConfig(), res=32, n_points=2000, repeats=1)
        assert rep.direct_ns_per_eval > 0 and rep.lut_ns_per_query > 0
        assert rep.speedup == pytest.approx(rep.direct_ns_per_eval / rep.lut_ns_per_query)
        assert rep.trunc_m_n == (12, 12)
        assert rep.decoupled is None
        assert set(rep.to_dict()) >= {"speedup", "decoupled", "resolution"}

    def test_min_points(self):
        with pytest.raises(ValueError):
            run_bench(EncoderConfig(), n_points=999)

    def test_sample_points_seeded(self):
        a, b = sample_points(100, 3), sample_points(100, 3)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_threads(self):
        rep = run_bench(EncoderConfig(), res=16, n_points=2000, repeats=1, threads=2)
        assert rep.threads == 2

    def test_time_queries(self):
        luts = [build_lut(EncoderConfig(), 16), build_lut(EncoderConfig(), 16)]
        u, v = sample_points(5000)
        t = time_queries(luts, u, v, repeats=3)
        assert len(t) == 2 and all(x > 0 for x in t)

    def test_decoupled_window(self):
        assert BenchReport(1, 1.0, 1.0, 1.0, (12, 12), 8, decoupling_ratio=1.19).decoupled
        assert not BenchReport(1, 1.0, 1.0, 1.0, (12, 12), 8, decoupling_ratio=1.25).decoupled
