import pytest

from wepe.checks import SUITES, run_suite


class TestChecks:
    @pytest.mark.parametrize("suite", sorted(SUITES))
    def test_suite_passes(self, suite):
        results = run_suite(suite)
        assert results and all(r["passed"] for r in results), results

    def test_unknown(self):
        with pytest.raises(KeyError):
            run_suite("nope")

    def test_ids_unique_and_prefixed(self):
        for name, checks in SUITES.items():
            assert all(cid.startswith(name + ".") for cid in checks)

    def test_crash_reported_as_failure(self, monkeypatch):
        def boom():
            raise RuntimeError("boom")
        monkeypatch.setitem(SUITES["wp"], "wp.even", boom)
        res = {r["id"]: r for r in run_suite("wp")}
        assert not res["wp.even"]["passed"] and "boom" in res["wp.even"]["detail"]
