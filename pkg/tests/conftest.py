import numpy as np
import pytest
from hypothesis import settings

from wepe.encoder import EncoderConfig
from wepe.lattice import lemniscatic_preset

settings.register_profile("wepe", max_examples=60, deadline=None)
settings.load_profile("wepe")


@pytest.fixture(scope="session")
def preset():
    return lemniscatic_preset()


@pytest.fixture(scope="session")
def default_cfg():
    return EncoderConfig()


def safe_points(n, params, min_dist=0.1, seed=0, extent=1.0):
    """Random points in the origin-centred cell at least ``min_dist`` from the lattice."""
    from wepe.lattice import nearest_lattice_distance
    rng = np.random.default_rng(seed)
    out = np.empty(0, dtype=np.complex128)
    while out.size < n:
        z = (rng.uniform(-extent, extent, 4 * n) * params.omega1
             + 1j * rng.uniform(-extent, extent, 4 * n) * params.omega3_im)
        out = np.concatenate([out, z[nearest_lattice_distance(z, params) >= min_dist]])
    return out[:n]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria (one test per criterion)")


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for nodeid, rep in sorted(_ACCEPTANCE.items()):
        name = nodeid.split("::")[-1]
        status = "PASS" if rep.passed else "FAIL"
        props = ", ".join(f"{k}={v}" for k, v in rep.user_properties)
        tr.write_line(f"{status}  {name}  {props}")
    n_pass = sum(r.passed for r in _ACCEPTANCE.values())
    tr.write_line(f"{n_pass}/{len(_ACCEPTANCE)} criteria passed")
