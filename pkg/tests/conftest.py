from __future__ import annotations

import pytest

from canardkit.canard import iterative_asymptotics, run
from canardkit.modelfile import load

VDP_REFERENCE = 0.986394

# (criterion, passed, detail) rows collected by the acceptance suite
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def vdp():
    return load("vdp")


@pytest.fixture(scope="session")
def templator():
    return load("templator")


@pytest.fixture(scope="session")
def vdp_map(vdp):
    return vdp.iteration_map()


@pytest.fixture(scope="session")
def vdp_iterates(vdp_map):
    return run(vdp_map, 3, reference=VDP_REFERENCE)


@pytest.fixture(scope="session")
def vdp_symbolic_map(vdp):
    return vdp.iteration_map(symbolic_eps=True)


@pytest.fixture(scope="session")
def vdp_asymptotics(vdp_symbolic_map):
    return iterative_asymptotics(vdp_symbolic_map, 3, 3)


@pytest.fixture(scope="session")
def templator_iterates(templator):
    return run(templator.iteration_map(), 1)


@pytest.fixture(scope="session")
def explosions(templator, vdp):
    """Bisection results shared by the explosion tests (the slow part)."""
    from canardkit.ode import explosion_bisect

    import time

    spec = templator.model_spec()
    out = {}
    for key, lo, hi in (("lower", 0.4199, 0.42), ("upper", 0.9675, 0.9676)):
        t0 = time.perf_counter()
        res = explosion_bisect(spec, lo, hi)
        out[key] = (res, time.perf_counter() - t0)
    t0 = time.perf_counter()
    res = explosion_bisect(vdp.model_spec(), 0.98, 0.99)
    out["vdp"] = (res, time.perf_counter() - t0)
    return out


@pytest.fixture
def report(request):
    """Record one acceptance line: ``report(passed, detail)``."""
    name = request.node.name

    def record(passed: bool, detail: str = ""):
        ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
