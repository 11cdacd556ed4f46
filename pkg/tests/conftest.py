import numpy as np
import pytest

from chainboson.phonon_bath import BathSpec
from chainboson.spin_chain import ChainSpec, eigensystem

LARGE = dict(ring_radius=10e-6, current=3e-6)
SMALL = dict(ring_radius=10e-9, current=0.1e-6)


def large_bath(temperature=0.3):
    return BathSpec(temperature=temperature, **LARGE)


def small_bath(temperature=0.3):
    return BathSpec(temperature=temperature, **SMALL)


@pytest.fixture
def es2():
    return eigensystem(ChainSpec.from_ghz(2, 1.0, 1.5))


@pytest.fixture
def es3():
    return eigensystem(ChainSpec.from_ghz(3, 1.0, 1.5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture(scope="session")
def preset_runs(tmp_path_factory):
    """Every preset run once; maps name to (report, wall seconds)."""
    import time

    from chainboson import scenario as sc

    out = {}
    for name in sc.PRESETS:
        d = tmp_path_factory.mktemp(name)
        t0 = time.perf_counter()
        rep = sc.run_scenario(sc.preset(name), d, name)
        out[name] = (rep, time.perf_counter() - t0)
    return out


# acceptance reporting: one line per criterion in the terminal summary
_CRITERIA = []


def pytest_sessionstart(session):
    import time
    session.config._chainboson_t0 = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # the runtime criterion must see the whole session
    last = [it for it in items if "suite_runtime" in it.name]
    items[:] = [it for it in items if it not in last] + last


@pytest.fixture
def criterion(request):
    def record(number, name, ok, detail=""):
        line = f"CRITERION {number:>2} {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        print(line)
        _CRITERIA.append((number, line))
        return ok
    return record


@pytest.fixture
def session_start(request):
    return request.config._chainboson_t0


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA, key=lambda c: c[0]):
            terminalreporter.write_line(line)
