import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from magbeam.instances import paper_params, random_params, trivial_params
from magbeam.model import build_system

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def paper():
    return build_system(paper_params())


@pytest.fixture(scope="session")
def paper_free():
    """Five-coil benchmark with every voltage and current limit removed."""
    return build_system(paper_params(limits=False))


@pytest.fixture(scope="session")
def trivial():
    return build_system(trivial_params())


def random_models(seed, count, sizes=(2, 3, 4, 5, 6), limits="random"):
    """Seeded list of ``(model, beta0)`` pairs."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.choice(sizes))
        params, beta0, _ = random_params(rng, n, limits=limits)
        out.append((build_system(params), beta0))
    return out
