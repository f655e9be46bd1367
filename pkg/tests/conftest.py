import numpy as np
import pytest
from hypothesis import settings

from matmix.matvar import ComponentParams, DistKind

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

THETAS = {
    DistKind.MVST: {"nu": 6.0},
    DistKind.MVGH: {"lam": 1.5, "omega": 2.0},
    DistKind.MVVG: {"gamma": 3.0},
    DistKind.MVNIG: {"gamma_tilde": 1.5},
}


def random_spd(rng, dim, jitter=0.5):
    b = rng.normal(size=(dim, dim))
    return b @ b.T / dim + jitter * np.eye(dim)


def random_component(rng, kind, n=2, p=2, skew=0.5):
    return ComponentParams(
        rng.normal(size=(n, p)),
        skew * rng.normal(size=(n, p)),
        random_spd(rng, n),
        random_spd(rng, p),
        dict(THETAS[DistKind.parse(kind)]),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record(name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
