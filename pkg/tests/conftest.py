import numpy as np
import pytest

from gibbs_charts.charts import synthesize_structure
from gibbs_charts.markov import CAT_MAP, build_automorphism, catmap_partition
from gibbs_charts.sft import build_sft
from gibbs_charts.torus import TorusFunction

FULL_TWO = [[1, 1], [1, 1]]
GOLDEN = [[1, 1], [1, 0]]

# (phi_u, phi_s) pairs used wherever a nonconstant torus potential is needed
TRIG_TERMS = [
    ([(1, 0, 0.1, 0.0)], [(0, 1, 0.0, 0.1)]),
    ([(1, 1, 0.15, 0.0), (1, -2, 0.0, 0.05)], [(1, 1, 0.15, 0.0), (1, -2, 0.0, 0.05)]),
    ([(2, 1, 0.1, 0.0), (0, 1, 0.0, 0.1)], [(2, 1, 0.1, 0.0), (0, 1, 0.0, 0.1)]),
]


def trig_pair(i):
    tu, ts = TRIG_TERMS[i]
    return TorusFunction.from_terms(tu), TorusFunction.from_terms(ts)


@pytest.fixture(scope="session")
def aut():
    return build_automorphism(CAT_MAP)


@pytest.fixture(scope="session")
def part(aut):
    return catmap_partition(aut)


@pytest.fixture(scope="session")
def full2():
    return build_sft(FULL_TWO)


@pytest.fixture(scope="session")
def golden():
    return build_sft(GOLDEN)


@pytest.fixture(scope="session")
def trig_pots():
    return [trig_pair(i) for i in range(len(TRIG_TERMS))]


class _StructureCache:
    """Structures are expensive; share them across the session."""

    def __init__(self, part):
        self.part = part
        self._store = {}

    def get(self, key, depth=12):
        k = (key, depth)
        if k not in self._store:
            if key == "zero":
                fu = fs = None
            else:
                fu, fs = trig_pair(key)
            self._store[k] = synthesize_structure(self.part, fu, fs, depth)
        return self._store[k]


@pytest.fixture(scope="session")
def structures(part):
    return _StructureCache(part)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
