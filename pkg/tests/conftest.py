import pytest

from signwalk.exactnum import TargetExpr
from signwalk.moments import SequenceSpec
from signwalk.greedy import GreedyRun, run


def _run(target: str, seq: str, steps: int, **kw):
    return run(GreedyRun(TargetExpr.parse(target), SequenceSpec.parse(seq),
                         steps, **kw))


@pytest.fixture(scope="session")
def sqrt2_harmonic_1e4():
    return _run("sqrt(2)", "harmonic", 10_000)


@pytest.fixture(scope="session")
def sqrt2_harmonic_1e5():
    return _run("sqrt(2)", "harmonic", 100_000)


@pytest.fixture(scope="session")
def sqrt2_harmonic_1e6():
    return _run("sqrt(2)", "harmonic", 1_000_000)


@pytest.fixture(scope="session")
def sqrt2_invsq_5k():
    return _run("sqrt(2)", "invsq", 5_000)


@pytest.fixture(scope="session")
def log2_harmonic_1e4():
    return _run("log(2)", "harmonic", 10_000)


@pytest.fixture(scope="session")
def sqrt2_primes_1e4():
    return _run("sqrt(2)", "primes", 10_000)


@pytest.fixture(scope="session")
def eight_tenths_harmonic():
    return _run("0.8", "harmonic", 200)
