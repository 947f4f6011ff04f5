import numpy as np
import pytest

from ruelle.functions import LocallyConstantFn, random_function
from ruelle.symbolic import full_shift, golden_mean_shift, random_aperiodic

THETAS = (0.3, 0.5, 0.8)


@pytest.fixture
def full2():
    return full_shift(2)


@pytest.fixture
def golden():
    return golden_mean_shift()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def bernoulli_potential(shift, p1, theta=0.5):
    return LocallyConstantFn(shift, 1, np.log([p1, 1.0 - p1]), theta)


def corpus(n_cases, seed=7, max_memory=3):
    """Random (potential, test function) pairs for q in {2,3,4}, values in [-2, 2]."""
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n_cases):
        q = (2, 3, 4)[i % 3]
        theta = THETAS[(i // 3) % 3]
        shift = random_aperiodic(q, rng)
        f = random_function(shift, int(rng.integers(1, max_memory + 1)), theta, rng)
        g = random_function(shift, int(rng.integers(1, max_memory + 1)), theta, rng)
        cases.append((f, g))
    return cases


@pytest.fixture(scope="session")
def acceptance_log(request):
    log = []
    request.config._acceptance_log = log
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, ok in sorted(log):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {description}")
