import functools

import numpy as np
import pytest

from coa import benchmarks
from coa.discretize import assemble
from coa.eigensolver import SolverConfig, perron_eigenpair, solve_via_bisection
from coa.model import (
    FitnessProfile,
    Interval,
    ModelSpec,
    MutationKernel,
    loss_function,
)

BENCHMARK_NAMES = ("house-of-cards", "gaussian-real-line", "tilted-gaussian", "regularized-gamma")


def benchmark_model(name):
    return benchmarks.BENCHMARKS[name]()


@functools.lru_cache(maxsize=None)
def benchmark_operator(name, n, method="nystrom"):
    model = benchmark_model(name)
    partition = model.partition(0, n)
    loss = loss_function(model, 4 * n)
    return model, assemble(model, loss, partition, method)


@functools.lru_cache(maxsize=None)
def benchmark_solution(name, n, path="direct"):
    _, op = benchmark_operator(name, n)
    solver = perron_eigenpair if path == "direct" else solve_via_bisection
    return solver(op, SolverConfig())


@pytest.fixture
def hoc_model():
    return benchmarks.house_of_cards()


@pytest.fixture
def constant_model():
    """u = 1 and r = 0 on [0, 1]: w == 0 after the shift, lam_shifted == 1."""
    return ModelSpec(
        Interval(0.0, 1.0, 2),
        FitnessProfile.constant(0.0),
        MutationKernel.house_of_cards(1.0, FitnessProfile.constant(1.0)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260518)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
