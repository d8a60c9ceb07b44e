import numpy as np
import pytest

from coa import benchmarks
from coa.maxprinciple import (
    LOCALITY_HEADER,
    coupled_cells,
    locality_experiment,
    max_principle_estimate,
    mutational_loss_g,
)
from coa.model import FitnessProfile, Interval, ModelSpec, MutationKernel
from coa.quadrature import uniform_partition


def test_g_vanishes_for_symmetric_kernel_on_line():
    model = benchmarks.gaussian_real_line()
    partition = model.partition(0)
    estimate = max_principle_estimate(model, partition)
    assert np.all(estimate.g_values == 0.0)
    # sup r over the refined grid
    assert estimate.lambda_mp == pytest.approx(1.0, abs=1e-4)


def test_g_is_nonnegative_for_tilted_kernel():
    model = benchmarks.tilted_gaussian()
    g = mutational_loss_g(model, np.linspace(-2, 2, 9), uniform_partition(-8, 8, 2048))
    assert np.all(g > 0)


def test_g_rejects_negative_kernel():
    model = ModelSpec(Interval(0, 1), FitnessProfile.constant(), MutationKernel.custom(lambda x, y: x - y))
    with pytest.raises(ValueError):
        mutational_loss_g(model, 0.5, uniform_partition(0, 1, 8))


def test_coupled_cells():
    assert coupled_cells(128, -4.0, 4.0, 0.3, 8192) == 128
    assert coupled_cells(128, -4.0, 4.0, 0.3 / 16, 8192) == 2048
    assert coupled_cells(128, -4.0, 4.0, 1e-6, 512) == 512
    assert coupled_cells(128, -4.0, 4.0, None, 512) == 128


def test_locality_experiment_small():
    model = benchmarks.tilted_gaussian(base_cells=64)
    table = locality_experiment(model, [1.0, 2.0], residual_tol=1e-6)
    assert [row.nu for row in table.rows] == [1.0, 2.0]
    assert table.rows[1].N >= table.rows[0].N
    assert table.to_csv().splitlines()[0] == ",".join(LOCALITY_HEADER)
    assert table.gaps[0] > 0


@pytest.mark.parametrize("nus", [[], [2.0, 1.0], [-1.0]])
def test_locality_experiment_rejects_bad_ladder(nus):
    with pytest.raises(ValueError):
        locality_experiment(benchmarks.tilted_gaussian(base_cells=16), nus)
