import math

import numpy as np
import pytest

from coa import benchmarks
from coa.convergence import (
    CSV_HEADER,
    ConvergenceReport,
    cell_averages,
    cross_method_compare,
    oracle_compare,
    refinement_study,
)
from coa.eigensolver import SolverConfig
from coa.exceptions import StudyError
from coa.quadrature import uniform_partition


@pytest.fixture(scope="module")
def hoc_study():
    return refinement_study(benchmarks.house_of_cards(64), num_levels=3)


def test_study_shape(hoc_study):
    assert [rec.N for rec in hoc_study.levels] == [64, 128, 256]
    assert math.isnan(hoc_study.levels[0].tv_prev)
    assert len(hoc_study.tv_consecutive) == 2
    assert len(hoc_study.cauchy_ratio) == 1
    assert all(rec.tail_mass == 0.0 for rec in hoc_study.levels)
    assert not hoc_study.flagged


def test_study_converges_toward_oracle(hoc_study):
    errors = [abs(lam - 0.740173884394967) for lam in hoc_study.lambdas]
    assert errors[2] < errors[1] < errors[0]


def test_csv_round_trip(hoc_study):
    text = hoc_study.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    back = ConvergenceReport.from_csv(text, "nystrom")
    assert back.levels[1:] == hoc_study.levels[1:]
    assert math.isnan(back.levels[0].tv_prev)
    assert back.to_csv() == text


def test_csv_rejects_wrong_header():
    with pytest.raises(ValueError):
        ConvergenceReport.from_csv("a,b\n1,2\n")


def test_study_argument_checks():
    with pytest.raises(ValueError):
        refinement_study(benchmarks.house_of_cards(), num_levels=1)
    with pytest.raises(ValueError):
        refinement_study(benchmarks.house_of_cards(), method="fem")


def test_study_error_keeps_partial_report():
    cfg = SolverConfig(max_iterations=3)
    with pytest.raises(StudyError) as info:
        refinement_study(benchmarks.house_of_cards(16), num_levels=2, cfg=cfg)
    assert info.value.partial.levels == []


def test_tail_mass_flag():
    # a narrow window leaves visible mass beyond half its width
    model = benchmarks.gaussian_real_line(base_cells=32, half_width=1.0)
    report = refinement_study(model, "galerkin-sampled", num_levels=2)
    assert report.levels[-1].tail_mass > 1e-6
    assert report.flagged


def test_cross_method_compare_sampled_equals_nystrom():
    cmp = cross_method_compare(benchmarks.house_of_cards(64), methods=("nystrom", "galerkin-sampled"))
    assert cmp.lambda_gap == 0.0
    assert cmp.tv_gap == 0.0


def test_cell_averages_exact_for_polynomials():
    p = uniform_partition(0.0, 1.0, 4)
    np.testing.assert_allclose(
        cell_averages(lambda x: x**3, p),
        np.diff(p.edges**4) / 4 / p.weights,
        rtol=1e-14,
    )


def test_oracle_compare_house_of_cards():
    model = benchmarks.house_of_cards()
    oracle = benchmarks.house_of_cards_oracle(model)
    lam_err, tv = oracle_compare(model, oracle, cells=256)
    assert lam_err < 1e-5
    assert tv < 1e-3
