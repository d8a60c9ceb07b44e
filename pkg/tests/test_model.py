import numpy as np
import pytest

from coa import benchmarks
from coa.exceptions import InvalidModelError
from coa.model import (
    FitnessProfile,
    Interval,
    ModelSpec,
    MutationKernel,
    RealLine,
    hille_tamarkin_norm,
    loss_function,
    scaling_family,
    support_components,
    total_mutation_rate,
    validate_model,
)
from coa.quadrature import uniform_partition

# brute-force 4000 x 4000 grid evaluation of int sup_y u(x,y)/(y^2 + 1/2) dx,
# Gaussian steps sigma=0.3, mu=1 on [-1, 1]
HT_REFERENCE = 3.773226791568652


class _QuadraticLoss:
    def w(self, t):
        return np.asarray(t) ** 2


def test_domain_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        RealLine(-1.0)


def test_real_line_schedule():
    line = RealLine(4.0, 128)
    assert line.half_width_at(0) == 4.0
    assert line.half_width_at(2) == pytest.approx(8.0)
    assert line.partition(1).n_cells == 256
    a, b = line.integration_interval(0)
    assert (a, b) == (-8.0, 8.0)


def test_profiles():
    x = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(FitnessProfile.quadratic(1.0, 2.0)(x), [-1.0, 1.0, -7.0])
    np.testing.assert_allclose(FitnessProfile.linear(1.0, 0.5)(x), [0.5, 1.0, 2.0])
    np.testing.assert_allclose(FitnessProfile.constant(3.0)(x), 3.0)
    np.testing.assert_allclose(FitnessProfile.gaussian(1.0, 1.0)(x), np.exp(-x**2))
    table = FitnessProfile.table([0.0, 1.0], [0.0, 2.0])
    assert table(0.25) == pytest.approx(0.5)
    np.testing.assert_allclose(FitnessProfile.quadratic().shifted(0.5)(x), 1.5 - x**2)


def test_table_requires_increasing_nodes():
    with pytest.raises(ValueError):
        FitnessProfile.table([1.0, 0.0], [0.0, 1.0])


def test_kernel_parameter_validation():
    with pytest.raises(ValueError):
        MutationKernel.gaussian_difference(1.0, 0.0)
    with pytest.raises(ValueError):
        MutationKernel.regularized_gamma(1.0, 0.5, 1.0, 0.0)


def test_gaussian_total_rate_on_line():
    kernel = MutationKernel.gaussian_difference(2.0, 0.3)
    quad = uniform_partition(-8.0, 8.0, 4096)
    assert total_mutation_rate(kernel, 0.0, quad) == pytest.approx(2.0, abs=1e-10)


def test_u1_is_linear_in_mu():
    quad = uniform_partition(-1.0, 1.0, 256)
    x = np.linspace(-1, 1, 7)
    one = total_mutation_rate(MutationKernel.regularized_gamma(1.0, 0.5, 2.0, 1e-3), x, quad)
    three = total_mutation_rate(MutationKernel.regularized_gamma(3.0, 0.5, 2.0, 1e-3), x, quad)
    np.testing.assert_allclose(three, 3.0 * one, rtol=1e-13)


def test_house_of_cards_loss():
    model = benchmarks.house_of_cards()
    loss = loss_function(model, 16)
    # grid nodes +-1/16 are closest to 0, so the shift is u1 - r = 1/256
    assert loss.shift == pytest.approx(1.0 / 256, abs=1e-15)
    assert np.min(loss.w_grid) == pytest.approx(0.0, abs=1e-15)
    assert loss.w(0.5) == pytest.approx(0.25 - 1.0 / 256, abs=1e-15)


def test_real_line_loss_is_nearly_one_minus_r():
    model = benchmarks.gaussian_real_line()
    loss = loss_function(model, 512)
    x = np.array([-2.0, 0.0, 1.0])
    # u1 == 1 up to truncation; min(1 - r) == 0 near x = 0
    np.testing.assert_allclose(loss.u1(x), 1.0, atol=1e-9)
    assert abs(loss.shift) < 1e-3


def test_unbounded_u1_rejected():
    kernel = MutationKernel.custom(lambda x, y: np.exp(50.0 * np.abs(y)) + 0.0 * x)
    model = ModelSpec(Interval(-1.0, 1.0, 8), FitnessProfile.constant(0.0), kernel)
    with pytest.raises(InvalidModelError):
        loss_function(model, 64)


def test_scaling_family_symmetric_when_untilted():
    kernel = scaling_family(lambda z: np.exp(-z), 0.0, 3.0, width=1.0)
    x, y = np.array([0.1, -0.4]), np.array([0.5, 0.3])
    np.testing.assert_allclose(kernel(x, y), kernel(y, x))
    assert kernel.width == pytest.approx(1.0 / 3.0)


def test_support_components():
    assert support_components(np.ones((3, 3))) == 1
    split = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert support_components(split) == 2


def test_hille_tamarkin_against_brute_force():
    kernel = MutationKernel.gaussian_difference(1.0, 0.3)
    value = hille_tamarkin_norm(kernel, _QuadraticLoss(), 0.5, uniform_partition(-1.0, 1.0, 256))
    assert value == pytest.approx(HT_REFERENCE, abs=5e-4)


def test_hille_tamarkin_rejects_nonpositive_alpha():
    kernel = MutationKernel.gaussian_difference(1.0, 0.3)
    with pytest.raises(ValueError):
        hille_tamarkin_norm(kernel, _QuadraticLoss(), 0.0, uniform_partition(-1.0, 1.0, 8))


@pytest.mark.parametrize("name", ["house-of-cards", "gaussian-real-line", "regularized-gamma"])
def test_benchmarks_validate(name):
    report = validate_model(benchmarks.BENCHMARKS[name](base_cells=64))
    assert report.ok, report.to_dict()
    assert {"U1", "U2", "T1", "U4", "irreducibility", "cusp"} <= {c.name for c in report.checks}


def test_house_of_cards_cusp_diverges():
    # w ~ x^2 near the minimum, so int 1/w diverges
    report = validate_model(benchmarks.house_of_cards(64))
    assert report["cusp"].status == "pass"
    assert report["cusp"].witness > 1e6


def test_linear_cusp_is_log_divergent():
    model = ModelSpec(
        Interval(-1.0, 1.0, 64),
        FitnessProfile.custom(lambda x: 1.0 - np.abs(x)),
        MutationKernel.house_of_cards(1e-3, FitnessProfile.constant(0.5)),
    )
    assert validate_model(model)["cusp"].witness == float("inf")


def test_singular_kernel_reports_t1_inconclusive():
    report = validate_model(benchmarks.regularized_gamma(64))
    assert report["T1"].status == "inconclusive"
    assert report.ok


def test_weak_mutation_with_flat_cusp_fails():
    # w ~ sqrt|x| keeps int 1/w finite; weak mutation cannot lift the mass to one
    model = ModelSpec(
        Interval(-1.0, 1.0, 64),
        FitnessProfile.custom(lambda x: 1.0 - np.sqrt(np.abs(x))),
        MutationKernel.house_of_cards(1e-3, FitnessProfile.constant(0.5)),
    )
    report = validate_model(model)
    assert report["cusp"].status == "fail"
    assert not report.ok


def test_reducible_kernel_detected():
    kernel = MutationKernel.custom(lambda x, y: np.where(np.sign(x) == np.sign(y), 1.0, 0.0))
    model = ModelSpec(Interval(-1.0, 1.0, 16), FitnessProfile.quadratic(), kernel)
    report = validate_model(model)
    assert report["irreducibility"].status == "fail"


def test_negative_kernel_detected():
    kernel = MutationKernel.custom(lambda x, y: x - y)
    model = ModelSpec(Interval(-1.0, 1.0, 16), FitnessProfile.quadratic(), kernel)
    report = validate_model(model)
    assert report["U1"].status == "fail"
