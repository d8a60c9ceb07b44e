"""Frozen reference values computed independently of the package."""

import numpy as np
import pytest
from scipy import integrate

from coa import benchmarks
from coa.maxprinciple import mutational_loss_g
from coa.model import FitnessProfile, Interval, ModelSpec, MutationKernel, RealLine
from coa.quadrature import uniform_partition

# bisection on atan(1/sqrt(l))/sqrt(l) = 1, integral by a 10**6-cell midpoint sum
LAMBDA_STAR = 0.740173884394967


def test_closed_form_root():
    lam = LAMBDA_STAR
    assert np.arctan(1.0 / np.sqrt(lam)) / np.sqrt(lam) == pytest.approx(1.0, abs=1e-14)


def test_house_of_cards_oracle_matches_closed_form():
    lam, p = benchmarks.house_of_cards_oracle(benchmarks.house_of_cards())
    assert lam == pytest.approx(LAMBDA_STAR, abs=1e-12)
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(p(x), 0.5 / (LAMBDA_STAR + x**2), rtol=1e-11)
    assert integrate.quad(p, -1, 1, epsabs=1e-13)[0] == pytest.approx(1.0, abs=1e-11)


def test_oracle_rejects_other_kernels():
    with pytest.raises(ValueError):
        benchmarks.house_of_cards_oracle(benchmarks.gaussian_real_line())


def test_tilted_gaussian_g_reference():
    # reference from adaptive quadrature of the defining integral at x = 0
    gamma, sigma = 0.5, 0.3
    kernel = MutationKernel.exponential_tilted(gamma, 1.0, sigma, 1.0)
    model = ModelSpec(RealLine(4.0, 128), FitnessProfile.gaussian(), kernel)

    def integrand(y):
        fwd, bwd = kernel(0.0, y), kernel(y, 0.0)
        return fwd - np.sqrt(fwd * bwd)

    reference = integrate.quad(integrand, -8, 8, points=[0.0], epsabs=1e-14, limit=200)[0]
    quad = uniform_partition(-8.0, 8.0, 8192)
    assert mutational_loss_g(model, 0.0, quad) == pytest.approx(reference, abs=1e-9)


def test_symmetric_kernel_g_vanishes():
    model = ModelSpec(Interval(-1, 1), FitnessProfile.quadratic(), MutationKernel.gaussian_difference(1.0, 0.3))
    g = mutational_loss_g(model, np.linspace(-1, 1, 33), uniform_partition(-1, 1, 128))
    assert np.all(g == 0.0)
