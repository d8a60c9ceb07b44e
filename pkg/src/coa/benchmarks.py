"""Benchmark models and the closed-form house-of-cards equilibrium."""

import numpy as np
from scipy import integrate, optimize

from .model import FitnessProfile, Interval, ModelSpec, MutationKernel, RealLine


def house_of_cards(base_cells=128):
    """``I = [-1, 1]``, ``r = 1 - x**2``, ``u(x, y) = m(x)`` with ``m = 1/2``."""
    return ModelSpec(
        Interval(-1.0, 1.0, base_cells),
        FitnessProfile.quadratic(1.0, 1.0),
        MutationKernel.house_of_cards(1.0, FitnessProfile.constant(0.5)),
    )


def gaussian_real_line(base_cells=128, half_width=4.0):
    """``r = exp(-x**2)`` on the real line, Gaussian steps with ``sigma = 0.3``."""
    return ModelSpec(
        RealLine(half_width, base_cells),
        FitnessProfile.gaussian(1.0, 1.0),
        MutationKernel.gaussian_difference(1.0, 0.3),
    )


def tilted_gaussian(gamma=0.5, nu=1.0, base_cells=128, half_width=4.0):
    """Gaussian benchmark with the step density tilted by ``exp(gamma (x - y))``."""
    return ModelSpec(
        RealLine(half_width, base_cells),
        FitnessProfile.gaussian(1.0, 1.0),
        MutationKernel.exponential_tilted(gamma, 1.0, 0.3, nu),
    )


def regularized_gamma(base_cells=128):
    """Leptokurtic reflected-Gamma steps (``theta = 0.5``) regularized at ``x = y``."""
    return ModelSpec(
        Interval(-1.0, 1.0, base_cells),
        FitnessProfile.quadratic(1.0, 1.0),
        MutationKernel.regularized_gamma(0.5, 0.5, 2.0, 1e-3),
    )


BENCHMARKS = {
    "house-of-cards": house_of_cards,
    "gaussian-real-line": gaussian_real_line,
    "tilted-gaussian": tilted_gaussian,
    "regularized-gamma": regularized_gamma,
}


def house_of_cards_oracle(model, xtol=1e-15):
    """Exact equilibrium of a house-of-cards model on a compact interval.

    With ``u(x, y) = mu m(x)`` the equilibrium equation reduces to
    ``p(x) = mu m(x) / (lam + w_raw(x))`` where ``w_raw = mu int m - r``;
    ``lam`` is the root of ``int p = 1``. Integrals are computed with adaptive
    quadrature, independently of the discretization code.

    Returns ``(lam, p)`` with ``p`` a vectorized density.
    """
    kernel = model.kernel
    if kernel.form != "house-of-cards" or not model.domain.is_compact:
        raise ValueError("the closed form needs a house-of-cards kernel on a compact interval")
    a, b = model.domain.a, model.domain.b
    mu = kernel.params["mu"]

    def m(x):
        return kernel(x, 0.0) / mu if mu else 0.0 * x

    u1 = mu * integrate.quad(m, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    def w_raw(x):
        return u1 - model.fitness(x)

    # lam must exceed -min(w_raw) for p to stay positive
    inner = optimize.minimize_scalar(w_raw, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    floor = -min(float(inner.fun), float(w_raw(a)), float(w_raw(b)))
    peak = [float(inner.x)] if a < inner.x < b else None

    def mass(lam):
        return integrate.quad(
            lambda x: mu * m(x) / (lam + w_raw(x)), a, b,
            points=peak, epsabs=1e-13, epsrel=1e-13, limit=400,
        )[0] - 1.0

    lo = floor + 1e-3
    while mass(lo) < 0:
        lo = floor + 0.5 * (lo - floor)
        if lo - floor < 1e-12:
            raise ValueError("no equilibrium: the total mass stays below one (cusp condition fails)")
    hi = floor + 1.0
    while mass(hi) > 0:
        hi = floor + 2.0 * (hi - floor)
    lam = optimize.brentq(mass, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)

    def p(x):
        x = np.asarray(x, dtype=float)
        return mu * m(x) / (lam + w_raw(x))

    return lam, p
