"""Perron eigenpair of a discretized mutation-selection operator.

Two independent routes compute ``lam`` with ``(A + lam) p = 0``, ``p > 0``:

direct
    Power iteration on ``B = c I - A`` with ``c = max(w)``. ``B`` is
    entrywise non-negative, so its spectral radius is ``c + lam``.
bisection
    ``rho(K_alpha)`` with ``K_alpha = U (T + alpha)^-1`` is strictly
    decreasing in ``alpha`` and equals one exactly at ``alpha = lam``. The
    Perron vector ``q`` of ``K_lam`` gives ``p = (T + lam)^-1 q``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_positive
from .discretize import StepDensity, embed_density, k_alpha_matrix
from .exceptions import BracketError, ConvergenceError, ReducibleOperatorError
from .model import support_components


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iterations: int = 100000
    bisection_bracket: tuple = None
    tol_rho: float = 1e-10
    bracket_width: float = 1e-12

    def __post_init__(self):
        check_positive("tol", self.tol)
        check_positive("tol_rho", self.tol_rho)
        check_count("max_iterations", self.max_iterations)
        if self.bisection_bracket is not None:
            lo, hi = self.bisection_bracket
            if not lo < hi:
                raise ValueError("bisection bracket needs lo < hi")


@dataclass(frozen=True, eq=False)
class EigenResult:
    lambda_shifted: float
    lambda_raw: float
    density: StepDensity
    q_values: np.ndarray
    residual_A: float
    residual_K: float
    iterations: int
    method: str
    shift: float

    @property
    def p_values(self):
        return self.density.values

    def to_dict(self):
        return {
            "lambda_shifted": self.lambda_shifted,
            "lambda_raw": self.lambda_raw,
            "shift": self.shift,
            "residual_A": self.residual_A,
            "residual_K": self.residual_K,
            "iterations": self.iterations,
            "method": self.method,
            "N": int(self.density.values.shape[0]),
            "points": self.density.partition.points.tolist(),
            "p": self.density.values.tolist(),
            "q": self.q_values.tolist(),
        }


def spectral_radius(matrix, cfg=None, weights=None, x0=None):
    """Dominant eigenvalue and non-negative eigenvector of a non-negative matrix.

    Power iteration from ``x0`` (all ones by default). The iterate is kept at
    unit weighted 1-norm, so the growth factor ``||M v||`` estimates the
    spectral radius. Iteration stops once both the change of that estimate and
    the eigen-residual ``||M v - rho v||`` fall below ``cfg.tol``.

    Returns
    -------
    rho : float
    vec : ndarray
        Eigenvector with ``sum(weights * vec) == 1``.
    iterations : int
    """
    cfg = cfg or SolverConfig()
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    v = np.ones(n) if x0 is None else np.abs(np.asarray(x0, dtype=float))
    v = v / np.sum(w * v)
    rho = np.nan
    increment = np.inf
    for it in range(1, cfg.max_iterations + 1):
        y = m @ v
        rho_new = float(np.sum(w * y))
        if rho_new == 0.0:
            return 0.0, v, it
        residual = float(np.sum(w * np.abs(y - rho_new * v)))
        increment = abs(rho_new - rho) if np.isfinite(rho) else np.inf
        v = y / rho_new
        rho = rho_new
        scale = max(1.0, abs(rho))
        if increment <= cfg.tol * scale and residual <= cfg.tol * scale:
            return rho, v, it
    raise ConvergenceError(
        f"power iteration did not converge in {cfg.max_iterations} iterations "
        f"(last increment {increment:.3g})",
        increment=increment,
        iterations=cfg.max_iterations,
    )


def residual(op, lam, density):
    """Induced norm of ``(A + lam) p``."""
    r = op.matvec_a(density.values) + lam * density.values
    return float(np.sum(op.weights * np.abs(r)))


def _residual_k(op, lam, q):
    k = k_alpha_matrix(op, lam)
    return float(np.sum(op.weights * np.abs(k @ q - q)))


def check_irreducible(op):
    ncomp = support_components(op.u_matrix)
    if ncomp != 1:
        raise ReducibleOperatorError(
            f"mutation matrix splits into {ncomp} strongly connected components"
        )


def _finish(op, lam, p_raw, iterations, method):
    density, _ = embed_density(op.partition, p_raw)
    q = (op.w_diag + lam) * density.values
    return EigenResult(
        lambda_shifted=float(lam),
        lambda_raw=float(lam - op.shift),
        density=density,
        q_values=q,
        residual_A=residual(op, lam, density),
        residual_K=_residual_k(op, lam, q),
        iterations=iterations,
        method=method,
        shift=op.shift,
    )


def perron_eigenpair(op, cfg=None):
    """Leading eigenpair via power iteration on ``c I - A``."""
    cfg = cfg or SolverConfig()
    check_irreducible(op)
    c = float(np.max(op.w_diag))
    diag = c - op.w_diag + np.diag(op.u_matrix)
    if not np.any(diag > 0):
        # a positive diagonal entry makes B aperiodic
        c += 1.0
    b = op.u_matrix.copy()
    b[np.diag_indices_from(b)] += c - op.w_diag
    rho, vec, iterations = spectral_radius(b, cfg, weights=op.weights)
    return _finish(op, rho - c, vec, iterations, "direct")


def k_spectral_radius(op, alpha, cfg=None, x0=None):
    """``rho(K_alpha)`` with its Perron vector."""
    return spectral_radius(k_alpha_matrix(op, alpha), cfg, weights=op.weights, x0=x0)


def default_bracket(op, cfg):
    lo = max(cfg.tol, -float(np.min(op.w_diag)) + cfg.tol)
    umax = float(np.max(op.u_matrix / op.weights[None, :]))
    hi = float(np.max(op.w_diag)) + umax * op.partition.length
    return lo, max(hi, 2.0 * lo)


def solve_via_bisection(op, cfg=None):
    """Leading eigenpair from the root of ``rho(K_alpha) = 1``."""
    cfg = cfg or SolverConfig()
    check_irreducible(op)
    lo, hi = cfg.bisection_bracket or default_bracket(op, cfg)
    rho_lo, vec, it_lo = k_spectral_radius(op, lo, cfg)
    if rho_lo < 1.0:
        raise BracketError(
            f"rho(K_{lo:.3g}) = {rho_lo:.6g} < 1: lambda lies below the bracket "
            "(the model may violate the cusp condition at this resolution)"
        )
    rho_hi, _, it_hi = k_spectral_radius(op, hi, cfg)
    if rho_hi > 1.0:
        raise BracketError(f"rho(K_{hi:.3g}) = {rho_hi:.6g} > 1: lambda lies above the bracket")
    iterations = it_lo + it_hi
    alpha = 0.5 * (lo + hi)
    while True:
        alpha = 0.5 * (lo + hi)
        rho, vec, it = k_spectral_radius(op, alpha, cfg, x0=vec)
        iterations += it
        if abs(rho - 1.0) <= cfg.tol_rho or hi - lo <= cfg.bracket_width:
            break
        if rho > 1.0:
            lo = alpha
        else:
            hi = alpha
    p = vec / (op.w_diag + alpha)
    return _finish(op, alpha, p, iterations, "bisection")


def solve(op, cfg=None, path="direct"):
    if path == "direct":
        return perron_eigenpair(op, cfg)
    if path == "bisection":
        return solve_via_bisection(op, cfg)
    raise ValueError(f"solver path must be 'direct' or 'bisection', got {path!r}")
