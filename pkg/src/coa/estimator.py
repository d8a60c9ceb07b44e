"""scikit-learn style front end.

:class:`EquilibriumSolver` follows the estimator conventions (constructor
only stores hyper-parameters, ``fit`` returns ``self``, fitted state lives in
trailing-underscore attributes) so it composes with ``clone``,
``get_params``/``set_params`` and parameter sweeps. ``fit`` takes a
:class:`~coa.model.ModelSpec` instead of a data matrix; ``predict`` evaluates
the equilibrium step density at arbitrary types.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_count, check_option, check_positive
from .discretize import METHODS, assemble
from .eigensolver import SolverConfig, solve
from .model import ModelSpec, loss_function


class EquilibriumSolver(BaseEstimator):
    """Discretize a continuum-of-alleles model and solve for its equilibrium.

    Parameters
    ----------
    method : {"nystrom", "galerkin-sampled", "galerkin-averaged"}
    level : int
        Refinement level of the partition.
    cells : int or None
        Override the number of cells at ``level``.
    solver : {"direct", "bisection"}
        Power iteration on ``c - A`` or bisection on ``rho(K_alpha) = 1``.
    tol : float
        Convergence tolerance of the power iteration.
    max_iter : int
    subquad : int
        Sub-nodes per cell for the averaged Galerkin variant.
    grid_factor : int
        The loss function is sampled on ``grid_factor`` times as many cells.

    Attributes
    ----------
    lambda_ : float
        Equilibrium mean fitness (raw, unshifted eigenvalue).
    density_ : StepDensity
    result_ : EigenResult
    operator_ : DiscreteOperator
    loss_ : LossFunction
    n_iter_ : int
    """

    def __init__(self, method="nystrom", level=0, cells=None, solver="direct", tol=1e-10,
                 max_iter=100000, subquad=4, grid_factor=4):
        self.method = method
        self.level = level
        self.cells = cells
        self.solver = solver
        self.tol = tol
        self.max_iter = max_iter
        self.subquad = subquad
        self.grid_factor = grid_factor

    def _validate_params(self):
        check_option("method", self.method, METHODS)
        check_option("solver", self.solver, ("direct", "bisection"))
        check_count("level", self.level, minimum=0)
        if self.cells is not None:
            check_count("cells", self.cells)
        check_positive("tol", self.tol)
        check_count("max_iter", self.max_iter)
        check_count("subquad", self.subquad)
        check_count("grid_factor", self.grid_factor)

    def fit(self, model, y=None):
        if not isinstance(model, ModelSpec):
            raise TypeError(f"fit expects a ModelSpec, got {type(model).__name__}")
        self._validate_params()
        partition = model.partition(self.level, self.cells)
        self.loss_ = loss_function(model, self.grid_factor * partition.n_cells, self.level)
        self.operator_ = assemble(model, self.loss_, partition, self.method, self.subquad)
        cfg = SolverConfig(tol=self.tol, max_iterations=self.max_iter)
        self.result_ = solve(self.operator_, cfg, self.solver)
        self.density_ = self.result_.density
        self.lambda_ = self.result_.lambda_raw
        self.lambda_shifted_ = self.result_.lambda_shifted
        self.mean_fitness_ = self.density_.mean(model.fitness)
        self.n_iter_ = self.result_.iterations
        return self

    def predict(self, X):
        """Equilibrium density at the types in ``X`` (1-d, or 2-d with one column)."""
        check_is_fitted(self, "result_")
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"expected a single feature column, got {X.shape[1]}")
            X = X[:, 0]
        return np.asarray(self.density_(X))

    def residuals(self):
        check_is_fitted(self, "result_")
        return {"A": self.result_.residual_A, "K": self.result_.residual_K}
