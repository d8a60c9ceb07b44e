"""Refinement studies, cross-method comparison and oracle comparison."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import METHODS, assemble, tv_distance
from .eigensolver import SolverConfig, solve
from .exceptions import COAError, StudyError
from .model import loss_function

CSV_HEADER = (
    "level",
    "N",
    "lambda_shifted",
    "lambda_raw",
    "residual_A",
    "residual_K",
    "mean_fitness_gap",
    "tv_prev",
    "tail_mass",
)
TAIL_MASS_LIMIT = 1e-6


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


@dataclass(frozen=True)
class LevelRecord:
    level: int
    N: int
    lambda_shifted: float
    lambda_raw: float
    residual_A: float
    residual_K: float
    mean_fitness_gap: float
    tv_prev: float
    tail_mass: float

    def row(self):
        return [_fmt(getattr(self, name)) for name in CSV_HEADER]


@dataclass
class ConvergenceReport:
    method: str
    levels: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    results: list = field(default_factory=list, repr=False)

    @property
    def lambdas(self):
        return [rec.lambda_raw for rec in self.levels]

    @property
    def tv_consecutive(self):
        return [rec.tv_prev for rec in self.levels[1:]]

    @property
    def cauchy_ratio(self):
        lam = self.lambdas
        steps = [abs(b - a) for a, b in zip(lam, lam[1:])]
        return [b / a if a > 0 else math.nan for a, b in zip(steps, steps[1:])]

    @property
    def flagged(self):
        return bool(self.flags)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.levels:
            writer.writerow(rec.row())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, method="unknown"):
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        levels = []
        for row in reader:
            if not row:
                continue
            values = dict(zip(CSV_HEADER, row))
            levels.append(LevelRecord(
                level=int(values["level"]),
                N=int(values["N"]),
                **{k: float(values[k]) for k in CSV_HEADER[2:]},
            ))
        return cls(method, levels)

    def to_dict(self):
        return {
            "method": self.method,
            "flags": list(self.flags),
            "levels": [{name: getattr(rec, name) for name in CSV_HEADER} for rec in self.levels],
        }


def tail_mass(model, density, level):
    """Mass outside half the truncation window; zero on compact domains."""
    if model.domain.is_compact:
        return 0.0
    half = 0.5 * model.domain.half_width_at(level)
    return density.mass(lambda t: np.abs(t) > half)


def refinement_study(model, method="nystrom", base_level=0, num_levels=4, cfg=None,
                     path="direct", subquad=4, grid_factor=4):
    """Solve on consecutive levels and record convergence diagnostics.

    The loss function is computed once on a grid ``grid_factor`` times finer
    than the finest level, so every level sees the same ``w`` and shift.
    """
    if num_levels < 2:
        raise ValueError("a refinement study needs at least 2 levels")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    cfg = cfg or SolverConfig()
    top = base_level + num_levels - 1
    finest = model.partition(top)
    loss = loss_function(model, grid_factor * finest.n_cells, top)

    report = ConvergenceReport(method)
    previous = None
    for level in range(base_level, top + 1):
        partition = model.partition(level)
        try:
            op = assemble(model, loss, partition, method, subquad)
            result = solve(op, cfg, path)
        except COAError as exc:
            raise StudyError(f"level {level} failed: {exc}", partial=report) from exc
        tv_prev = math.nan if previous is None else tv_distance(previous, result.density)
        report.levels.append(LevelRecord(
            level=level,
            N=partition.n_cells,
            lambda_shifted=result.lambda_shifted,
            lambda_raw=result.lambda_raw,
            residual_A=result.residual_A,
            residual_K=result.residual_K,
            mean_fitness_gap=abs(result.lambda_raw - result.density.mean(model.fitness)),
            tv_prev=tv_prev,
            tail_mass=tail_mass(model, result.density, level),
        ))
        report.results.append(result)
        previous = result.density

    final_tail = report.levels[-1].tail_mass
    if final_tail > TAIL_MASS_LIMIT:
        report.flags.append(f"tail mass {final_tail:.3g} exceeds {TAIL_MASS_LIMIT:g} at the final level")
    return report


@dataclass(frozen=True)
class MethodComparison:
    method_a: str
    method_b: str
    lambda_a: float
    lambda_b: float
    lambda_gap: float
    tv_gap: float


def cross_method_compare(model, level=0, cfg=None, cells=None, subquad=4,
                         methods=("galerkin-sampled", "galerkin-averaged"), grid_factor=4):
    """Solve one partition with two methods and compare eigenvalues and densities."""
    cfg = cfg or SolverConfig()
    partition = model.partition(level, cells)
    loss = loss_function(model, grid_factor * partition.n_cells, level)
    a, b = (solve(assemble(model, loss, partition, m, subquad), cfg) for m in methods)
    return MethodComparison(
        methods[0],
        methods[1],
        a.lambda_raw,
        b.lambda_raw,
        abs(a.lambda_raw - b.lambda_raw),
        tv_distance(a.density, b.density),
    )


def cell_averages(f, partition, order=8):
    """Cell means of ``f`` by Gauss-Legendre quadrature of the given order per cell."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * partition.weights
    mid = 0.5 * (partition.edges[:-1] + partition.edges[1:])
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return 0.5 * np.sum(weights[None, :] * f(x), axis=1)


def oracle_compare(model, oracle, level=0, cfg=None, cells=None, method="nystrom",
                   path="direct", grid_factor=4, result=None):
    """Errors of the discrete solution against a known equilibrium.

    ``oracle`` is a pair ``(lam_star, p_star)`` with ``p_star`` a vectorized
    density. Returns ``(|lam_raw - lam_star|, TV(p_n, cell averages of p_star))``.
    A precomputed ``result`` on the same partition can be passed to skip the solve.
    """
    lam_star, p_star = oracle
    if result is None:
        partition = model.partition(level, cells)
        loss = loss_function(model, grid_factor * partition.n_cells, level)
        result = solve(assemble(model, loss, partition, method), cfg or SolverConfig(), path)
    partition = result.density.partition
    avg = cell_averages(p_star, partition)
    tv = 0.5 * float(np.sum(partition.weights * np.abs(result.density.values - avg)))
    return abs(result.lambda_raw - lam_star), tv
