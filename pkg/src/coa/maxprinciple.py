"""Scalar maximum principle ``lam ~ sup(r - g)`` and mutation-locality scaling.

The mutational loss is

    g(x) = int [u(x, y) - sqrt(u(x, y) u(y, x))] dy,

which vanishes for symmetric kernels. For tilted kernels
``exp(gamma (x - y)) nu h(nu |x - y|)`` the gap between ``sup(r - g)`` and the
equilibrium mean fitness is expected to close as ``nu`` grows.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ._validation import max_cells
from .discretize import assemble
from .eigensolver import SolverConfig, solve
from .exceptions import InvalidModelError
from .model import _row_chunks, loss_function
from .quadrature import mesh_width, uniform_partition

LOCALITY_HEADER = ("nu", "level", "N", "lambda_raw", "lambda_mp", "gap")


def _geometric_mean(a, b):
    # exact for symmetric pairs; avoids underflow of a * b in kernel tails
    return np.where(a == b, a, np.sqrt(a) * np.sqrt(b))


def mutational_loss_g(model, x, quad):
    """``Q(y -> u(x, y) - sqrt(u(x, y) u(y, x)))`` for each ``x``."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = quad.points
    out = np.empty(xs.shape[0])
    for sl in _row_chunks(xs.shape[0], ys.shape[0]):
        fwd = np.asarray(model.kernel(xs[sl, None], ys[None, :]), dtype=float)
        bwd = np.asarray(model.kernel(ys[None, :], xs[sl, None]), dtype=float)
        if not (np.all(np.isfinite(fwd)) and np.all(np.isfinite(bwd))):
            raise InvalidModelError("mutation kernel is not finite")
        if np.any(fwd < 0) or np.any(bwd < 0):
            raise InvalidModelError("mutation kernel takes negative values")
        out[sl] = np.sum((fwd - _geometric_mean(fwd, bwd)) * quad.weights[None, :], axis=1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class MaxPrincipleEstimate:
    points: np.ndarray
    g_values: np.ndarray
    lambda_mp: float
    argmax: float


def max_principle_estimate(model, partition, factor=4):
    """``max(r - g)`` over a ``factor``-fold refinement of ``partition``.

    ``g`` is integrated over the same reference interval as the loss
    function; ``r`` is the raw, unshifted fitness.
    """
    grid = partition.subdivide(factor).points
    a, b = model.domain.integration_interval(partition.level)
    quad = uniform_partition(a, b, factor * partition.n_cells)
    g = mutational_loss_g(model, grid, quad)
    values = model.fitness(grid) - g
    k = int(np.argmax(values))
    return MaxPrincipleEstimate(grid, g, float(values[k]), float(grid[k]))


@dataclass(frozen=True)
class LocalityRow:
    nu: float
    level: int
    N: int
    lambda_raw: float
    lambda_mp: float
    gap: float


@dataclass
class LocalityTable:
    rows: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def gaps(self):
        return [row.gap for row in self.rows]

    @property
    def monotone(self):
        gaps = self.gaps
        return all(b <= a for a, b in zip(gaps, gaps[1:]))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LOCALITY_HEADER)
        for row in self.rows:
            writer.writerow([
                f"{row.nu:.17g}", str(row.level), str(row.N),
                f"{row.lambda_raw:.17g}", f"{row.lambda_mp:.17g}", f"{row.gap:.17g}",
            ])
        return buf.getvalue()

    def to_dict(self):
        return {
            "flags": list(self.flags),
            "rows": [{name: getattr(row, name) for name in LOCALITY_HEADER} for row in self.rows],
        }


def coupled_cells(partition_cells, lo, hi, width, cap):
    """Smallest doubling of ``partition_cells`` whose mesh resolves ``width / 4``."""
    n = partition_cells
    if width is None:
        return n
    while (hi - lo) / n > width / 4.0 and 2 * n <= cap:
        n *= 2
    return n


def locality_experiment(model, nu_list, level=0, cfg=None, cells=None, path="direct",
                        residual_tol=1e-9):
    """Tabulate ``gap = lam_mp - lam_raw`` along a ladder of locality parameters.

    ``model.kernel`` must be a built-in exponential-tilted kernel. For each
    ``nu`` the cell count on the level's coverage is doubled until the mesh
    width is at most a quarter of the scaled kernel width, and once more while
    the eigen-residual exceeds ``residual_tol``.
    """
    nus = [float(nu) for nu in nu_list]
    if not nus:
        raise ValueError("nu_list must not be empty")
    if any(nu <= 0 for nu in nus) or nus != sorted(nus):
        raise ValueError("nu_list must be positive and ascending")
    cfg = cfg or SolverConfig()
    cap = max_cells()
    lo, hi = model.domain.coverage(level)
    base = model.partition(level, cells).n_cells

    table = LocalityTable()
    for nu in nus:
        scaled = model.with_kernel(model.kernel.with_locality(nu))
        n = coupled_cells(base, lo, hi, scaled.kernel.width, cap)
        while True:
            partition = scaled.partition(level, n)
            loss = loss_function(scaled, 4 * n, level)
            result = solve(assemble(scaled, loss, partition, "nystrom"), cfg, path)
            if result.residual_A <= residual_tol or 2 * n > cap:
                break
            n *= 2
        estimate = max_principle_estimate(scaled, partition)
        table.rows.append(LocalityRow(
            nu, level, n, result.lambda_raw, estimate.lambda_mp,
            estimate.lambda_mp - result.lambda_raw,
        ))
        if mesh_width(partition) > (scaled.kernel.width or np.inf) / 4.0:
            table.flags.append(f"nu={nu:g}: mesh does not resolve the kernel (cell cap reached)")
    if not table.monotone:
        table.flags.append("gap is not monotone non-increasing in nu")
    return table
