"""Finite-rank discretizations of ``A = T - U`` and step-density embedding.

Nystrom (compact interval, sampled kernel)::

    T[k, k] = w(t_k),    U[k, l] = alpha_l * u(t_k, t_l)

Galerkin on step functions uses the same formulas with sampling points in
each cell (the ``galerkin-sampled`` variant, identical to Nystrom when the
nodes are the midpoints) or replaces the samples by cell averages, which is
the projection onto step functions by conditional expectations
(``galerkin-averaged``)::

    T[k, k] = mean of w over I_k
    U[k, l] = |I_l| * mean of u over I_k x I_l

Cell averages are computed with an ``s``-point midpoint sub-rule per cell.
"""

import io
from dataclasses import dataclass

import numpy as np

from ._validation import check_cell_count, check_count, check_vector
from .exceptions import (
    AssemblyError,
    DegenerateDensityError,
    IncompatiblePartitionError,
    PoleError,
)
from .model import _row_chunks

METHODS = ("nystrom", "galerkin-sampled", "galerkin-averaged")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Matrices of one discretization level.

    ``A = diag(w_diag) - u_matrix`` is never stored; use :meth:`a_matrix`.
    """

    partition: object
    w_diag: np.ndarray
    u_matrix: np.ndarray
    r_samples: np.ndarray
    method: str
    shift: float

    @property
    def n(self):
        return self.w_diag.shape[0]

    @property
    def weights(self):
        return self.partition.weights

    def a_matrix(self):
        a = -self.u_matrix.copy()
        a[np.diag_indices_from(a)] += self.w_diag
        return a

    def matvec_a(self, p):
        return self.w_diag * p - self.u_matrix @ p


@dataclass(frozen=True, eq=False)
class StepDensity:
    """Step function ``sum_k values[k] * 1_{I_k}`` on a partition."""

    partition: object
    values: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = self.partition.cell_index(x)
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)], 0.0)
        return out

    @property
    def induced_norm(self):
        return float(np.sum(self.partition.weights * np.abs(self.values)))

    def mass(self, where):
        """Mass of the cells whose nodes satisfy the boolean mask ``where(t)``."""
        mask = np.asarray(where(self.partition.points), dtype=bool)
        return float(np.sum(self.partition.weights[mask] * self.values[mask]))

    def mean(self, f):
        return float(np.sum(self.partition.weights * self.values * f(self.partition.points)))


def _check_samples(values, what):
    if np.all(np.isfinite(values)):
        return
    bad = np.argwhere(~np.isfinite(values))[0]
    index = tuple(int(i) for i in bad)
    raise AssemblyError(f"{what} is not finite at index {index}", index=index)


def _sampled_u(kernel, partition):
    t = partition.points
    n = t.shape[0]
    u = np.empty((n, n))
    # rows are independent; assembly order does not affect the result
    for sl in _row_chunks(n, n):
        block = np.asarray(kernel(t[sl, None], t[None, :]), dtype=float)
        _check_samples(block, "mutation kernel sample")
        u[sl] = block * partition.weights[None, :]
    return u


def nystrom_matrices(model, loss, partition):
    """Nystrom matrices for the compact-interval case."""
    check_cell_count(partition.n_cells)
    t = partition.points
    w = np.asarray(loss.w(t), dtype=float)
    _check_samples(w, "loss function sample")
    r = np.asarray(model.fitness(t), dtype=float)
    _check_samples(r, "fitness sample")
    u = _sampled_u(model.kernel, partition)
    return DiscreteOperator(partition, w, u, r, "nystrom", loss.shift)


def galerkin_matrices(model, loss, partition, variant="sampled", subquad=4):
    """Galerkin matrices on step functions over ``partition``.

    Parameters
    ----------
    variant : {"sampled", "averaged"}
        ``sampled`` samples ``w`` and ``u`` at the cell midpoints and coincides
        entry for entry with :func:`nystrom_matrices`. ``averaged`` uses cell
        averages computed with ``subquad`` midpoint sub-nodes per cell.
    """
    if variant == "sampled":
        op = nystrom_matrices(model, loss, partition)
        return DiscreteOperator(
            partition, op.w_diag, op.u_matrix, op.r_samples, "galerkin-sampled", op.shift
        )
    if variant != "averaged":
        raise ValueError(f"variant must be 'sampled' or 'averaged', got {variant!r}")

    n = check_cell_count(partition.n_cells)
    s = check_count("subquad", subquad)
    sub = partition.sub_nodes(s)  # (n, s)
    flat = sub.ravel()
    w_sub = np.asarray(loss.w(flat), dtype=float)
    _check_samples(w_sub, "loss function sample")
    w = w_sub.reshape(n, s).mean(axis=1)
    r = np.asarray(model.fitness(partition.points), dtype=float)
    _check_samples(r, "fitness sample")

    u = np.empty((n, n))
    rows_per_chunk = max(1, (1 << 22) // (n * s * s))
    for start in range(0, n, rows_per_chunk):
        stop = min(start + rows_per_chunk, n)
        xs = sub[start:stop].reshape(-1)
        block = np.asarray(model.kernel(xs[:, None], flat[None, :]), dtype=float)
        _check_samples(block, "mutation kernel sample")
        means = block.reshape(stop - start, s, n, s).mean(axis=(1, 3))
        u[start:stop] = means * partition.weights[None, :]
    return DiscreteOperator(partition, w, u, r, "galerkin-averaged", loss.shift)


def assemble(model, loss, partition, method="nystrom", subquad=4):
    """Dispatch on the method tag."""
    if method == "nystrom":
        return nystrom_matrices(model, loss, partition)
    if method == "galerkin-sampled":
        return galerkin_matrices(model, loss, partition, "sampled")
    if method == "galerkin-averaged":
        return galerkin_matrices(model, loss, partition, "averaged", subquad)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def k_alpha_matrix(op, alpha):
    """``U (T + alpha)^-1``: column ``l`` of ``U`` divided by ``w_l + alpha``."""
    bound = -float(np.min(op.w_diag))
    if not alpha > bound:
        raise PoleError(f"alpha={alpha!r} must exceed -min(w)={bound!r}")
    return op.u_matrix / (op.w_diag + alpha)[None, :]


def embed_density(partition, values):
    """Normalize ``values`` to unit induced norm and wrap them as a step density.

    Returns ``(density, factor)`` where ``density.values = factor * values``.
    """
    values = check_vector(values, partition.n_cells)
    norm = float(np.sum(partition.weights * np.abs(values)))
    if norm == 0.0:
        raise DegenerateDensityError("cannot normalize the zero vector")
    factor = 1.0 / norm
    return StepDensity(partition, values * factor), factor


def _common_edges(p1, p2):
    return np.union1d(p1.edges, p2.edges)


def tv_distance(d1, d2):
    """Total variation distance ``0.5 * int |p1 - p2|`` of two step densities.

    Densities vanish outside their partitions' coverage. The integral is exact
    on the common refinement obtained by merging both edge sets.
    """
    e1, e2 = d1.partition.edges, d2.partition.edges
    if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
        raise IncompatiblePartitionError("partitions must have finite edges")
    edges = _common_edges(d1.partition, d2.partition)
    widths = np.diff(edges)
    keep = widths > 0
    mid = 0.5 * (edges[:-1] + edges[1:])[keep]
    diff = np.abs(d1(mid) - d2(mid))
    return 0.5 * float(np.sum(widths[keep] * diff))


# ---------------------------------------------------------------------------
# plain-text matrix dump


def dump_operator(op):
    """Plain-text dump: header ``N method shift``, N rows of U, then w and r."""
    buf = io.StringIO()
    buf.write(f"{op.n} {op.method} {op.shift:.17g}\n")
    for row in op.u_matrix:
        buf.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    buf.write(" ".join(f"{v:.17g}" for v in op.w_diag) + "\n")
    buf.write(" ".join(f"{v:.17g}" for v in op.r_samples) + "\n")
    return buf.getvalue()


def load_operator(text):
    """Inverse of :func:`dump_operator`; returns ``dict(n, method, shift, u, w, r)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix dump")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("header must read 'N method shift'")
    n = int(head[0])
    if len(lines) != n + 3:
        raise ValueError(f"expected {n + 3} lines, found {len(lines)}")
    u = np.array([[float(v) for v in ln.split()] for ln in lines[1 : n + 1]])
    if u.shape != (n, n):
        raise ValueError("U block is not square")
    w = np.array([float(v) for v in lines[n + 1].split()])
    r = np.array([float(v) for v in lines[n + 2].split()])
    if w.shape != (n,) or r.shape != (n,):
        raise ValueError("w and r rows must have N entries")
    return {"n": n, "method": head[1], "shift": float(head[2]), "u": u, "w": w, "r": r}
