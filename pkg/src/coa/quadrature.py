"""Partition-backed quadrature rules.

A :class:`Partition` splits a bounded interval into contiguous cells and
places one node in each. The weights are the cell widths, so the induced
rule ``Q f = sum_k w_k f(t_k)`` has positive weights summing to the length of
the covered interval. Uniform partitions put the node at the cell midpoint
(composite midpoint rule).
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count
from .exceptions import QuadratureError


@dataclass(frozen=True, eq=False)
class Partition:
    """Cells ``[edges[k], edges[k+1])`` with one node per cell.

    Parameters
    ----------
    edges : ndarray, shape (N + 1,)
        Strictly increasing cell boundaries.
    points : ndarray, shape (N,), optional
        Node inside each cell; defaults to the midpoints.
    level : int
        Refinement level the partition was produced at.
    """

    edges: np.ndarray
    points: np.ndarray = None
    level: int = 0
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise ValueError("a partition needs at least two edges")
        if not np.all(np.isfinite(edges)):
            raise ValueError("partition edges must be finite")
        widths = np.diff(edges)
        if np.any(widths <= 0):
            raise ValueError("partition edges must be strictly increasing")
        if self.points is None:
            points = 0.5 * (edges[:-1] + edges[1:])
        else:
            points = np.asarray(self.points, dtype=float)
            if points.shape != widths.shape:
                raise ValueError("need exactly one point per cell")
            if np.any(points < edges[:-1]) or np.any(points > edges[1:]):
                raise ValueError("every point must lie inside its cell")
        edges.setflags(write=False)
        points.setflags(write=False)
        widths.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", widths)

    @property
    def n_cells(self):
        return self.weights.shape[0]

    def __len__(self):
        return self.n_cells

    @property
    def bounds(self):
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def length(self):
        return float(self.edges[-1] - self.edges[0])

    def cell_index(self, x):
        """Index of the cell containing each ``x``; ``-1`` outside the coverage."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        # the right end point belongs to the last cell
        idx = np.where(x == self.edges[-1], self.n_cells - 1, idx)
        return np.where((x < self.edges[0]) | (x > self.edges[-1]), -1, idx)

    def subdivide(self, factor):
        """Split every cell into ``factor`` equal cells with midpoint nodes."""
        factor = check_count("factor", factor)
        frac = np.arange(factor) / factor
        left = self.edges[:-1, None] + frac[None, :] * self.weights[:, None]
        edges = np.append(left.ravel(), self.edges[-1])
        return Partition(edges, level=self.level)

    def sub_nodes(self, s):
        """Midpoints of an ``s``-fold split of each cell, shape (N, s)."""
        s = check_count("sub-quadrature order", s)
        frac = (np.arange(s) + 0.5) / s
        return self.edges[:-1, None] + frac[None, :] * self.weights[:, None]


def uniform_partition(a, b, n, level=0):
    """``n`` equal cells on ``[a, b]`` with midpoint nodes."""
    n = check_count("number of cells", n)
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise ValueError(f"need finite a < b, got [{a}, {b}]")
    edges = a + (b - a) * (np.arange(n + 1) / n)
    edges[-1] = b
    return Partition(edges, level=level)


def refine(partition, domain=None):
    """Next partition in the refinement sequence.

    On a compact domain (or when ``domain`` is None) every cell is halved.
    On the real line the cell count doubles and the coverage grows to the
    truncation half-width of the next level, see
    :meth:`coa.model.RealLine.partition`.
    """
    if domain is not None and not domain.is_compact:
        return domain.partition(partition.level + 1, cells=2 * partition.n_cells)
    mid = 0.5 * (partition.edges[:-1] + partition.edges[1:])
    edges = np.empty(2 * partition.n_cells + 1)
    edges[0::2] = partition.edges
    edges[1::2] = mid
    return Partition(edges, level=partition.level + 1)


def apply(rule, f):
    """Evaluate ``sum_k w_k f(t_k)``.

    ``f`` is called once with the vector of nodes.
    """
    values = np.asarray(f(rule.points), dtype=float)
    if values.shape != rule.points.shape:
        values = np.broadcast_to(values, rule.points.shape)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        k = int(bad[0])
        raise QuadratureError(
            f"integrand is not finite at node {k} (t={rule.points[k]!r})", node=k
        )
    return float(np.sum(rule.weights * values))


def mesh_width(partition):
    return float(np.max(partition.weights))
