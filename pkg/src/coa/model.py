"""Continuous continuum-of-alleles problem: domain, fitness, mutation kernel.

The equilibrium equation is

    r(x) p(x) + int [u(x, y) p(y) - u(y, x) p(x)] dy = lam p(x),

written as ``(T - U + lam) p = 0`` with ``T`` multiplication by the loss
function ``w = u1 - r - c`` and ``U`` the integral operator with kernel ``u``.
``u1(x) = int u(y, x) dy`` is the total rate at which type ``x`` mutates away
and the constant ``c`` is chosen so that ``min w = 0``. Eigenvalues obtained
for the shifted problem convert back through ``lam_raw = lam_shifted - c``.

All evaluators are vectorized: fitness profiles take an array of types,
kernels take two broadcastable arrays ``(x, y)`` where ``x`` is the mutant
type and ``y`` the parent type.
"""

from dataclasses import dataclass, field
from math import gamma as gamma_fn
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import connected_components

from ._validation import check_count, check_positive
from .exceptions import InvalidModelError
from .quadrature import uniform_partition

# elements per kernel block; keeps temporaries around 32 MB
_BLOCK = 1 << 22

TOL_ESSINF = 1e-6
U1_CAP = 1e12
CUSP_FLOOR = 1e-14
CUSP_DIVERGENCE = 1e12


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    """Compact type space ``[a, b]``; level ``n`` carries ``base_cells * 2**n`` cells."""

    a: float
    b: float
    base_cells: int = 128

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise ValueError(f"compact domain needs finite a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        check_count("base_cells", self.base_cells)

    is_compact = True

    @property
    def length(self):
        return self.b - self.a

    def coverage(self, level=0):
        return self.a, self.b

    def partition(self, level=0, cells=None):
        n = self.base_cells * 2**level if cells is None else cells
        return uniform_partition(self.a, self.b, n, level=level)

    def integration_interval(self, level=0):
        return self.a, self.b


@dataclass(frozen=True)
class RealLine:
    """The real line, truncated to ``[-L(n), L(n)]`` at level ``n``.

    ``L(n) = half_width * 2**(n / 2)`` grows without bound, and the cell count
    ``base_cells * 2**n`` doubles per level, so the mesh width shrinks by a
    factor ``sqrt(2)`` per level while every bounded interval is eventually
    covered.
    """

    half_width: float = 4.0
    base_cells: int = 128

    def __post_init__(self):
        object.__setattr__(self, "half_width", check_positive("half_width", self.half_width))
        check_count("base_cells", self.base_cells)

    is_compact = False

    def half_width_at(self, level=0):
        return self.half_width * 2.0 ** (level / 2.0)

    def coverage(self, level=0):
        L = self.half_width_at(level)
        return -L, L

    def partition(self, level=0, cells=None):
        n = self.base_cells * 2**level if cells is None else cells
        L = self.half_width_at(level)
        return uniform_partition(-L, L, n, level=level)

    def integration_interval(self, level=0):
        # integrals over R are taken on twice the coverage so that kernel mass
        # leaving the computational window is still counted in u1
        L = 2.0 * self.half_width_at(level)
        return -L, L

    def check_schedule(self, max_level):
        widths = [self.half_width_at(n) for n in range(max_level + 1)]
        return all(b > a for a, b in zip(widths, widths[1:]))


# ---------------------------------------------------------------------------
# fitness profiles and mutation kernels


def _gaussian_density(z, sigma):
    return np.exp(-0.5 * (z / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)


@dataclass(frozen=True, eq=False)
class FitnessProfile:
    """Type-dependent fitness ``r(x)``.

    Use the constructors :meth:`quadratic`, :meth:`linear`, :meth:`constant`,
    :meth:`gaussian`, :meth:`table` or :meth:`custom`.
    """

    form: str
    params: dict
    func: Callable = field(repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape)

    def shifted(self, kappa):
        """Profile ``r + kappa``."""
        base = self.func
        params = dict(self.params)
        params["offset"] = params.get("offset", 0.0) + kappa
        return FitnessProfile(self.form, params, lambda x: base(x) + kappa)

    @classmethod
    def quadratic(cls, r0=1.0, s=1.0):
        """``r(x) = r0 - s x**2``."""
        return cls("quadratic", {"r0": r0, "s": s}, lambda x: r0 - s * x**2)

    @classmethod
    def linear(cls, r0=0.0, slope=1.0):
        return cls("linear", {"r0": r0, "slope": slope}, lambda x: r0 + slope * x)

    @classmethod
    def constant(cls, r0=1.0):
        return cls("constant", {"r0": r0}, lambda x: np.full_like(x, r0, dtype=float))

    @classmethod
    def gaussian(cls, r0=1.0, s=1.0):
        """``r(x) = r0 exp(-s x**2)``."""
        return cls("gaussian", {"r0": r0, "s": s}, lambda x: r0 * np.exp(-s * x**2))

    @classmethod
    def table(cls, xs, rs):
        """Piecewise-linear interpolation through ``(xs, rs)``, constant beyond the ends."""
        xs = np.asarray(xs, dtype=float)
        rs = np.asarray(rs, dtype=float)
        if xs.ndim != 1 or xs.shape != rs.shape or xs.size < 2:
            raise ValueError("table fitness needs two equal-length vectors of at least two entries")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("table fitness x-values must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(rs))):
            raise ValueError("table fitness entries must be finite")
        return cls("table", {"x": xs.tolist(), "r": rs.tolist()}, lambda x: np.interp(x, xs, rs))

    @classmethod
    def custom(cls, func):
        return cls("custom", {}, func)


@dataclass(frozen=True, eq=False)
class MutationKernel:
    """Mutation rate density ``u(x, y)`` from parent ``y`` to mutant ``x``.

    ``width`` is a characteristic mutation step length; it is only used to
    couple the mesh to sharply scaled kernels.
    """

    form: str
    params: dict
    func: Callable = field(repr=False)
    width: Optional[float] = None

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.asarray(self.func(x, y), dtype=float)
        return np.broadcast_to(out, np.broadcast_shapes(x.shape, y.shape))

    @classmethod
    def gaussian_difference(cls, mu=1.0, sigma=1.0):
        """``u(x, y) = mu * phi_sigma(x - y)``."""
        check_positive("sigma", sigma)
        check_positive("mu", mu, strict=False)
        return cls(
            "gaussian-difference",
            {"mu": mu, "sigma": sigma},
            lambda x, y: mu * _gaussian_density(x - y, sigma),
            width=sigma,
        )

    @classmethod
    def house_of_cards(cls, mu=1.0, m=None):
        """``u(x, y) = mu * m(x)``: the mutant type ignores the parent type.

        ``m`` is a :class:`FitnessProfile` (any profile form) or a callable.
        """
        check_positive("mu", mu, strict=False)
        if m is None:
            m = FitnessProfile.constant(1.0)
        elif not isinstance(m, FitnessProfile):
            m = FitnessProfile.custom(m)
        params = {"mu": mu, "m": {"form": m.form, "params": dict(m.params)}}
        return cls(
            "house-of-cards",
            params,
            lambda x, y: mu * m(x) + 0.0 * y,
        )

    @classmethod
    def exponential_tilted(cls, gamma=0.0, mu=1.0, sigma=1.0, nu=1.0, h=None):
        """``u(x, y) = exp(gamma (x - y)) * nu * h(nu |x - y|)``.

        ``h`` defaults to ``mu * phi_sigma``, an even Gaussian step density.
        """
        check_positive("nu", nu)
        if h is None:
            check_positive("sigma", sigma)
            check_positive("mu", mu, strict=False)
            h = _GaussianStep(mu, sigma)
            params = {"gamma": gamma, "mu": mu, "sigma": sigma, "nu": nu}
            width = sigma
        else:
            params = {"gamma": gamma, "nu": nu}
            width = None if sigma is None else sigma
        kernel = scaling_family(h, gamma, nu, width=width)
        return cls("exponential-tilted", params, kernel.func, width=kernel.width)

    @classmethod
    def regularized_gamma(cls, mu=1.0, theta=0.5, d=1.0, eps=1e-3):
        """Reflected Gamma step density with ``|x - y|`` replaced by ``|x - y| + eps``.

        For ``0 < theta < 1`` the unregularized density has a pole at ``x = y``.
        """
        check_positive("eps", eps)
        check_positive("theta", theta)
        check_positive("d", d)
        check_positive("mu", mu, strict=False)
        norm = mu * d**theta / (2.0 * gamma_fn(theta))

        def func(x, y):
            z = np.abs(x - y) + eps
            return norm * z ** (theta - 1.0) * np.exp(-d * z)

        return cls(
            "regularized-gamma",
            {"mu": mu, "theta": theta, "d": d, "eps": eps},
            func,
            width=theta / d,
        )

    @classmethod
    def custom(cls, func, width=None):
        return cls("custom", {}, func, width=width)

    def with_locality(self, nu):
        """Same tilted kernel with the step density rescaled by ``nu``."""
        if self.form != "exponential-tilted" or "sigma" not in self.params:
            raise ValueError("locality scaling needs a built-in exponential-tilted kernel")
        p = self.params
        return MutationKernel.exponential_tilted(p["gamma"], p["mu"], p["sigma"], nu)


class _GaussianStep:
    def __init__(self, mu, sigma):
        self.mu = mu
        self.sigma = sigma

    def __call__(self, z):
        return self.mu * _gaussian_density(z, self.sigma)


def scaling_family(h, gamma, nu, width=None):
    """Kernel ``exp(gamma (x - y)) * nu * h(nu |x - y|)`` for an even step density ``h``.

    The substitution ``z -> z / nu`` shows that the total mass of
    ``nu h(nu |z|)`` does not depend on ``nu``; larger ``nu`` makes mutation
    more local.
    """
    check_positive("nu", nu)

    def func(x, y):
        z = x - y
        return np.exp(gamma * z) * nu * h(nu * np.abs(z))

    return MutationKernel(
        "scaling-family",
        {"gamma": gamma, "nu": nu},
        func,
        width=None if width is None else width / nu,
    )


@dataclass(frozen=True)
class ModelSpec:
    domain: object
    fitness: FitnessProfile
    kernel: MutationKernel

    def with_fitness(self, fitness):
        return ModelSpec(self.domain, fitness, self.kernel)

    def with_kernel(self, kernel):
        return ModelSpec(self.domain, self.fitness, kernel)

    def partition(self, level=0, cells=None):
        return self.domain.partition(level, cells)


# ---------------------------------------------------------------------------
# derived quantities


def kernel_block(kernel, xs, ys, check=True):
    """Dense samples ``u(xs[i], ys[j])``; raises on non-finite values."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = kernel(xs[:, None], ys[None, :])
    if check and not np.all(np.isfinite(out)):
        i, j = np.argwhere(~np.isfinite(out))[0]
        raise InvalidModelError(
            f"mutation kernel is not finite at x={xs[i]!r}, y={ys[j]!r}"
        )
    return out


def _row_chunks(n_rows, n_cols):
    step = max(1, _BLOCK // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


def total_mutation_rate(kernel, x, quad):
    """``u1(x) = Q(u(., x))``, the quadrature of the kernel over its first argument."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape[0])
    for sl in _row_chunks(xs.shape[0], quad.n_cells):
        # rows: parent types x, columns: mutant types t_j
        block = kernel_block(kernel, quad.points, xs[sl]).T
        out[sl] = np.sum(block * quad.weights[None, :], axis=1)
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class LossFunction:
    """``w = u1 - r - shift`` with ``u1`` integrated by a reference quadrature.

    ``grid`` holds the points at which the essential infimum of ``u1 - r``
    was approximated; ``w`` vanishes at its minimizing grid point.
    """

    model: ModelSpec
    quad: object
    grid: np.ndarray
    u1_grid: np.ndarray
    r_grid: np.ndarray
    shift: float
    level: int = 0

    def u1(self, x):
        return total_mutation_rate(self.model.kernel, x, self.quad)

    def r(self, x):
        return self.model.fitness(x)

    def w(self, x):
        return self.u1(x) - self.r(x) - self.shift

    @property
    def w_grid(self):
        return self.u1_grid - self.r_grid - self.shift

    @property
    def argmin(self):
        return float(self.grid[np.argmin(self.w_grid)])


def loss_function(model, grid_resolution, level=0, u1_cap=U1_CAP):
    """Shifted loss function on a reference grid of ``grid_resolution`` cells.

    The shift ``c = min(u1 - r)`` over the grid approximates the essential
    infimum, so ``min(w) = 0`` on the grid. For the real line the reference
    quadrature spans twice the truncation window of ``level``; the infimum is
    sampled inside the window only.
    """
    grid_resolution = check_count("grid_resolution", grid_resolution, minimum=2)
    a, b = model.domain.integration_interval(level)
    quad = uniform_partition(a, b, grid_resolution, level=level)
    lo, hi = model.domain.coverage(level)
    grid = quad.points[(quad.points >= lo) & (quad.points <= hi)]
    u1 = total_mutation_rate(model.kernel, grid, quad)
    if np.max(u1) > u1_cap:
        raise InvalidModelError(
            f"total mutation rate reaches {np.max(u1):.3g} > {u1_cap:.3g}; u1 looks unbounded"
        )
    r = model.fitness(grid)
    if not np.all(np.isfinite(r)):
        k = int(np.flatnonzero(~np.isfinite(r))[0])
        raise InvalidModelError(f"fitness is not finite at x={grid[k]!r}")
    shift = float(np.min(u1 - r))
    return LossFunction(model, quad, grid, u1, np.asarray(r, dtype=float), shift, level)


# ---------------------------------------------------------------------------
# condition checks


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    status: str  # "pass" | "fail" | "inconclusive"
    witness: float
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.status != "fail" for c in self.checks)

    @property
    def failed(self):
        return [c.name for c in self.checks if c.status == "fail"]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "status": c.status, "witness": c.witness, "note": c.note}
                for c in self.checks
            ],
        }


def hille_tamarkin_norm(kernel, loss, alpha, partition):
    """Grid estimate of ``int sup_y u(x, y) / (w(y) + alpha) dx``."""
    alpha = check_positive("alpha", alpha)
    t = partition.points
    denom = loss.w(t) + alpha
    if np.any(denom <= 0):
        raise InvalidModelError("w + alpha is not positive on the grid")
    sup = np.empty(t.shape[0])
    for sl in _row_chunks(t.shape[0], t.shape[0]):
        sup[sl] = np.max(kernel_block(kernel, t[sl], t) / denom[None, :], axis=1)
    value = float(np.sum(partition.weights * sup))
    if not np.isfinite(value):
        raise InvalidModelError("Hille-Tamarkin estimate is not finite")
    return value


def support_components(u_matrix):
    """Number of strongly connected components of the graph ``k -> l`` iff ``U[k, l] > 0``."""
    n, _ = connected_components(np.asarray(u_matrix) > 0, directed=True, connection="strong")
    return int(n)


def _refined_minimum(loss, lo, hi):
    """Minimizer of ``w`` near the grid argmin and ``min(w(x*), 0)``."""
    x0 = loss.argmin
    h = float(np.max(np.diff(loss.grid))) if loss.grid.shape[0] > 1 else hi - lo
    a, b = max(lo, x0 - h), min(hi, x0 + h)
    res = minimize_scalar(lambda x: float(loss.w(x)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13})
    xstar, wstar = (float(res.x), float(res.fun)) if res.fun < loss.w(x0) else (x0, float(loss.w(x0)))
    return xstar, min(wstar, 0.0)


def _cusp_integral(loss, lo, hi, halvings=24, sub=16):
    """Integral of ``1 / max(w, floor)`` over ``J = [x* - d, x* + d]``.

    Evaluated on annuli ``eps_j < |x - x*| <= eps_{j-1}`` with ``eps_j = d 2**-j``.
    Returns ``(total, last_increment_ratio, x*, d)``.
    """
    xstar, offset = _refined_minimum(loss, lo, hi)
    delta = (hi - lo) / 16.0
    frac = (np.arange(sub) + 0.5) / sub
    total = 0.0
    increments = []
    outer = delta
    for _ in range(halvings):
        inner = 0.5 * outer
        inc = 0.0
        for sign in (-1.0, 1.0):
            a = np.clip(xstar + sign * inner, lo, hi)
            b = np.clip(xstar + sign * outer, lo, hi)
            width = abs(b - a)
            if width == 0:
                continue
            x = min(a, b) + frac * width
            inc += width / sub * np.sum(1.0 / np.maximum(loss.w(x) - offset, CUSP_FLOOR))
        increments.append(inc)
        total += inc
        outer = inner
        if total > CUSP_DIVERGENCE:
            break
    ratio = increments[-1] / increments[-2] if len(increments) > 1 and increments[-2] > 0 else 0.0
    if 0.0 < ratio < 1.0:
        # remaining annuli closer to x* than the last one, as a geometric series
        total += increments[-1] * ratio / (1.0 - ratio)
    return total, ratio, xstar, delta


def _check_cusp(model, loss):
    lo, hi = model.domain.coverage(loss.level)
    total, ratio, xstar, delta = _cusp_integral(loss, lo, hi)
    js = np.linspace(max(lo, xstar - delta), min(hi, xstar + delta), 17)
    umin = float(np.min(kernel_block(model.kernel, js, js)))
    if total > CUSP_DIVERGENCE or ratio >= 0.99:
        if umin > 0:
            return ConditionCheck("cusp", "pass", float("inf"), f"int 1/w diverges near x*={xstar:.6g}")
        return ConditionCheck("cusp", "fail", 0.0, "u vanishes on J although int 1/w diverges")
    q = umin * total
    if 0.9 <= q <= 1.1:
        status = "inconclusive"
    else:
        status = "pass" if q > 1 else "fail"
    return ConditionCheck("cusp", status, q, f"J=[{xstar - delta:.6g}, {xstar + delta:.6g}]")


def validate_model(model, level=0, cells=None, grid_factor=4, alpha=1.0, envelopes=None):
    """Check the existence and uniqueness conditions on a grid.

    Produces one entry per condition: ``U1`` (non-negative kernel), ``U2``
    (bounded total mutation rate), ``T1`` (shifted loss has infimum zero),
    ``U4`` (finite Hille-Tamarkin norm at ``alpha``), ``irreducibility`` and
    ``cusp``. Grid checks cannot certify continuum properties; entries are
    marked ``inconclusive`` where the grid evidence is ambiguous.

    ``envelopes`` is an optional ``(w_min, u_max)`` pair of evaluators; when
    given, an extra ``envelope`` entry checks ``w >= w_min`` and
    ``u <= u_max`` on the grid.
    """
    partition = model.partition(level, cells)
    t = partition.points
    checks = []

    u = kernel_block(model.kernel, t, t, check=False)
    if not np.all(np.isfinite(u)):
        checks.append(ConditionCheck("U1", "fail", float("nan"), "kernel not finite on the grid"))
    else:
        umin = float(np.min(u))
        checks.append(ConditionCheck("U1", "pass" if umin >= 0 else "fail", umin, "min u on grid"))

    try:
        loss = loss_function(model, grid_factor * partition.n_cells, level)
    except InvalidModelError as exc:
        checks.append(ConditionCheck("U2", "fail", float("nan"), str(exc)))
        for name in ("T1", "U4"):
            checks.append(ConditionCheck(name, "inconclusive", float("nan"), "loss function unavailable"))
        loss = None
    else:
        checks.append(ConditionCheck("U2", "pass", float(np.max(loss.u1_grid)), "max u1 on grid"))
        wmin = float(np.min(loss.w_grid))
        w_nodes = float(np.min(loss.w(t)))
        note = f"shift c={loss.shift:.17g}"
        if not (np.isfinite(loss.shift) and abs(wmin) <= TOL_ESSINF):
            status = "fail"
        elif w_nodes >= -TOL_ESSINF:
            status = "pass"
        else:
            # the grid infimum is not confirmed off the reference grid
            status = "inconclusive"
            note += "; w < 0 at partition nodes, u1 quadrature under-resolved"
        checks.append(ConditionCheck("T1", status, w_nodes, note))
        try:
            ht = hille_tamarkin_norm(model.kernel, loss, alpha, partition)
        except InvalidModelError as exc:
            checks.append(ConditionCheck("U4", "fail", float("nan"), str(exc)))
        else:
            checks.append(ConditionCheck("U4", "pass" if ht < U1_CAP else "fail", ht, f"alpha={alpha}"))

    if np.all(np.isfinite(u)):
        ncomp = support_components(u)
        checks.append(ConditionCheck(
            "irreducibility",
            "pass" if ncomp == 1 else "fail",
            float(ncomp),
            "strongly connected components of the support graph",
        ))
    else:
        checks.append(ConditionCheck("irreducibility", "inconclusive", float("nan"), "kernel not finite"))

    if loss is None:
        checks.append(ConditionCheck("cusp", "inconclusive", float("nan"), "loss function unavailable"))
    else:
        checks.append(_check_cusp(model, loss))

    if envelopes is not None:
        w_min, u_max = envelopes
        ok = bool(np.all(loss.w(t) >= w_min(t))) if loss is not None else False
        ok = ok and bool(np.all(u <= u_max(t[:, None], t[None, :])))
        checks.append(ConditionCheck("envelope", "pass" if ok else "fail", float(ok), "w >= w_min, u <= u_max"))

    return ValidationReport(tuple(checks))
