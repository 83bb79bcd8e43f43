"""Volterra-type integral equations ``w(x) = lam * int_a^x K(x, w(t)) dt``.

The unknown is sampled on a uniform grid and the integral is a composite
trapezoid rule, so one Picard step costs O(N) when the kernel ignores ``x``
and O(N^2) otherwise. Distances use the Bielecki metric
``sup_x |f(x) - g(x)| exp(-m x)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .checker import (
    DENOMINATOR_FLOOR, VIOLATION_SLACK, CheckReport, SamplerConfig, Violation,
)
from .errors import DivergenceError, InvalidInputError, NonFiniteError
from .functionals import GeraghtyFn, check_mix_alpha, geraghty_eval
from .metric import Interval, as_scalar


@dataclass(frozen=True, eq=False)
class GridFunction:
    interval: Interval
    n: int
    values: np.ndarray

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InvalidInputError(f"grid needs n >= 1 subintervals, got {self.n!r}")
        values = np.array(self.values, dtype=float)
        if values.shape != (self.n + 1,):
            raise InvalidInputError(f"expected {self.n + 1} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        return self.interval.length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.interval.a, self.interval.b, self.n + 1)

    @classmethod
    def from_callable(cls, fn, interval: Interval, n: int):
        grid = np.linspace(interval.a, interval.b, n + 1)
        return cls(interval, n, np.broadcast_to(np.asarray(fn(grid), float), grid.shape))

    @classmethod
    def zeros(cls, interval: Interval, n: int):
        return cls(interval, n, np.zeros(n + 1))

    def same_grid(self, other: "GridFunction") -> bool:
        return self.interval == other.interval and self.n == other.n


@dataclass(frozen=True)
class Kernel:
    """``K(x, u)``: ``x`` is the outer variable, ``u`` the value ``w(t)``."""

    body: ex.Expr
    source: str = field(default="", compare=False)

    def __post_init__(self):
        extra = ex.free_vars(self.body) - {"x", "u"}
        if extra:
            raise InvalidInputError(f"kernel may only use x and u, found {sorted(extra)}")
        if not self.source:
            object.__setattr__(self, "source", ex.to_source(self.body))

    @classmethod
    def from_source(cls, source: str):
        return cls(ex.compile_expr(source), source)

    @property
    def uses_x(self) -> bool:
        return "x" in ex.free_vars(self.body)

    def __call__(self, x, u, strict=True):
        return ex.evaluate_array(self.body, {"x": x, "u": u}, strict=strict)


def choose_m(lam, interval: Interval) -> float:
    """Bielecki weight ``max(|lam|, 1)``; any ``m >= |lam|`` satisfies ``m >= |lam| (1 - exp(-m (b - a)))``."""
    lam = as_scalar(lam, "lambda")
    if lam == 0:
        raise InvalidInputError("lambda must be nonzero")
    return max(abs(lam), 1.0)


def weight_condition_holds(m: float, lam: float, interval: Interval) -> bool:
    return m >= abs(lam) * (1.0 - math.exp(-m * interval.length))


@dataclass(frozen=True)
class VolterraProblem:
    kernel: Kernel
    lam: float
    interval: Interval
    n: int
    m: float | None = None

    def __post_init__(self):
        lam = as_scalar(self.lam, "lambda")
        if lam == 0:
            raise InvalidInputError("lambda must be nonzero")
        object.__setattr__(self, "lam", lam)
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InvalidInputError(f"n must be a positive integer, got {self.n!r}")
        m = choose_m(lam, self.interval) if self.m is None else as_scalar(self.m, "m")
        if m <= 0:
            raise InvalidInputError(f"Bielecki weight m must be positive, got {m}")
        if not weight_condition_holds(m, lam, self.interval):
            raise InvalidInputError(
                f"m={m} violates m >= |lambda| (1 - exp(-m (b - a))) for lambda={lam}")
        object.__setattr__(self, "m", m)


@dataclass
class VolterraReport:
    solution: GridFunction
    iterations: int
    bielecki_steps: list[float]
    residual_bielecki: float
    residual_sup: float
    converged: bool

    def to_dict(self, include_solution=False) -> dict:
        d = {
            "iterations": self.iterations,
            "bielecki_steps": self.bielecki_steps,
            "residual_bielecki": self.residual_bielecki,
            "residual_sup": self.residual_sup,
            "converged": self.converged,
            "n": self.solution.n,
            "interval": [self.solution.interval.a, self.solution.interval.b],
            "value_at_b": float(self.solution.values[-1]),
        }
        if include_solution:
            d["values"] = self.solution.values.tolist()
        return d


def trapezoid_cumulative(g: GridFunction) -> GridFunction:
    """Node ``j`` holds the composite-trapezoid approximation of ``int_a^{x_j} g``."""
    y = g.values
    out = np.empty_like(y)
    out[0] = 0.0
    out[1:] = np.cumsum(0.5 * g.h * (y[1:] + y[:-1]))
    return GridFunction(g.interval, g.n, out)


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Lower-triangular matrix whose row ``j`` integrates over nodes ``0..j``."""
    W = np.tril(np.full((n + 1, n + 1), h))
    idx = np.arange(n + 1)
    W[:, 0] = 0.5 * h
    W[idx, idx] = 0.5 * h
    W[0, 0] = 0.0
    return W


def apply_T(p: VolterraProblem, w: GridFunction) -> GridFunction:
    """``(T w)(x_j) = lam * trapezoid over [a, x_j] of K(x_j, w(t_k))``."""
    if w.interval != p.interval or w.n != p.n:
        raise InvalidInputError("grid function does not live on the problem's grid")
    if not p.kernel.uses_x:
        g = p.kernel(0.0, w.values, strict=False)
        g = np.broadcast_to(g, w.values.shape)
        bad = np.flatnonzero(~np.isfinite(g))
        if bad.size:
            raise NonFiniteError(f"kernel not finite at node {int(bad[0])}")
        return GridFunction(p.interval, p.n, p.lam * trapezoid_cumulative(
            GridFunction(p.interval, p.n, g)).values)
    x = w.nodes
    vals = p.kernel(x[:, None], w.values[None, :], strict=False)
    vals = np.broadcast_to(vals, (p.n + 1, p.n + 1))
    lower = np.tril(np.ones((p.n + 1, p.n + 1), dtype=bool))
    bad = np.argwhere(lower & ~np.isfinite(vals))
    if bad.size:
        j, k = bad[0]
        raise NonFiniteError(f"kernel not finite at outer node {j}, inner node {k}")
    W = _trapezoid_weights(p.n, w.h)
    integrals = np.sum(W * np.where(lower, vals, 0.0), axis=1)
    return GridFunction(p.interval, p.n, p.lam * integrals)


def bielecki_distance(f: GridFunction, g: GridFunction, m) -> float:
    if not f.same_grid(g):
        raise InvalidInputError("grid functions live on different grids")
    m = as_scalar(m, "m")
    if m < 0:
        raise InvalidInputError(f"m must be nonnegative, got {m}")
    return float(np.max(np.abs(f.values - g.values) * np.exp(-m * f.nodes)))


def solve(p: VolterraProblem, tol: float = 1e-12, max_iter: int = 1000) -> VolterraReport:
    """Picard iteration ``w <- T(w)`` from ``w = 0`` until the Bielecki step drops below ``tol``."""
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    w = GridFunction.zeros(p.interval, p.n)
    steps = []
    converged = False
    for _ in range(max_iter):
        try:
            tw = apply_T(p, w)
        except (NonFiniteError, InvalidInputError) as exc:
            raise DivergenceError(f"Picard iterate {len(steps) + 1} is not finite: {exc}") from exc
        step = bielecki_distance(w, tw, p.m)
        steps.append(step)
        if step < tol:
            converged = True
            break
        w = tw
    residual = steps[-1] if converged else bielecki_distance(w, apply_T(p, w), p.m)
    residual_sup = float(np.max(np.abs(apply_T(p, w).values - w.values)))
    return VolterraReport(
        solution=w,
        iterations=len(steps),
        bielecki_steps=steps,
        residual_bielecki=residual,
        residual_sup=residual_sup,
        converged=converged,
    )


def write_solution(report: VolterraReport, path) -> None:
    sol = report.solution
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "x", "w"])
        for j, (x, y) in enumerate(zip(sol.nodes, sol.values)):
            writer.writerow([j, repr(float(x)), repr(float(y))])


def _random_poly(rng, interval: Interval, n: int, degree: int = 2) -> tuple[list[float], GridFunction]:
    coeffs = rng.uniform(-1.0, 1.0, size=degree + 1)
    s = (np.linspace(interval.a, interval.b, n + 1) - interval.a) / interval.length
    return coeffs.tolist(), GridFunction(interval, n, np.polyval(coeffs, s))


def check_kernel_condition(kernel: Kernel, lam, interval: Interval, alpha, f: GeraghtyFn,
                           cfg: SamplerConfig = SamplerConfig(1000), n: int = 64,
                           m: float | None = None, max_witnesses: int = 25) -> CheckReport:
    """Sampled test of the kernel hypothesis behind existence and uniqueness.

    For random quadratic grid functions ``w, v`` and grid points ``t <= x``::

        |K(x, w(t)) - K(x, v(t))| <= f(L e^{-m t}) L
        L = alpha (|w(t) - Tw(x)| + |v(t) - Tv(x)|)
            + (1 - alpha) (|w(t) - Tv(x)| + |v(t) - Tw(x)|)

    where ``T`` is the discretised integral operator. Witnesses record the
    polynomial coefficients of ``w`` and ``v`` plus the node indices.
    """
    alpha = check_mix_alpha(alpha)
    problem = VolterraProblem(kernel, lam, interval, n, m)
    rng = np.random.default_rng(cfg.prng_seed)
    x = np.linspace(interval.a, interval.b, n + 1)

    samples = []
    for _ in range(cfg.sample_count):
        cw, w = _random_poly(rng, interval, n)
        cv, v = _random_poly(rng, interval, n)
        j = int(rng.integers(0, n + 1))
        k = int(rng.integers(0, j + 1))
        samples.append((cw, w, cv, v, [(j, k)]))
    if cfg.include_boundary:
        zero = GridFunction.zeros(interval, n)
        one = GridFunction(interval, n, np.ones(n + 1))
        corners = [(n, 0), (n, n), (0, 0)]
        samples.insert(0, ([0.0], zero, [1.0], one, corners))

    violations, count, tested = [], 0, 0
    max_ratio = estimate = 0.0
    for cw, w, cv, v, points in samples:
        tw, tv = apply_T(problem, w), apply_T(problem, v)
        for j, k in points:
            tested += 1
            wt, vt = w.values[k], v.values[k]
            lhs = float(abs(kernel(x[j], wt) - kernel(x[j], vt)))
            L = (alpha * (abs(wt - tw.values[j]) + abs(vt - tv.values[j]))
                 + (1 - alpha) * (abs(wt - tv.values[j]) + abs(vt - tw.values[j])))
            L = float(L)
            rhs = geraghty_eval(f, L * math.exp(-problem.m * x[k])) * L
            if rhs >= DENOMINATOR_FLOOR:
                max_ratio = max(max_ratio, lhs / rhs)
            if L >= DENOMINATOR_FLOOR:
                estimate = max(estimate, lhs / L)
            if lhs > rhs + VIOLATION_SLACK:
                count += 1
                if len(violations) < max_witnesses:
                    violations.append(Violation(tuple(cw), tuple(cv), lhs, rhs,
                                                note=f"outer node {j}, inner node {k}"))
    return CheckReport(tested, violations, count, max_ratio, estimate, count == 0,
                       detail={"m": problem.m, "grid_n": n})
