"""Sliding-window Picard iteration for eta-ary operators.

Starting from seeds ``x1 .. x_eta`` the sequence continues with
``x_{n+eta} = U(hat(x_n, ..., x_{n+eta-1}))``: the operator is applied to
the hat-tuple whose head is the last ``eta`` iterates.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DivergenceError, FixlabError, InvalidInputError, NonFiniteError
from .functionals import Operator
from .metric import as_scalar

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
MONOTONE_FLOOR = 1e-14


@dataclass
class ConvergenceReport:
    fixed_point: float
    iterations: int
    step_distances: list[float]
    residual: float
    converged: bool
    monotone_decreasing: bool
    iterates: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fixed_point": self.fixed_point,
            "iterations": self.iterations,
            "step_distances": self.step_distances,
            "residual": self.residual,
            "converged": self.converged,
            "monotone_decreasing": self.monotone_decreasing,
        }


@dataclass
class ProbeReport:
    limits: list[float | None]
    converged: list[bool]
    errors: list[str | None]
    max_pairwise_distance: float
    agree: bool

    def to_dict(self) -> dict:
        return {
            "limits": self.limits,
            "converged": self.converged,
            "errors": self.errors,
            "max_pairwise_distance": self.max_pairwise_distance,
            "agree": self.agree,
        }


def is_strictly_decreasing(steps: Sequence[float], floor: float = MONOTONE_FLOOR) -> bool:
    """True when every step above ``floor`` is followed by a strictly smaller one."""
    return all(b < a for a, b in zip(steps, steps[1:]) if a > floor)


def picard_step(U: Operator, window: Sequence[float]) -> float:
    if len(window) != U.eta:
        raise InvalidInputError(f"window length {len(window)} does not match eta={U.eta}")
    return U(tuple(window))


def fixed_point_residual(U: Operator, w) -> float:
    """``d(U(w, w, ...), w)``; zero exactly at fixed points of the diagonal map."""
    w = as_scalar(w, "w")
    return abs(U((w,) * U.eta) - w)


def picard_run(U: Operator, seeds: Sequence[float] | None = None,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ConvergenceReport:
    """Iterate until both the last step and the fixed-point residual drop below ``tol``.

    Seeds default to ``eta`` copies of the midpoint of the operator's space.
    A non-finite iterate raises :class:`DivergenceError`.
    """
    if seeds is None:
        seeds = [U.space.default_point()] * U.eta
    seeds = [as_scalar(s, "seed") for s in seeds]
    if len(seeds) != U.eta:
        raise InvalidInputError(f"need {U.eta} seeds, got {len(seeds)}")
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InvalidInputError(f"max_iter must be >= 1, got {max_iter}")

    window = deque(seeds, maxlen=U.eta)
    steps: list[float] = []
    iterates: list[float] = []
    converged = False
    residual = math.inf
    for n in range(1, max_iter + 1):
        try:
            x = picard_step(U, window)
        except NonFiniteError as exc:
            raise DivergenceError(f"iterate {n} is not finite: {exc}") from exc
        if not math.isfinite(x):
            raise DivergenceError(f"iterate {n} is not finite")
        step = abs(x - window[-1])
        window.append(x)
        steps.append(step)
        iterates.append(x)
        if step < tol:
            residual = fixed_point_residual(U, x)
            if residual < tol:
                converged = True
                break
    else:
        residual = fixed_point_residual(U, window[-1])

    return ConvergenceReport(
        fixed_point=window[-1],
        iterations=len(steps),
        step_distances=steps,
        residual=residual,
        converged=converged,
        monotone_decreasing=is_strictly_decreasing(steps),
        iterates=iterates,
    )


def uniqueness_probe(U: Operator, seed_sets: Sequence[Sequence[float]],
                     tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ProbeReport:
    """Run Picard from several seed sets and compare the limits.

    Limits agree when every pairwise distance is at most ``10 * tol`` and every
    run converged.
    """
    if len(seed_sets) < 2:
        raise InvalidInputError("uniqueness probe needs at least two seed sets")
    limits, flags, errors = [], [], []
    for seeds in seed_sets:
        try:
            report = picard_run(U, seeds, tol, max_iter)
        except InvalidInputError:
            raise
        except FixlabError as exc:
            limits.append(None)
            flags.append(False)
            errors.append(str(exc))
            continue
        limits.append(report.fixed_point)
        flags.append(report.converged)
        errors.append(None)

    finite = [x for x in limits if x is not None]
    spread = max((abs(a - b) for a, b in itertools.combinations(finite, 2)), default=0.0)
    agree = all(flags) and spread <= 10 * tol
    return ProbeReport(limits, flags, errors, spread, agree)


def write_trace(report: ConvergenceReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "value", "step_distance"])
        for i, (x, s) in enumerate(zip(report.iterates, report.step_distances), start=1):
            writer.writerow([i, repr(x), repr(s)])
