"""Empirical certification of contraction inequalities.

A check draws pairs of eta-tuples from the operator's space and tests
``d(U(w), U(v)) <= rhs(w, v)`` for the chosen contraction kind. A pass means
only that no violation occurred among the recorded samples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import FixlabError, InvalidInputError
from .functionals import (
    FKind, GeraghtyFn, MixWeights, Operator, bkf, check_mix_alpha, geraghty_eval,
    m_from, mprime_from,
)
from .metric import as_hat, as_scalar

VIOLATION_SLACK = 1e-12
DENOMINATOR_FLOOR = 1e-9
BOUNDARY_NUDGE = 1e-6
MAX_BOUNDARY_TUPLES = 64
RANDOM_PARTNERS = 8
GERAGHTY_CAP = 0.5


def _constant(c, lo, hi, name):
    c = as_scalar(c, "c")
    if not lo < c < hi:
        raise InvalidInputError(f"{name} constant must lie in ({lo}, {hi}), got {c}")
    return c


def _half_cap(beta: GeraghtyFn):
    if not isinstance(beta, GeraghtyFn):
        raise InvalidInputError(f"beta must be a GeraghtyFn, got {beta!r}")
    if abs(beta.r - GERAGHTY_CAP) > 1e-15:
        raise InvalidInputError(f"generalized contractions need beta with cap 1/2, got r={beta.r}")


@dataclass(frozen=True)
class BanachC:
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _constant(self.c, 0.0, 1.0, "Banach"))

    def functional(self, parts):
        return parts[0]

    def bound(self, parts):
        return self.c * parts[0]


@dataclass(frozen=True)
class KannanC:
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _constant(self.c, 0.0, 0.5, "Kannan"))

    def functional(self, parts):
        return parts[1]

    def bound(self, parts):
        return self.c * parts[1]


@dataclass(frozen=True)
class FisherC:
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _constant(self.c, 0.0, 0.5, "Fisher"))

    def functional(self, parts):
        return parts[2]

    def bound(self, parts):
        return self.c * parts[2]


@dataclass(frozen=True)
class GenC:
    weights: MixWeights
    beta: GeraghtyFn

    def __post_init__(self):
        if not isinstance(self.weights, MixWeights):
            object.__setattr__(self, "weights", MixWeights(*self.weights))
        _half_cap(self.beta)

    def functional(self, parts):
        return mprime_from(parts, self.weights)

    def bound(self, parts):
        m = self.functional(parts)
        return geraghty_eval(self.beta, m) * m


@dataclass(frozen=True)
class GenH:
    alpha: float
    beta: GeraghtyFn

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_mix_alpha(self.alpha))
        _half_cap(self.beta)

    def functional(self, parts):
        return m_from(parts, self.alpha)

    def bound(self, parts):
        m = self.functional(parts)
        return geraghty_eval(self.beta, m) * m


@dataclass(frozen=True)
class GenL:
    fkind: FKind
    beta: GeraghtyFn

    def __post_init__(self):
        _half_cap(self.beta)

    def functional(self, parts):
        return self.fkind.combine(*parts)

    def bound(self, parts):
        m = self.functional(parts)
        return geraghty_eval(self.beta, m) * m


ContractionKind = Union[BanachC, KannanC, FisherC, GenC, GenH, GenL]


@dataclass(frozen=True)
class Functional:
    """A bare functional for constant estimation: B, K, F, M' (weights), M (alpha), L (FKind)."""

    name: str
    param: object = None

    def __post_init__(self):
        if self.name not in ("B", "K", "F", "M'", "M", "L"):
            raise InvalidInputError(f"unknown functional {self.name!r}")
        if self.name == "M'" and not isinstance(self.param, MixWeights):
            raise InvalidInputError("M' needs MixWeights")
        if self.name == "M":
            object.__setattr__(self, "param", check_mix_alpha(self.param))
        if self.name == "L" and not isinstance(self.param, FKind):
            raise InvalidInputError("L needs an FKind")

    def __call__(self, parts) -> float:
        b, k, f = parts
        if self.name == "B":
            return b
        if self.name == "K":
            return k
        if self.name == "F":
            return f
        if self.name == "M'":
            return mprime_from(parts, self.param)
        if self.name == "M":
            return m_from(parts, self.param)
        return self.param.combine(b, k, f)


@dataclass(frozen=True)
class SamplerConfig:
    sample_count: int = 10_000
    prng_seed: int = 0
    include_boundary: bool = True

    def __post_init__(self):
        if self.sample_count < 1:
            raise InvalidInputError(f"sample_count must be >= 1, got {self.sample_count}")
        if not 0 <= self.prng_seed < 2**64:
            raise InvalidInputError("prng_seed must be a 64-bit unsigned integer")


@dataclass
class Violation:
    w: tuple
    v: tuple
    lhs: float | None
    rhs: float | None
    error: str | None = None
    note: str | None = None

    def to_dict(self):
        d = {"w": list(self.w), "v": list(self.v), "lhs": self.lhs,
             "rhs": self.rhs, "error": self.error}
        if self.note is not None:
            d["note"] = self.note
        return d


@dataclass
class CheckReport:
    samples_tested: int
    violations: list[Violation]
    violation_count: int
    max_ratio: float
    estimated_constant: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "samples_tested": self.samples_tested,
            "violation_count": self.violation_count,
            "violations": [v.to_dict() for v in self.violations],
            "max_ratio": self.max_ratio,
            "estimated_constant": self.estimated_constant,
            "passed": self.passed,
            **self.detail,
        }


def rhs_bound(U: Operator, w, v, kind: ContractionKind) -> float:
    return kind.bound(bkf(U, w, v))


def _boundary_values(U: Operator, a: float, b: float) -> list[float]:
    values = {a, b, 0.5 * (a + b)}
    for p in U.branch_points():
        for q in (p - BOUNDARY_NUDGE, p, p + BOUNDARY_NUDGE):
            if a <= q <= b:
                values.add(q)
    return sorted(values, reverse=True)


def _boundary_tuples(U: Operator, a: float, b: float) -> list[tuple]:
    values = _boundary_values(U, a, b)
    if len(values) ** U.eta <= MAX_BOUNDARY_TUPLES:
        return list(itertools.product(values, repeat=U.eta))
    mid = 0.5 * (a + b)
    out = []
    for p in values:
        for prefix in (p, mid, a):
            t = (prefix,) * (U.eta - 1) + (p,)
            if t not in out:
                out.append(t)
    return out


def sample_pairs(U: Operator, cfg: SamplerConfig) -> list[tuple[tuple, tuple]]:
    """Deterministic sample of tuple pairs: boundary pairs first, then uniform draws."""
    bounds = U.space.bounds
    if bounds is None:
        raise InvalidInputError("sampling needs a bounded space; give the operator an interval")
    a, b = bounds.a, bounds.b
    rng = np.random.default_rng(cfg.prng_seed)
    draws = rng.uniform(a, b, size=(cfg.sample_count, 2, U.eta))
    pairs = []
    if cfg.include_boundary:
        corners = _boundary_tuples(U, a, b)
        pairs.extend(itertools.combinations(corners, 2))
        partners = rng.uniform(a, b, size=(len(corners), RANDOM_PARTNERS, U.eta))
        for t, row in zip(corners, partners):
            pairs.extend((t, tuple(p.tolist())) for p in row)
    pairs.extend((tuple(w.tolist()), tuple(v.tolist())) for w, v in draws)
    return pairs


def _evaluate_pair(U: Operator, w, v):
    """Return ``(lhs, parts)`` or raise; images must stay inside the space."""
    uw, uv = U(w), U(v)
    for t, image in ((w, uw), (v, uv)):
        if not U.space.admits(image):
            raise InvalidInputError(f"U{list(t)} = {image!r} leaves the operator's space")
    return abs(uw - uv), bkf(U, w, v, (uw, uv))


@dataclass(frozen=True)
class EvaluatedSample:
    w: tuple
    v: tuple
    lhs: float | None
    parts: tuple[float, float, float] | None
    error: str | None = None


def evaluate_samples(U: Operator, cfg: SamplerConfig = SamplerConfig()) -> list[EvaluatedSample]:
    """Evaluate ``U`` on every sampled pair once; reusable across contraction kinds."""
    out = []
    for w, v in sample_pairs(U, cfg):
        try:
            lhs, parts = _evaluate_pair(U, w, v)
        except FixlabError as exc:
            out.append(EvaluatedSample(w, v, None, None, str(exc)))
        else:
            out.append(EvaluatedSample(w, v, lhs, parts))
    return out


def check_inequality(U: Operator, kind: ContractionKind, cfg: SamplerConfig = SamplerConfig(),
                     max_witnesses: int = 25,
                     samples: list[EvaluatedSample] | None = None) -> CheckReport:
    """Test ``kind`` on sampled pairs; ``samples`` from :func:`evaluate_samples` skips re-evaluation."""
    if samples is None:
        samples = evaluate_samples(U, cfg)
    violations: list[Violation] = []
    count = 0
    max_ratio = 0.0
    estimate = 0.0
    for s in samples:
        error = s.error
        if error is None:
            lhs, parts = s.lhs, s.parts
            try:
                rhs = kind.bound(parts)
            except FixlabError as exc:
                error = str(exc)
        if error is not None:
            count += 1
            if len(violations) < max_witnesses:
                violations.append(Violation(s.w, s.v, None, None, error))
            continue
        if rhs >= DENOMINATOR_FLOOR:
            max_ratio = max(max_ratio, lhs / rhs)
        denom = kind.functional(parts)
        if denom >= DENOMINATOR_FLOOR:
            estimate = max(estimate, lhs / denom)
        if lhs > rhs + VIOLATION_SLACK:
            count += 1
            if len(violations) < max_witnesses:
                violations.append(Violation(s.w, s.v, lhs, rhs))
    return CheckReport(
        samples_tested=len(samples),
        violations=violations,
        violation_count=count,
        max_ratio=max_ratio,
        estimated_constant=estimate,
        passed=count == 0,
    )


def replay(U: Operator, kind: ContractionKind, violation: Violation) -> bool:
    """Recompute a stored witness; True when it still violates the inequality."""
    w, v = as_hat(violation.w), as_hat(violation.v)
    if violation.error is not None:
        try:
            _evaluate_pair(U, w, v)
            kind.bound(bkf(U, w, v))
        except FixlabError:
            return True
        return False
    lhs = abs(U(w) - U(v))
    return lhs > rhs_bound(U, w, v, kind) + VIOLATION_SLACK


def estimate_constant(U: Operator, functional: Functional, cfg: SamplerConfig = SamplerConfig()) -> float:
    """Sup of ``d(U(w), U(v)) / functional(w, v)`` over samples above the floor; 0 if none."""
    best = 0.0
    for w, v in sample_pairs(U, cfg):
        lhs, parts = _evaluate_pair(U, w, v)
        denom = functional(parts)
        if denom >= DENOMINATOR_FLOOR:
            best = max(best, lhs / denom)
    return best


def kind_from_dict(d: dict) -> ContractionKind:
    """Build a kind from its JSON form (see :func:`kind_to_dict`)."""
    name = d["kind"]
    if name in ("banach", "kannan", "fisher"):
        return {"banach": BanachC, "kannan": KannanC, "fisher": FisherC}[name](d["c"])
    beta = GeraghtyFn(d["beta"]["family"], d["beta"]["param"], d["beta"].get("r", 0.5))
    if name == "gen-c":
        return GenC(MixWeights(*d["weights"]), beta)
    if name == "gen-h":
        return GenH(d["alpha"], beta)
    if name == "gen-l":
        f = d["f"]
        return GenL(FKind(f["name"], tuple(f["coeffs"]) if f.get("coeffs") else None), beta)
    raise InvalidInputError(f"unknown contraction kind {name!r}")


def kind_to_dict(kind: ContractionKind) -> dict:
    if isinstance(kind, (BanachC, KannanC, FisherC)):
        name = {BanachC: "banach", KannanC: "kannan", FisherC: "fisher"}[type(kind)]
        return {"kind": name, "c": kind.c}
    beta = {"family": kind.beta.family, "param": kind.beta.param, "r": kind.beta.r}
    if isinstance(kind, GenC):
        w = kind.weights
        return {"kind": "gen-c", "weights": [w.alpha, w.gamma, w.delta], "beta": beta}
    if isinstance(kind, GenH):
        return {"kind": "gen-h", "alpha": kind.alpha, "beta": beta}
    f = kind.fkind
    return {"kind": "gen-l", "f": {"name": f.name, "coeffs": list(f.coeffs) if f.coeffs else None},
            "beta": beta}

