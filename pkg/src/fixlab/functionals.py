"""Contraction functionals on pairs of eta-tuples.

For an operator ``U`` of arity ``eta`` and tuples ``w``, ``v``:

* ``B = d(w_eta, v_eta)``
* ``K = d(U(w), w_eta) + d(U(v), v_eta)``  (Kannan)
* ``F = d(U(w), v_eta) + d(U(v), w_eta)``  (Fisher)

and the mixtures ``M' = alpha*B + 2*gamma*K + 2*delta*F``,
``M = alpha*K + (1 - alpha)*F`` and ``L = f(B, K, F)`` for ``f`` in the
F1/max/min family. Every functional reads only ``U`` and the last
coordinate of each tuple, so evaluating on a :class:`HatTuple` or on its
finite head gives the same number.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from . import expr as ex
from .errors import InvalidInputError
from .metric import REAL_LINE, HatTuple, SpaceDescriptor, as_hat, as_scalar

WEIGHT_TOL = 1e-12
GERAGHTY_CLAMP = 1e-12

_COORD_RE = re.compile(r"x([1-9][0-9]*)$")


@dataclass(frozen=True)
class Operator:
    """Pure map from eta-tuples to scalars defined by an expression.

    Variables are ``x1 .. x{eta}``; ``u`` aliases ``x{eta}``.
    """

    eta: int
    body: ex.Expr
    space: SpaceDescriptor = REAL_LINE
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if isinstance(self.eta, bool) or not isinstance(self.eta, int) or self.eta < 1:
            raise InvalidInputError(f"eta must be a positive integer, got {self.eta!r}")
        allowed = {f"x{i}" for i in range(1, self.eta + 1)} | {"u"}
        extra = ex.free_vars(self.body) - allowed
        if extra:
            raise InvalidInputError(
                f"operator of arity {self.eta} uses unknown variables {sorted(extra)}")
        if not self.source:
            object.__setattr__(self, "source", ex.to_source(self.body))

    @classmethod
    def from_source(cls, source: str, eta: int = 1, space: SpaceDescriptor = REAL_LINE):
        return cls(eta, ex.compile_expr(source), space, source)

    def env(self, head: Sequence[float]) -> dict[str, float]:
        env = {f"x{i}": x for i, x in enumerate(head, start=1)}
        env["u"] = head[-1]
        return env

    def __call__(self, t: HatTuple | Sequence[float]) -> float:
        t = as_hat(t)
        if t.eta != self.eta:
            raise InvalidInputError(f"operator arity {self.eta} applied to tuple of arity {t.eta}")
        return ex.evaluate(self.body, self.env(t.head))

    def branch_points(self) -> list[float]:
        return ex.branch_points(self.body, "u") + ex.branch_points(self.body, f"x{self.eta}")


@dataclass(frozen=True)
class MixWeights:
    alpha: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "gamma", "delta"):
            value = as_scalar(getattr(self, name), name)
            if value < 0:
                raise InvalidInputError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, value)
        total = self.alpha + 2 * self.gamma + 2 * self.delta
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidInputError(f"alpha + 2*gamma + 2*delta must equal 1, got {total!r}")


BANACH_WEIGHTS = MixWeights(1.0, 0.0, 0.0)
KANNAN_WEIGHTS = MixWeights(0.0, 0.5, 0.0)
FISHER_WEIGHTS = MixWeights(0.0, 0.0, 0.5)


@dataclass(frozen=True)
class GeraghtyFn:
    """Modulus ``beta: [0, inf) -> [0, r)`` from a closed family.

    ``const``: ``beta(t) = c`` with ``0 <= c < r``;
    ``recip``: ``beta(t) = r / (1 + k t)``; ``exp``: ``beta(t) = r exp(-k t)``,
    both with ``k > 0``. The decay families hit ``r`` at ``t = 0`` and are
    clamped to ``r (1 - 1e-12)`` so the bound stays strict.
    """

    family: str
    param: float
    r: float = 0.5

    def __post_init__(self):
        r = as_scalar(self.r, "r")
        p = as_scalar(self.param, "param")
        if not 0 < r <= 1:
            raise InvalidInputError(f"cap r must lie in (0, 1], got {r}")
        if self.family == "const":
            if not 0 <= p < r:
                raise InvalidInputError(f"constant beta must lie in [0, {r}), got {p}")
        elif self.family in ("recip", "exp"):
            if not p > 0:
                raise InvalidInputError(f"decay rate k must be positive, got {p}")
        else:
            raise InvalidInputError(f"unknown Geraghty family {self.family!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "param", p)

    @classmethod
    def constant(cls, c, r=0.5):
        return cls("const", c, r)

    @classmethod
    def reciprocal_decay(cls, k, r=0.5):
        return cls("recip", k, r)

    @classmethod
    def exp_decay(cls, k, r=0.5):
        return cls("exp", k, r)

    def __call__(self, t) -> float:
        return geraghty_eval(self, t)


def geraghty_eval(beta: GeraghtyFn, t) -> float:
    t = as_scalar(t, "t")
    if t < 0:
        raise InvalidInputError(f"Geraghty functions are defined on [0, inf), got t={t}")
    if beta.family == "const":
        return beta.param
    if beta.family == "recip":
        value = beta.r / (1.0 + beta.param * t)
    else:
        value = beta.r * math.exp(-beta.param * t)
    return min(value, beta.r * (1.0 - GERAGHTY_CLAMP))


@dataclass(frozen=True)
class FKind:
    """Combiner ``f(B, K, F)``: ``f1`` = c1*B + 2*c2*K + 2*c3*F, ``max`` or ``min``."""

    name: str
    coeffs: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.name == "f1":
            if self.coeffs is None or len(self.coeffs) != 3:
                raise InvalidInputError("f1 needs three coefficients (c1, c2, c3)")
            c = tuple(as_scalar(x, "coefficient") for x in self.coeffs)
            if min(c) < 0:
                raise InvalidInputError(f"f1 coefficients must be nonnegative, got {c}")
            total = c[0] + 2 * c[1] + 2 * c[2]
            if abs(total - 1.0) > WEIGHT_TOL:
                raise InvalidInputError(f"c1 + 2*c2 + 2*c3 must equal 1, got {total!r}")
            object.__setattr__(self, "coeffs", c)
        elif self.name in ("max", "min"):
            object.__setattr__(self, "coeffs", None)
        else:
            raise InvalidInputError(f"unknown f kind {self.name!r}")

    @classmethod
    def f1(cls, c1, c2, c3):
        return cls("f1", (c1, c2, c3))

    def combine(self, b: float, k: float, f: float) -> float:
        if self.name == "f1":
            c1, c2, c3 = self.coeffs
            return c1 * b + 2 * c2 * k + 2 * c3 * f
        if self.name == "max":
            return max(b, k, f)
        return min(b, k, f)


def _pair(U: Operator | None, w, v) -> tuple[HatTuple, HatTuple]:
    w, v = as_hat(w), as_hat(v)
    if w.eta != v.eta:
        raise InvalidInputError(f"tuple arities differ: {w.eta} vs {v.eta}")
    if U is not None and U.eta != w.eta:
        raise InvalidInputError(f"operator arity {U.eta} does not match tuple arity {w.eta}")
    return w, v


def bkf(U: Operator, w, v, images: tuple[float, float] | None = None):
    """Return ``(B, K, F)`` evaluating ``U`` once per tuple.

    ``images`` may carry precomputed ``(U(w), U(v))``.
    """
    w, v = _pair(U, w, v)
    uw, uv = images if images is not None else (U(w), U(v))
    b = abs(w.last - v.last)
    k = abs(uw - w.last) + abs(uv - v.last)
    f = abs(uw - v.last) + abs(uv - w.last)
    return b, k, f


def banach_B(w, v) -> float:
    w, v = _pair(None, w, v)
    return abs(w.last - v.last)


def kannan_K(U: Operator, w, v) -> float:
    return bkf(U, w, v)[1]


def fisher_F(U: Operator, w, v) -> float:
    return bkf(U, w, v)[2]


def mprime_from(parts, weights: MixWeights) -> float:
    b, k, f = parts
    return weights.alpha * b + 2 * weights.gamma * k + 2 * weights.delta * f


def m_from(parts, alpha: float) -> float:
    _, k, f = parts
    return alpha * k + (1 - alpha) * f


def check_mix_alpha(alpha) -> float:
    alpha = as_scalar(alpha, "alpha")
    if not 0 <= alpha <= 1:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def mix_Mprime(U: Operator, w, v, weights: MixWeights) -> float:
    if not isinstance(weights, MixWeights):
        weights = MixWeights(*weights)
    return mprime_from(bkf(U, w, v), weights)


def mix_M(U: Operator, w, v, alpha) -> float:
    return m_from(bkf(U, w, v), check_mix_alpha(alpha))


def mix_L(U: Operator, w, v, fkind: FKind) -> float:
    return fkind.combine(*bkf(U, w, v))
