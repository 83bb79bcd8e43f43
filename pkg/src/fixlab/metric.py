"""Scalar metric space, intervals and hat-tuples.

A hat-tuple stands for the infinite tuple ``(x1, ..., x_eta, x_eta, x_eta, ...)``
whose coordinates past ``eta`` all repeat the last one. Only the finite head is
stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidInputError


def as_scalar(x, name="value") -> float:
    try:
        value = float(x)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not a real number: {x!r}") from exc
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a = as_scalar(self.a, "a")
        b = as_scalar(self.b, "b")
        if not a < b:
            raise InvalidInputError(f"interval needs a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b


@dataclass(frozen=True)
class SpaceDescriptor:
    """Ambient set: the closed interval ``bounds`` or the whole real line."""

    bounds: Interval | None = None

    def admits(self, x: float) -> bool:
        if not math.isfinite(x):
            return False
        return self.bounds is None or self.bounds.contains(x)

    def default_point(self) -> float:
        return 0.0 if self.bounds is None else self.bounds.midpoint


REAL_LINE = SpaceDescriptor()
UNIT_INTERVAL = SpaceDescriptor(Interval(0.0, 1.0))


@dataclass(frozen=True)
class HatTuple:
    head: tuple[float, ...]
    eta: int

    def __post_init__(self):
        head = tuple(as_scalar(x, "tuple entry") for x in self.head)
        if self.eta < 1:
            raise InvalidInputError(f"eta must be >= 1, got {self.eta}")
        if len(head) != self.eta:
            raise InvalidInputError(
                f"head length {len(head)} does not match eta={self.eta}")
        object.__setattr__(self, "head", head)

    @property
    def last(self) -> float:
        """The repeated eta-th coordinate."""
        return self.head[-1]

    def __getitem__(self, i: int) -> float:
        return hat_project(self, i)


def distance(x, y) -> float:
    """Absolute-value metric on the reals."""
    return abs(as_scalar(x, "x") - as_scalar(y, "y"))


def hat_embed(head: Iterable[float]) -> HatTuple:
    head = tuple(head)
    if not head:
        raise InvalidInputError("cannot embed an empty tuple")
    return HatTuple(head, len(head))


def hat_project(t: HatTuple, i: int) -> float:
    """1-based coordinate ``i`` of the infinite tuple represented by ``t``."""
    if isinstance(i, bool) or not isinstance(i, int) or i < 1:
        raise InvalidInputError(f"coordinate index must be a positive integer, got {i!r}")
    return t.head[min(i, t.eta) - 1]


def as_hat(t: HatTuple | Sequence[float]) -> HatTuple:
    if isinstance(t, HatTuple):
        return t
    return hat_embed(t)
