"""Named example operators on [0, 1] with the contraction each is known to satisfy.

Every entry is piecewise in the last coordinate ``u`` and can be built at any
arity ``eta``; only ``kannan-8eta`` changes its formula with ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .checker import ContractionKind, FisherC, GenC, GenH, KannanC
from .errors import InvalidInputError
from .functionals import GeraghtyFn, MixWeights, Operator
from .metric import UNIT_INTERVAL

SCALE_ALPHA = 0.25


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    template: Callable[[int], str]
    kind: ContractionKind
    description: str
    fixed_point: float = 0.0

    def source(self, eta: int = 1) -> str:
        return self.template(eta)

    def operator(self, eta: int = 1) -> Operator:
        return Operator.from_source(self.source(eta), eta, UNIT_INTERVAL)


CATALOG: dict[str, CatalogEntry] = {e.name: e for e in [
    CatalogEntry(
        "kannan-8eta",
        lambda eta: f"if u < 1 then u/{8 ** eta} else 1/{16 ** eta}",
        KannanC(0.2),
        "u/8^eta on [0,1), 1/16^eta at u=1; Kannan contraction",
    ),
    CatalogEntry(
        "scale-alpha",
        lambda eta: f"{SCALE_ALPHA}*u",
        FisherC(0.25),
        "alpha*u with alpha=1/4; Fisher contraction (sup ratio alpha/(1+alpha))",
    ),
    CatalogEntry(
        "h-20-18",
        lambda eta: "if u < 1 then u/20 else 1/18",
        GenH(0.25, GeraghtyFn.constant(0.25)),
        "u/20 on [0,1), 1/18 at u=1; generalized H contraction, alpha=1/4, beta=1/4",
    ),
    CatalogEntry(
        "c-30-60",
        lambda eta: "if u < 1 then u^2/30 else 1/60",
        GenC(MixWeights(0.5, 0.125, 0.125), GeraghtyFn.constant(0.375)),
        "u^2/30 on [0,1), 1/60 at u=1; generalized C contraction, weights (1/2,1/8,1/8), beta=3/8",
    ),
    CatalogEntry(
        "h-10-25",
        lambda eta: "if u < 1 then u/10 else 1/25",
        GenH(0.5, GeraghtyFn.constant(0.25)),
        "u/10 on [0,1), 1/25 at u=1; generalized H contraction, alpha=1/2, beta=1/4",
    ),
]}


def get(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown catalog operator {name!r}; choose from {sorted(CATALOG)}") from None
