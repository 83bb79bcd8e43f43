"""The example catalog run end to end: certification, Picard limits, Volterra oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .checker import Functional, KannanC, SamplerConfig, check_inequality, estimate_constant
from .functionals import Operator
from .metric import UNIT_INTERVAL, Interval
from .picard import picard_run, uniqueness_probe
from .volterra import Kernel, VolterraProblem, solve

LIMIT_TOL = 1e-8
KANNAN_SUP = 1.0 / 7.0
VOLTERRA_ERR = 5e-6


@dataclass
class DemoItem:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, **self.detail}


def random_seed_sets(eta: int, count: int, prng_seed: int) -> list[list[float]]:
    rng = np.random.default_rng(prng_seed)
    return [rng.uniform(0.0, 1.0, size=eta).tolist() for _ in range(count)]


def _catalog_items(entry, eta, cfg, seed_count):
    U = entry.operator(eta)
    label = f"{entry.name}[eta={eta}]"
    report = check_inequality(U, entry.kind, cfg)
    yield DemoItem(f"{label} check", report.passed, {
        "samples": report.samples_tested,
        "violations": report.violation_count,
        "estimated_constant": report.estimated_constant,
    })

    seeds = random_seed_sets(eta, seed_count, cfg.prng_seed) + [[1.0] * eta]
    probe = uniqueness_probe(U, seeds)
    runs = [picard_run(U, s) for s in seeds]
    near = all(x is not None and abs(x - entry.fixed_point) < LIMIT_TOL for x in probe.limits)
    monotone = all(r.monotone_decreasing for r in runs)
    yield DemoItem(f"{label} picard", probe.agree and near and monotone, {
        "runs": len(seeds),
        "max_pairwise_distance": probe.max_pairwise_distance,
        "max_iterations": max(r.iterations for r in runs),
        "monotone": monotone,
    })


def _volterra_items():
    unit = Interval(0.0, 1.0)
    p = VolterraProblem(Kernel.from_source("u+1"), 1.0, unit, 1000)
    r = solve(p, tol=1e-12)
    err = float(np.max(np.abs(r.solution.values - np.expm1(r.solution.nodes))))
    yield DemoItem("volterra u+1 vs e^x-1", r.converged and err <= VOLTERRA_ERR,
                   {"max_error": err, "iterations": r.iterations})
    for src, lam in (("0", 1.0), ("u", 2.0)):
        r = solve(VolterraProblem(Kernel.from_source(src), lam, unit, 200), tol=1e-12)
        sup = float(np.max(np.abs(r.solution.values)))
        yield DemoItem(f"volterra kernel {src!r} lambda={lam:g} is zero",
                       r.converged and sup <= 1e-10, {"sup_norm": sup, "iterations": r.iterations})


def run_demo(sample_count: int = 10_000, prng_seed: int = 0, seed_count: int = 10) -> list[DemoItem]:
    cfg = SamplerConfig(sample_count, prng_seed)
    items: list[DemoItem] = []
    for entry in catalog.CATALOG.values():
        for eta in (1, 3):
            items.extend(_catalog_items(entry, eta, cfg, seed_count))

    kannan = catalog.get("kannan-8eta").operator(1)
    c = estimate_constant(kannan, Functional("K"), cfg)
    items.append(DemoItem("kannan-8eta[eta=1] constant <= 1/7", c <= KANNAN_SUP + 1e-6,
                          {"estimate": c}))

    identity = Operator.from_source("u", 1, UNIT_INTERVAL)
    neg = check_inequality(identity, KannanC(0.49), cfg)
    items.append(DemoItem("identity is not Kannan(0.49)", not neg.passed,
                          {"violations": neg.violation_count}))

    items.extend(_volterra_items())
    return items


def format_table(items: list[DemoItem]) -> str:
    width = max(len(i.name) for i in items)
    lines = []
    for item in items:
        status = "PASS" if item.passed else "FAIL"
        extras = ", ".join(f"{k}={_fmt(v)}" for k, v in item.detail.items())
        lines.append(f"{item.name:<{width}}  {status}  {extras}")
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float) and math.isfinite(v):
        return f"{v:.6g}"
    return str(v)
