import csv

import pytest
from hypothesis import given, settings, strategies as st

from fixlab.errors import DivergenceError, InvalidInputError
from fixlab.functionals import Operator
from fixlab.picard import (
    fixed_point_residual, is_strictly_decreasing, picard_run, picard_step, uniqueness_probe,
    write_trace,
)

from conftest import unit_op

C30 = unit_op("if u < 1 then u^2/30 else 1/60")
H25 = unit_op("if u < 1 then u/10 else 1/25")


def test_picard_step_examples():
    assert picard_step(unit_op("0.3"), [0.9]) == 0.3
    assert picard_step(C30, [1.0]) == pytest.approx(1 / 60)
    assert picard_step(unit_op("0.4*u", 2), [0.2, 0.5]) == pytest.approx(0.2)
    with pytest.raises(InvalidInputError):
        picard_step(C30, [0.1, 0.2])


def test_run_c30_from_one():
    r = picard_run(C30, [1.0], tol=1e-10)
    assert r.converged and abs(r.fixed_point) < 1e-8


def test_run_geometric_closed_form():
    r = picard_run(unit_op("0.4*u"), [1.0], tol=1e-12)
    assert r.converged and abs(r.fixed_point) < 1e-12
    for n, x in enumerate(r.iterates, start=1):
        assert x == pytest.approx(0.4 ** n, rel=1e-12)


def test_run_constant_map():
    r = picard_run(unit_op("0.7"), [0.0])
    assert r.converged and r.fixed_point == 0.7 and r.iterations <= 2


def test_residual_examples():
    assert fixed_point_residual(unit_op("u/10"), 0.0) == 0
    assert fixed_point_residual(unit_op("u/10"), 1.0) == pytest.approx(0.9)
    assert fixed_point_residual(unit_op("0.3"), 0.3) == 0


def test_uniqueness_probe_examples():
    p = uniqueness_probe(H25, [[0.1], [0.9], [1.0]])
    assert p.agree and all(abs(x) < 1e-8 for x in p.limits)
    p = uniqueness_probe(unit_op("u"), [[0.2], [0.8]])
    assert not p.agree and p.limits == [0.2, 0.8]
    p = uniqueness_probe(unit_op("0.4*u + 0.3"), [[0.0], [1.0]])
    assert p.agree and p.limits == pytest.approx([0.5, 0.5], abs=1e-9)


def test_probe_records_divergence_per_seed():
    U = Operator.from_source("2*u + 1e300", 1)
    p = uniqueness_probe(U, [[0.0], [1.0]], max_iter=100)
    assert not p.agree and p.errors[0] is not None and p.limits == [None, None]


def test_non_convergence_and_divergence():
    r = picard_run(Operator.from_source("u+1", 1), [0.0], max_iter=50)
    assert not r.converged and r.iterations == 50 and r.fixed_point == 50
    with pytest.raises(DivergenceError):
        picard_run(Operator.from_source("u*u + 2", 1), [2.0], max_iter=100)


def test_bad_arguments():
    with pytest.raises(InvalidInputError):
        picard_run(C30, [0.1, 0.2])
    with pytest.raises(InvalidInputError):
        picard_run(C30, [0.1], tol=0)
    with pytest.raises(InvalidInputError):
        uniqueness_probe(C30, [[0.1]])


def test_default_seed_is_midpoint():
    r = picard_run(unit_op("u"))
    assert r.fixed_point == 0.5
    assert picard_run(Operator.from_source("u", 1)).fixed_point == 0.0


def test_strict_decrease_helper():
    assert is_strictly_decreasing([3, 2, 1, 0, 0])
    assert not is_strictly_decreasing([3, 3, 1])
    assert is_strictly_decreasing([1e-15, 1e-15])


def test_trace_csv(tmp_path):
    r = picard_run(unit_op("0.5*u"), [1.0], tol=1e-3)
    path = tmp_path / "trace.csv"
    write_trace(r, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iteration", "value", "step_distance"]
    assert len(rows) == r.iterations + 1
    assert float(rows[1][1]) == 0.5 and float(rows[1][2]) == 0.5


seed_lists = st.lists(st.floats(0, 1), min_size=3, max_size=3)


@given(seed_lists)
@settings(max_examples=50, deadline=None)
def test_converged_runs_have_small_residual_and_are_deterministic(seeds):
    U = unit_op("if u < 1 then u/512 else 1/4096", 3)
    a, b = picard_run(U, seeds), picard_run(U, seeds)
    assert a.to_dict() == b.to_dict()
    assert a.converged and a.residual <= 1e-10 and a.step_distances[-1] <= 1e-10
    assert len(a.step_distances) == a.iterations
    assert a.monotone_decreasing
