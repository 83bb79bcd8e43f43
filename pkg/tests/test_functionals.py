import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fixlab.errors import InvalidInputError
from fixlab.functionals import (
    BANACH_WEIGHTS, FISHER_WEIGHTS, KANNAN_WEIGHTS, FKind, GeraghtyFn, MixWeights, Operator,
    banach_B, bkf, fisher_F, geraghty_eval, kannan_K, mix_L, mix_M, mix_Mprime,
)
from fixlab.metric import HatTuple, UNIT_INTERVAL

from conftest import unit_op

TENTH = unit_op("u/10")
W, V = [0.5], [0.0]


def test_operator_rejects_foreign_variables():
    with pytest.raises(InvalidInputError):
        Operator.from_source("x3 + u", 2)
    with pytest.raises(InvalidInputError):
        Operator.from_source("t", 1)
    assert Operator.from_source("x1 + x2 + u", 2)((1, 2)) == 5


def test_operator_arity_mismatch():
    with pytest.raises(InvalidInputError):
        TENTH((0.1, 0.2))


def test_banach_examples():
    assert banach_B([0.3], [0.3]) == 0
    assert banach_B([0.5], [0.0]) == 0.5
    assert banach_B([9, 9, 1], [9, 9, 0]) == 1
    with pytest.raises(InvalidInputError):
        banach_B([1, 2], [1])


def test_kannan_examples():
    assert kannan_K(unit_op("0"), [0.0], [0.0]) == 0
    assert kannan_K(unit_op("u/2"), [1.0], [0.0]) == 0.5
    assert kannan_K(TENTH, W, V) == pytest.approx(0.45, abs=1e-15)


def test_fisher_examples():
    assert fisher_F(TENTH, [0.0], [0.0]) == 0
    assert fisher_F(TENTH, W, V) == pytest.approx(0.55, abs=1e-15)
    assert fisher_F(unit_op("0"), [1.0], [1.0]) == 2


def test_mixture_examples():
    assert mix_Mprime(TENTH, [0.0], [0.0], MixWeights(0.5, 0.125, 0.125)) == 0
    assert mix_Mprime(TENTH, W, V, MixWeights(0.5, 0.125, 0.125)) == pytest.approx(0.5, abs=1e-15)
    assert mix_M(TENTH, W, V, 0.25) == pytest.approx(0.525, abs=1e-15)
    assert mix_L(TENTH, W, V, FKind("max")) == pytest.approx(0.55, abs=1e-15)
    assert mix_L(TENTH, W, V, FKind("min")) == pytest.approx(0.45, abs=1e-15)


def test_weight_and_coefficient_validation():
    with pytest.raises(InvalidInputError):
        MixWeights(0.5, 0.5, 0.5)
    with pytest.raises(InvalidInputError):
        MixWeights(1.2, -0.1, 0.0)
    MixWeights(1 / 3, 1 / 6, 1 / 6)
    with pytest.raises(InvalidInputError):
        FKind.f1(0.5, 0.5, 0.5)
    with pytest.raises(InvalidInputError):
        FKind("median")
    with pytest.raises(InvalidInputError):
        mix_M(TENTH, W, V, 1.5)


def test_geraghty_examples():
    assert geraghty_eval(GeraghtyFn.constant(0.375), 123.0) == 0.375
    at_zero = geraghty_eval(GeraghtyFn.exp_decay(1.0), 0.0)
    assert at_zero < 0.5 and at_zero == pytest.approx(0.5, rel=1e-11)
    assert geraghty_eval(GeraghtyFn.reciprocal_decay(1.0), 1.0) == 0.25
    with pytest.raises(InvalidInputError):
        geraghty_eval(GeraghtyFn.constant(0.1), -1.0)


@pytest.mark.parametrize("args", [("const", 0.5), ("const", -0.1), ("recip", 0.0),
                                  ("exp", -1.0), ("poly", 1.0), ("const", 0.1, 1.5)])
def test_geraghty_validation(args):
    with pytest.raises(InvalidInputError):
        GeraghtyFn(*args)


GRID = np.concatenate([[0.0], np.logspace(-12, 6, 400)])
betas = [GeraghtyFn.constant(0.0), GeraghtyFn.constant(0.49), GeraghtyFn.reciprocal_decay(0.01),
         GeraghtyFn.reciprocal_decay(100.0), GeraghtyFn.exp_decay(1e-3), GeraghtyFn.exp_decay(5.0),
         GeraghtyFn.exp_decay(1.0, r=1.0)]


@pytest.mark.parametrize("beta", betas, ids=repr)
def test_geraghty_stays_below_cap(beta):
    values = [geraghty_eval(beta, t) for t in GRID]
    assert all(0 <= b < beta.r for b in values)
    if beta.family != "const":
        assert all(b1 >= b2 for b1, b2 in zip(values, values[1:]))


# -- properties over random operators and tuples ---------------------------------

OPS = [unit_op("u/10"), unit_op("if u < 1 then u^2/30 else 1/60"), unit_op("1 - u"),
       unit_op("0.5*x1 + 0.25*x2 + 0.25*u", 3), unit_op("max(x1, u)/3", 3)]
FKINDS = [FKind("max"), FKind("min"), FKind.f1(0.2, 0.2, 0.2)]
unit = st.floats(0, 1)


@st.composite
def op_and_pair(draw):
    U = draw(st.sampled_from(OPS))
    w = draw(st.lists(unit, min_size=U.eta, max_size=U.eta))
    v = draw(st.lists(unit, min_size=U.eta, max_size=U.eta))
    return U, w, v


def all_functionals(U, w, v):
    b, k, f = bkf(U, w, v)
    return [b, k, f, mix_Mprime(U, w, v, MixWeights(0.5, 0.125, 0.125)), mix_M(U, w, v, 0.3)] + [
        mix_L(U, w, v, fk) for fk in FKINDS]


@given(op_and_pair())
def test_functionals_nonnegative_and_symmetric(case):
    U, w, v = case
    forward, backward = all_functionals(U, w, v), all_functionals(U, v, w)
    assert all(x >= 0 for x in forward)
    assert forward == pytest.approx(backward, abs=1e-15)


@given(op_and_pair())
def test_hat_tuples_and_heads_agree(case):
    U, w, v = case
    hw, hv = HatTuple(tuple(w), U.eta), HatTuple(tuple(v), U.eta)
    assert all_functionals(U, hw, hv) == all_functionals(U, w, v)


@given(op_and_pair())
def test_reduction_identities(case):
    U, w, v = case
    b, k, f = bkf(U, w, v)
    assert banach_B(w, v) == b and kannan_K(U, w, v) == k and fisher_F(U, w, v) == f
    assert mix_Mprime(U, w, v, BANACH_WEIGHTS) == b
    assert mix_Mprime(U, w, v, KANNAN_WEIGHTS) == k
    assert mix_Mprime(U, w, v, FISHER_WEIGHTS) == f
    assert mix_M(U, w, v, 1.0) == k
    assert mix_M(U, w, v, 0.0) == f
    assert mix_L(U, w, v, FKind.f1(1, 0, 0)) == b


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_decay_families_monotone(t1, t2):
    t1, t2 = sorted((t1, t2))
    for beta in betas[2:]:
        assert geraghty_eval(beta, t1) >= geraghty_eval(beta, t2)


def test_functionals_reject_mismatched_operator():
    with pytest.raises(InvalidInputError):
        bkf(TENTH, [0.1, 0.2], [0.3, 0.4])
    assert math.isclose(bkf(TENTH, W, V, images=(0.05, 0.0))[2], 0.55)
    assert UNIT_INTERVAL.admits(TENTH([1.0]))
