import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeuclid import ExtendedAlgebra, ScalarContext
from qeuclid.expr import (
    BinOp,
    Comm,
    ExprError,
    ExprIndexError,
    ExprSyntaxError,
    Gen,
    normalize,
    parse_expr,
)
from qeuclid.forms import OneForm, dirac_theta
from qeuclid.frame import build_frame
from qeuclid.scalars import QScalar

ALGS = {N: ExtendedAlgebra(ScalarContext(N)) for N in (3, 4, 5)}


def test_commutator_rule_normal_form():
    alg = ALGS[3]
    v = normalize("q*x(1)*x(-1) - x(-1)*x(1)", alg)
    ctx = alg.ctx
    want = (alg.x(-1) * alg.x(1)).scale(ctx.q - ctx.one) + alg.x(0, 2).scale(ctx.q * ctx.h)
    assert (v - want).is_zero()
    assert v.to_text() == "(q^(3/2) - q^(1/2))*x(0)^2 + (q - 1)*x(-1)*x(1)"


def test_examples():
    alg = ALGS[3]
    assert normalize("L*L^-1 - 1", alg).is_zero()
    assert normalize("[x(1), x(1)]", alg).is_zero()
    assert normalize("i*h/k", alg).to_text() == "(i*q^(1/2)/(q + 1))"
    assert normalize("x(1)/2", alg).to_text() == "(1/2)*x(1)"
    assert normalize("-(x(0))^2 + x(0)*x(0)", alg).is_zero()
    assert normalize("q^(-3/2)*q^(3/2) - 1", alg).is_zero()


def test_ast_shapes():
    node = parse_expr("[x(1), L]*K", 4)
    assert isinstance(node, BinOp) and node.op == "*"
    assert isinstance(node.left, Comm)
    assert parse_expr("xi(-2)", 5) == Gen(name="xi", index=-2, pos=0)


@pytest.mark.parametrize("text,N,kind,pos", [
    ("x(0)^-1", 4, ExprIndexError, 0),
    ("x(1)^-1", 3, ExprIndexError, 4),
    ("x(5)", 3, ExprIndexError, 0),
    ("1 +", 3, ExprSyntaxError, 3),
    ("x(1", 3, ExprSyntaxError, 3),
    ("2*/3", 3, ExprSyntaxError, 2),
    ("x(1) $", 3, ExprSyntaxError, 5),
])
def test_parse_errors(text, N, kind, pos):
    with pytest.raises(kind) as info:
        parse_expr(text, N)
    assert info.value.pos == pos


@pytest.mark.parametrize("text", ["xi(1)*xi(1)", "xi(1)+x(1)", "x(1)/xi(1)", "x(1)/x(2)", "3/0"])
def test_evaluation_errors(text):
    with pytest.raises(ExprError):
        normalize(text, ALGS[4])


def test_form_expressions():
    alg = ALGS[4]
    v = normalize("[xi(1), x(2)]", alg)
    assert isinstance(v, OneForm)
    assert v.to_text() == "((-1 + q^-1)*x(2))*xi(1)"
    assert isinstance(normalize("x(1)*xibar(2)", alg), OneForm)


@pytest.mark.parametrize("N", (3, 4, 5))
@pytest.mark.parametrize("tag", ("plain", "barred"))
def test_frame_texts_round_trip(N, tag):
    alg = ALGS[N]
    fd = build_frame(alg, tag)
    for el in list(fd.lambdas.values()) + list(fd.e.values())[:10]:
        back = normalize(el.to_text(), alg)
        assert (back - el).is_zero()
        assert back.to_text() == el.to_text()
    theta = dirac_theta(alg, tag)
    back = normalize(theta.to_text(), alg)
    assert back == theta
    assert back.to_text() == theta.to_text()


# ---------------------------------------------------------------------------
# parse o print is the identity on printed forms


def random_scalar(rng):
    re = {rng.randint(-3, 3): Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(rng.randint(1, 2))}
    im = {rng.randint(-3, 3): rng.randint(-2, 2)} if rng.random() < 0.3 else None
    den = {0: 1, rng.randint(1, 2): rng.choice([-1, 2])} if rng.random() < 0.3 else None
    return QScalar.from_laurent(re, im, den)


def random_element(alg, rng):
    total = alg.zero
    for _ in range(rng.randint(1, 3)):
        x = {i: rng.randint(0, 2) for i in rng.sample(alg.indices, k=2)}
        for i in list(x):
            if i in alg.invertible and rng.random() < 0.3:
                x[i] = -x[i]
        r = {rng.randint(1, alg.n): rng.randint(-2, 2)}
        beta = 0 if alg.ctx.odd else rng.randint(-1, 1)
        total = total + alg.monomial(random_scalar(rng), alpha=rng.randint(-2, 2), beta=beta, r=r, x=x)
    return total


@pytest.mark.parametrize("N", (3, 4, 5))
def test_round_trip_random_elements(N):
    alg = ALGS[N]
    rng = random.Random(N)
    for _ in range(200):
        el = random_element(alg, rng)
        text = el.to_text()
        back = normalize(text, alg)
        assert back.to_text() == text
        assert (back - el).is_zero()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_round_trip_property(seed):
    rng = random.Random(seed)
    alg = ALGS[rng.choice((3, 4, 5))]
    el = random_element(alg, rng)
    assert normalize(el.to_text(), alg).to_text() == el.to_text()
