import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeuclid import ExtendedAlgebra, ScalarContext, UnsupportedInput
from qeuclid.algebra import scale_check
from qeuclid.frame import tensors_for
from qeuclid.scalars import QScalar, classical_limit
from qeuclid.verify import check_space
from qeuclid.report import VerificationReport

ALGS = {N: ExtendedAlgebra(ScalarContext(N)) for N in (3, 4, 5, 6)}


def test_commutator_rule_n3(alg3):
    ctx = alg3.ctx
    lhs = alg3.x(1) * alg3.x(-1)
    rhs = alg3.x(-1) * alg3.x(1) + alg3.x(0, 2).scale(ctx.h)
    assert (lhs - rhs).is_zero()
    assert lhs.to_text() == "(q^(1/2) - q^(-1/2))*x(0)^2 + x(-1)*x(1)"


def test_dilatator_exchange(alg3):
    assert (alg3.x(0) * alg3.L() - (alg3.L() * alg3.x(0)).scale(alg3.ctx.q)).is_zero()


def test_k_exchange_even(alg4):
    q = alg4.ctx.q
    assert (alg4.K() * alg4.x(1) - (alg4.x(1) * alg4.K()).scale(q)).is_zero()
    assert (alg4.K() * alg4.x(-1) - (alg4.x(-1) * alg4.K()).scale(q.inverse())).is_zero()
    assert (alg4.K() * alg4.x(2) - alg4.x(2) * alg4.K()).is_zero()


def test_k_rejected_for_odd_n(alg3):
    with pytest.raises(UnsupportedInput):
        alg3.K()


def test_even_middle_pair_commutes(alg4):
    assert alg4.x(1).commutator(alg4.x(-1)).is_zero()
    assert alg4.x(1).commutator(alg4.x(1)).is_zero()


def test_lambda0_commutator_is_dilatator(alg3):
    ctx = alg3.ctx
    g0 = -(QScalar.s_pow(-1) * ctx.h.inverse())
    lam0 = (alg3.L() * alg3.x(0, -1)).scale(g0)
    assert (lam0.commutator(alg3.x(0)) - alg3.L()).is_zero()


def test_is_zero_examples(alg3):
    lower = tensors_for(alg3.ctx).g_lower
    r2 = alg3.zero
    for k in (-1, 0, 1):
        r2 = r2 + (alg3.x(k) * alg3.x(-k)).scale(lower.get(k, -k))
    assert (alg3.r(1, 2) - r2).is_zero()
    assert not (alg3.x(1) * alg3.x(-1) - alg3.x(-1) * alg3.x(1)).is_zero()
    assert (alg3.L() * alg3.L(-1) - alg3.one).is_zero()
    assert (alg3.r(1) * alg3.r(1, -1) - alg3.one).is_zero()


def test_even_r1_square(alg4):
    # r_1^2 = g_kl x^k x^l over |k|, |l| <= 1 = 2 x(-1) x(1)
    assert (alg4.r(1, 2) - alg4.x(-1) * alg4.x(1).scale(alg4.ctx.const(2))).is_zero()


def test_non_invertible_power_rejected(alg3):
    with pytest.raises(UnsupportedInput):
        alg3.x(1, -1)
    with pytest.raises(UnsupportedInput):
        alg3.r(2)


def test_scale_check(alg3, alg5):
    q = alg5.ctx.q
    got = scale_check(alg5.x(2), 1)
    assert (got - (alg5.r(1) * alg5.x(2)).scale(q.inverse())).is_zero()
    assert (scale_check(alg5.x(-2), 1) - (alg5.r(1) * alg5.x(-2)).scale(q)).is_zero()
    assert (scale_check(alg3.x(0), 1) - alg3.r(1) * alg3.x(0)).is_zero()
    with pytest.raises(UnsupportedInput):
        scale_check(alg3.x(0), 2)


@pytest.mark.parametrize("N", (3, 4, 5, 6))
def test_outer_radius_is_central(N):
    alg = ALGS[N]
    rn = alg.r(alg.n)
    for j in alg.indices:
        assert alg.x(j).commutator(rn).is_zero()
        assert alg.x(j).commutator(alg.r2_element(alg.n)).is_zero()


@pytest.mark.parametrize("N", (3, 4, 5, 6))
def test_space_checks(N):
    rep = check_space(ALGS[N], VerificationReport(), seed=N, triples=200)
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("N", (3, 4, 5))
def test_pa_relations_hold(N):
    alg = ALGS[N]
    Pa = tensors_for(alg.ctx).Pa
    for k, l in product(alg.indices, repeat=2):
        total = alg.zero
        for (i, j), v in Pa.transpose().rows.get((k, l), {}).items():
            total = total + (alg.x(i) * alg.x(j)).scale(v)
        assert total.is_zero(), (k, l)


@pytest.mark.parametrize("N", (3, 4))
def test_classical_commutativity(N):
    alg = ALGS[N]
    for i, j in product(alg.indices, repeat=2):
        for c in alg.x(i).commutator(alg.x(j)).terms.values():
            assert classical_limit(c) == 0


# ---------------------------------------------------------------------------
# brute-force oracle set for the zero test


def _relations(alg):
    """Elements that vanish in the algebra, written without normalization."""
    ctx = alg.ctx
    q = ctx.q
    rels = []
    T = tensors_for(ctx)
    for k, l in product(alg.indices, repeat=2):
        total = alg.zero
        for (i, j), v in T.Pa.transpose().rows.get((k, l), {}).items():
            total = total + (alg.x(i) * alg.x(j)).scale(v)
        rels.append(total)
    for i in range(1, alg.n + 1):
        rels.append(alg.r(i, 2) - alg.r2_element(i))
        for j in alg.indices:
            eps = 0 if abs(j) <= i else (1 if j < -i else -1)
            rels.append(alg.x(j) * alg.r(i) - (alg.r(i) * alg.x(j)).scale(ctx.q_pow(eps)))
    for j in alg.indices:
        rels.append(alg.x(j) * alg.L() - (alg.L() * alg.x(j)).scale(q))
    return rels


def _random_mono(alg, rng):
    x = {i: rng.randint(0, 2) for i in rng.sample(alg.indices, k=2)}
    r = {rng.randint(1, alg.n): rng.randint(-1, 1)}
    return alg.monomial(rng.choice([1, -2, 3]) * alg.ctx.one, alpha=rng.randint(-1, 1), r=r, x=x)


@pytest.mark.parametrize("N", (3, 4, 5))
def test_zero_test_is_sound_on_ideal_elements(N):
    alg = ALGS[N]
    rng = random.Random(100 + N)
    rels = _relations(alg)
    for _ in range(50):
        v, w = _random_mono(alg, rng), _random_mono(alg, rng)
        assert (v * rng.choice(rels) * w).is_zero()


@pytest.mark.parametrize("N", (3, 4, 5))
def test_zero_test_is_complete_on_monomial_sums(N):
    alg = ALGS[N]
    rng = random.Random(200 + N)
    for _ in range(50):
        keys = {}
        for _ in range(rng.randint(1, 4)):
            m = _random_mono(alg, rng)
            keys.update(m.terms)
        el = alg.element(keys)
        assert not el.is_zero()
        assert not (el * _random_mono(alg, rng)).is_zero()


@st.composite
def monomials(draw, alg):
    xs = draw(st.dictionaries(st.sampled_from(alg.indices), st.integers(0, 2), max_size=3))
    for i in list(xs):
        if i in alg.invertible and draw(st.booleans()):
            xs[i] = -xs[i]
    r = draw(st.dictionaries(st.integers(1, alg.n), st.integers(-1, 1), max_size=alg.n))
    beta = 0 if alg.ctx.odd else draw(st.integers(-1, 1))
    return alg.monomial(alpha=draw(st.integers(-1, 1)), beta=beta, r=r, x=xs)


@pytest.mark.parametrize("N", (3, 4, 5))
def test_associativity_property(N):
    alg = ALGS[N]

    @settings(max_examples=40, deadline=None)
    @given(monomials(alg), monomials(alg), monomials(alg))
    def check(u, v, w):
        assert ((u * v) * w - u * (v * w)).is_zero()

    check()


def test_text_of_monomial(alg4):
    m = alg4.monomial(alpha=2, beta=-1, r={1: -1}, x={-1: 2, 1: 1})
    assert m.to_text() == "L^2*K^-1*r(1)^-1*x(-1)^2*x(1)"
