from fractions import Fraction

import pytest

from qeuclid import ExtendedAlgebra, ScalarContext, UnsupportedInput
from qeuclid.forms import dirac_theta
from qeuclid.frame import (
    build_frame,
    build_gammas,
    build_lambdas,
    e_matrix,
    verify_frame,
    verify_glue,
    verify_lambda_equation,
    verify_theorem2,
)

TAGS = ("plain", "barred")
ALGS = {N: ExtendedAlgebra(ScalarContext(N)) for N in (3, 4, 5, 6)}


def expected_products(ctx, tag):
    """Closed forms of gamma_a gamma_-a (gamma_0^2 for a = 0)."""
    s = 1 if tag == "plain" else -1
    h, k = ctx.h, ctx.k
    out = {}
    if ctx.odd:
        g0 = -ctx.q_pow(Fraction(-1, 2)) / h if tag == "plain" else ctx.q_pow(Fraction(1, 2)) / h
        out[0] = g0 * g0
        out[1] = -ctx.q_pow(-s) / (h * h)
    else:
        out[1] = (k * k).inverse()
    for a in range(2, ctx.n + 1):
        out[a] = -ctx.q_pow(-s) * ctx.omega[a] * ctx.omega[a - 1] * (k * k).inverse()
    return out


@pytest.mark.parametrize("N", (3, 4, 5, 6))
@pytest.mark.parametrize("tag", TAGS)
def test_gamma_products(N, tag):
    alg = ALGS[N]
    g = build_gammas(alg, tag)
    for a, want in expected_products(alg.ctx, tag).items():
        assert (g.product(a) - alg.scalar(want)).is_zero(), a
    for a in range(1, alg.n + 1):
        assert (g.values[a] - g.values[-a].scale(alg.ctx.q)).is_zero()


def test_gamma0_n3(alg3):
    ctx = alg3.ctx
    g0 = build_gammas(alg3, "plain").values[0]
    assert (g0 - alg3.scalar(-ctx.q_pow(Fraction(-1, 2)) * ctx.h.inverse())).is_zero()


def test_lambda_shapes(alg3, alg4):
    g = build_gammas(alg3, "plain")
    lam = build_lambdas(alg3, "plain", g)
    assert (lam[0] - (g.values[0] * alg3.L() * alg3.x(0, -1))).is_zero()
    gb = build_gammas(alg3, "barred")
    lamb = build_lambdas(alg3, "barred", gb)
    assert (lamb[0] - (gb.values[0] * alg3.L(-1) * alg3.x(0, -1))).is_zero()
    g4 = build_gammas(alg4, "plain")
    lam4 = build_lambdas(alg4, "plain", g4)
    assert (lam4[1] - g4.values[1] * alg4.L() * alg4.x(1, -1) * alg4.K(-1)).is_zero()
    assert (lam4[2] - g4.values[2] * alg4.L() * alg4.r(2, -1) * alg4.r(1, -1) * alg4.x(-2)).is_zero()


def test_e00_is_dilatator():
    for N in (3, 5):
        alg = ALGS[N]
        fd = build_frame(alg, "plain")
        assert (fd.e[(0, 0)] - alg.L()).is_zero()
        fdb = build_frame(alg, "barred")
        assert (fdb.e[(0, 0)] * fdb.e[(0, 0)] - alg.L(-2)).is_zero()


@pytest.mark.parametrize("N", (3, 4, 5, 6))
@pytest.mark.parametrize("tag", TAGS)
def test_lambda_equation(N, tag):
    alg = ALGS[N]
    fd = build_frame(alg, tag)
    rep = verify_lambda_equation(alg, tag, fd.lambdas, e=fd.e)
    assert len(rep) == N
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("N", (3, 4, 5, 6))
@pytest.mark.parametrize("tag", TAGS)
def test_algebra_relations(N, tag):
    alg = ALGS[N]
    fd = build_frame(alg, tag)
    rep = verify_theorem2(alg, tag, fd.lambdas, fd.e)
    ids = {r.check_id.split(".")[1] for r in rep}
    assert {"lambdalambda", "rtt", "gtt"} <= ids
    if N % 2:
        assert {"normalization", "e00"} <= ids
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("N", (3, 4))
@pytest.mark.parametrize("tag", TAGS)
def test_opposite_sign_branch(N, tag):
    alg = ALGS[N]
    branch = (-1,) * alg.n
    g = build_gammas(alg, tag, branch=branch)
    lam = build_lambdas(alg, tag, g)
    e = e_matrix(alg, lam)
    assert verify_lambda_equation(alg, tag, lam, e=e).passed
    assert verify_theorem2(alg, tag, lam, e).passed


def test_wrong_dilatator_power_fails(alg3):
    g = build_gammas(alg3, "plain")
    lam = build_lambdas(alg3, "plain", g, dilatator_power=2)
    assert not verify_lambda_equation(alg3, "plain", lam).passed
    lam = build_lambdas(alg3, "plain", g, dilatator_power=-1)
    assert not verify_lambda_equation(alg3, "plain", lam).passed


def test_single_sign_flip_fails(alg3):
    g = build_gammas(alg3, "plain")
    g.values[1] = -g.values[1]
    lam = build_lambdas(alg3, "plain", g)
    assert not verify_theorem2(alg3, "plain", lam).passed


def test_k_equal_h_breaks_n5():
    alg = ExtendedAlgebra(ScalarContext(5, k_convention="h"))
    fd = build_frame(alg, "plain")
    rep = verify_theorem2(alg, "plain", fd.lambdas, fd.e)
    failed = {r.check_id for r in rep.failures()}
    assert any(".gtt." in c for c in failed)
    assert all(r.residual for r in rep.failures())


@pytest.mark.parametrize("N", (3, 5))
def test_glue_odd(N):
    rep = verify_glue(ALGS[N])
    assert {r.check_id for r in rep} == {f"thm5.diagonal.N{N}", f"thm5.rtt_mixed.N{N}"}
    assert rep.passed, rep.failures()


def test_glue_gammas(alg3):
    ctx = alg3.ctx
    g = build_gammas(alg3, "plain", "theorem5")
    gb = build_gammas(alg3, "barred", "theorem5")
    want = alg3.scalar(-ctx.q_pow(-2) * (ctx.h * ctx.h).inverse())
    assert (g.values[1] * g.values[1] - want).is_zero()
    for a in (-1, 1):
        assert (gb.values[a] - g.values[a].scale(-ctx.q)).is_zero()


def test_glue_literal_ratio_fails(alg3):
    # gamma_a = q gamma_-a (instead of gamma_-a = q gamma_a) breaks e ebar = 1
    ctx = alg3.ctx
    es = {}
    for tag in TAGS:
        g = build_gammas(alg3, tag, "theorem5")
        g.values[-1] = g.values[1].scale(ctx.q.inverse())
        es[tag] = e_matrix(alg3, build_lambdas(alg3, tag, g))
    bad = [i for i in alg3.indices
           if not (es["plain"][(i, i)] * es["barred"][(i, i)] - alg3.one).is_zero()]
    assert bad


@pytest.mark.parametrize("N", (4, 6))
def test_glue_even_rejected(N):
    alg = ALGS[N]
    with pytest.raises(UnsupportedInput):
        build_gammas(alg, "plain", "theorem5")
    rep = verify_glue(alg)
    res = rep[f"thm5.glue.N{N}"]
    assert not res.passed
    assert "even N" in res.residual
    assert res.note == "rejected before computation"


@pytest.mark.parametrize("N", (3, 4))
@pytest.mark.parametrize("tag", TAGS)
def test_frame_identities(N, tag):
    fd = build_frame(ALGS[N], tag)
    rep = verify_frame(fd)
    names = {r.check_id.split(".N")[0] for r in rep}
    for want in ("frame.commute_x", "frame.commute_L", "frame.duality.e_theta",
                 "frame.duality.theta_e", "frame.dirac_matches", "frame.rtt_theta",
                 "frame.wedge_pst", "frame.d_from_frame"):
        assert want in names
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("tag", TAGS)
def test_frame_dirac_equals_closed_form(alg3, tag):
    fd = build_frame(alg3, tag)
    assert fd.dirac == dirac_theta(alg3, tag)


def test_frame_commutes_with_coordinates(alg3):
    fd = build_frame(alg3, "plain")
    for a, th in fd.frame.items():
        for i in alg3.indices:
            u = alg3.x(i)
            assert (th.left_mul(u) - th.right_mul(u)).is_zero(), (a, i)
