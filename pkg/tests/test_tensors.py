from fractions import Fraction
from itertools import product

import pytest

from qeuclid.report import VerificationReport
from qeuclid.scalars import GaussRational, QScalar, ScalarContext, evaluate
from qeuclid.tensors import (
    SparseTensor4,
    build_metric,
    build_rhat,
    check_braid,
    check_gtt,
    check_projectors,
    classical_ranks,
    projector,
    projector_trace,
    rhat_at_one_is_flip,
    rhat_inverse,
    solve_inverse,
)

NS = (3, 4, 5, 6)


def dense(ctx, t, s):
    """Oracle: the tensor as a dense matrix of Fractions at s."""
    pairs = [(i, j) for i in ctx.indices for j in ctx.indices]
    rows = []
    for a in pairs:
        row = []
        for b in pairs:
            v = t.get(*a, *b)
            if v is None:
                row.append(Fraction(0))
            else:
                g = evaluate(v, s)
                assert g.im == 0
                row.append(Fraction(int(g.re.p), int(g.re.q)))
        rows.append(row)
    return rows


def matmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n) if A[i][k]) for j in range(n)] for i in range(n)]


def shifted(A, lam):
    return [[A[i][j] - (lam if i == j else 0) for j in range(len(A))] for i in range(len(A))]


def test_metric_n3():
    lower, upper = build_metric(ScalarContext(3))
    assert len(lower) == 3
    assert lower.get(-1, 1) == QScalar.s_pow(-1)
    assert lower.get(0, 0) == QScalar.const(1)
    assert lower.get(1, -1) == QScalar.s_pow(1)


def test_metric_n4():
    # g_ij = q^(-rho_i) delta_{i,-j} with rho = (1, 0, 0, -1)
    lower, _ = build_metric(ScalarContext(4))
    assert lower.get(-2, 2) == QScalar.s_pow(-2)
    assert lower.get(-1, 1) == lower.get(1, -1) == QScalar.const(1)
    assert lower.get(2, -2) == QScalar.s_pow(2)


@pytest.mark.parametrize("N", NS)
def test_metric_inverse_and_classical_limit(N):
    ctx = ScalarContext(N)
    lower, upper = build_metric(ctx)
    for i, j in product(ctx.indices, repeat=2):
        total = sum((lower.get(i, l, ctx.zero) * upper.get(l, j, ctx.zero) for l in ctx.indices),
                    ctx.zero)
        assert total == (ctx.one if i == j else ctx.zero)
        v = lower.get(i, j)
        assert (evaluate(v, 1) if v is not None else 0) == (1 if i == -j else 0)


def test_trace_normalizer_n3():
    ctx = ScalarContext(3)
    assert projector_trace(ctx) == QScalar.s_pow(-2) + QScalar.const(1) + QScalar.s_pow(2)


@pytest.mark.parametrize("N", (3, 4, 5))
def test_rhat_minimal_polynomial_oracle(N):
    # (R - q)(R + q^-1)(R - q^(1-N)) = 0 on a dense rational matrix
    ctx = ScalarContext(N)
    s = Fraction(3, 2)
    q = s * s
    R = dense(ctx, build_rhat(ctx), s)
    M = matmul(matmul(shifted(R, q), shifted(R, -1 / q)), shifted(R, q ** (1 - N)))
    assert all(v == 0 for row in M for v in row)
    # and no quadratic factor already vanishes
    M2 = matmul(shifted(R, q), shifted(R, -1 / q))
    assert any(v != 0 for row in M2 for v in row)


@pytest.mark.parametrize("N", NS)
def test_braid(N):
    assert check_braid(ScalarContext(N)).passed


@pytest.mark.parametrize("N", NS)
def test_projectors(N):
    rep = check_projectors(ScalarContext(N))
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("N", NS)
def test_gtt(N):
    rep = check_gtt(ScalarContext(N))
    assert len(rep) == 4
    assert rep.passed, rep.failures()


def test_gtt_perturbed_fails():
    ctx = ScalarContext(3)
    R = build_rhat(ctx)
    entries = dict(R.entries)
    entries[(1, 1, 1, 1)] = entries[(1, 1, 1, 1)] + ctx.one
    rep = check_gtt(ctx, SparseTensor4(entries))
    assert not rep.passed
    assert all(r.residual for r in rep.failures())


@pytest.mark.parametrize("N", NS)
def test_classical_ranks(N):
    ctx = ScalarContext(N)
    assert classical_ranks(ctx) == (N * (N + 1) // 2 - 1, N * (N - 1) // 2, 1)


def test_antisymmetric_rank_n3():
    assert classical_ranks(ScalarContext(3))[1] == 3


@pytest.mark.parametrize("N", (3, 4))
def test_flip_at_one(N):
    ctx = ScalarContext(N)
    assert rhat_at_one_is_flip(ctx)
    Rinv = rhat_inverse(ctx)
    for (i, j, k, l), v in Rinv.items():
        assert evaluate(v, 1) == GaussRational(1 if (k, l) == (j, i) else 0)


def test_spectral_inverse_equals_linear_solve():
    ctx = ScalarContext(3)
    assert solve_inverse(ctx, build_rhat(ctx)) == rhat_inverse(ctx)


def test_orthogonality_example():
    ctx = ScalarContext(3)
    assert (projector(ctx, "s") @ projector(ctx, "a")).is_zero()


def test_rhat_symmetric_and_sparse():
    for N in NS:
        ctx = ScalarContext(N)
        R = build_rhat(ctx)
        assert R == R.transpose()
        assert len(R) <= 3 * N * N


def test_k_convention_does_not_change_rhat():
    assert build_rhat(ScalarContext(5, "h")) == build_rhat(ScalarContext(5))


def test_records_are_sorted():
    recs = build_rhat(ScalarContext(3)).to_records()
    keys = [(r["i"], r["j"], r["k"], r["l"]) for r in recs]
    assert keys == sorted(keys)


def test_report_merges_duplicate_ids():
    rep = VerificationReport()
    rep.add("x", True)
    rep.add("x", False, "w")
    assert len(rep) == 1 and not rep["x"].passed and rep["x"].residual == "w"
