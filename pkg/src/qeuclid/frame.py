"""Inner derivations, frame components and their identity families.

For each calculus (``plain`` or ``barred``) the inner derivations are
``lambda_a = gamma_a L^(+-1) (...)`` and ``e^i_a = [lambda_a, x(i)]``; the
frame is ``theta^a = L^(-+2) g^{ab} e^j_b g_{jl} xi^l``.  The verifiers
below check the relations those objects satisfy, exactly, through the
algebra's zero test.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, Optional, Tuple

from .algebra import AlgebraElement, ExtendedAlgebra, UnsupportedInput
from .report import VerificationReport
from .scalars import ScalarContext
from .tensors import SparseTensor4, build_metric, build_rhat, projector, rhat_inverse

__all__ = [
    "GammaAssignment",
    "FrameData",
    "build_gammas",
    "build_lambdas",
    "e_matrix",
    "verify_lambda_equation",
    "verify_theorem2",
    "verify_glue",
    "build_frame",
    "verify_frame",
    "TAGS",
]

TAGS = ("plain", "barred")


def _check_tag(tag):
    if tag not in TAGS:
        raise ValueError(f"calculus tag must be 'plain' or 'barred', got {tag!r}")


@dataclass(frozen=True)
class Root:
    """``(i if imaginary) * sign * q^(half_q/2) * base^-1 * (w(a) if radical)``."""

    sign: int
    imaginary: bool
    half_q: int
    base: str  # "h" or "k"
    radical: Optional[int] = None

    def scalar(self, ctx: ScalarContext):
        base = ctx.h if self.base == "h" else ctx.k
        v = ctx.field.s_pow(self.half_q) * base.inverse()
        if self.imaginary:
            v = v * ctx.field.imag_unit()
        return v if self.sign > 0 else -v

    def element(self, alg: ExtendedAlgebra) -> AlgebraElement:
        el = alg.scalar(self.scalar(alg.ctx))
        if self.radical is not None:
            el = el * alg.radical(self.radical)
        return el


@dataclass
class GammaAssignment:
    """Normalization constants ``gamma_a`` of the inner derivations.

    ``values[a]`` is an :class:`AlgebraElement` (a scalar, possibly times the
    central radical ``w(a) = sqrt(omega_a omega_{a-1})``).
    """

    tag: str
    mode: str
    branch: Tuple[int, ...]
    values: Dict[int, AlgebraElement]

    def product(self, a: int) -> AlgebraElement:
        return self.values[a] * self.values[-a]


def _register_radicals(alg: ExtendedAlgebra):
    ctx = alg.ctx
    for a in range(2, ctx.n + 1):
        if (1 << (a - 1)) not in alg.radical_squares:
            alg.register_radical(a, ctx.omega[a] * ctx.omega[a - 1])


def gamma_products(ctx: ScalarContext, tag: str) -> Dict[int, object]:
    """Required ``gamma_a gamma_-a`` for ``a >= 1`` (and ``gamma_0^2`` for odd N)."""
    _check_tag(tag)
    q = ctx.q
    sgn = 1 if tag == "plain" else -1
    qq = q.inverse() if tag == "plain" else q
    out = {}
    if ctx.odd:
        g0 = (ctx.field.s_pow(-sgn) * ctx.h.inverse()) * (-1 if tag == "plain" else 1)
        out[0] = g0 * g0
    for a in range(1, ctx.n + 1):
        if a == 1:
            out[a] = -qq * ctx.h.inverse() ** 2 if ctx.odd else ctx.k.inverse() ** 2
        else:
            out[a] = -qq * ctx.k.inverse() ** 2 * ctx.omega[a] * ctx.omega[a - 1]
    return out


def build_gammas(alg: ExtendedAlgebra, tag: str, mode: str = "theorem2",
                 branch: Optional[Tuple[int, ...]] = None) -> GammaAssignment:
    """Normalization constants for one calculus.

    ``theorem2`` fixes the products ``gamma_a gamma_-a`` and sets the free
    ratio ``gamma_a / gamma_-a = q``.  ``theorem5`` (odd ``N`` only) uses
    ``gamma_a^2 = (gamma_a gamma_-a) / q``, ``gamma_-a = q gamma_a`` and
    ``gammabar_a = -q gamma_a``.  ``branch[a-1]`` flips the sign of the pair
    ``gamma_{+-a}``; the default picks the root with positive imaginary part.
    """
    _check_tag(tag)
    ctx = alg.ctx
    if mode not in ("theorem2", "theorem5"):
        raise ValueError(f"unknown gamma mode {mode!r}")
    if mode == "theorem5" and not ctx.odd:
        raise UnsupportedInput("gluing both calculi is only possible for odd N")
    n = ctx.n
    branch = tuple(branch) if branch is not None else (1,) * n
    if len(branch) != n or any(b not in (1, -1) for b in branch):
        raise ValueError(f"branch must be {n} signs")
    _register_radicals(alg)
    values: Dict[int, AlgebraElement] = {}
    q = ctx.q
    if mode == "theorem5":
        plain = build_gammas(alg, "plain", "theorem2", branch)  # for gamma_0
        for a in range(1, n + 1):
            if a == 1:
                root = Root(branch[0], True, -2, "h")
            else:
                root = Root(branch[a - 1], True, -2, "k", a)
            values[a] = root.element(alg)
            values[-a] = values[a] * q
        values[0] = plain.values[0]
        if tag == "barred":
            values = {a: v * (-q) for a, v in values.items()}
        return GammaAssignment(tag, mode, branch, values)

    # theorem2: gamma_a^2 = q * (gamma_a gamma_-a)
    shift = -1 if tag == "plain" else 1  # plain -q^-1 ..., barred -q ...
    for a in range(1, n + 1):
        if a == 1 and not ctx.odd:
            root = Root(branch[0], False, 1, "k")
        elif a == 1:
            root = Root(branch[0], True, 1 + shift, "h")
        else:
            root = Root(branch[a - 1], True, 1 + shift, "k", a)
        values[a] = root.element(alg)
        values[-a] = values[a] * q.inverse()
    if ctx.odd:
        if tag == "plain":
            values[0] = alg.scalar(-(ctx.field.s_pow(-1) * ctx.h.inverse()))
        else:
            values[0] = alg.scalar(ctx.field.s_pow(1) * ctx.h.inverse())
    return GammaAssignment(tag, mode, branch, values)


def build_lambdas(alg: ExtendedAlgebra, tag: str, gammas: GammaAssignment,
                  dilatator_power: Optional[int] = None) -> Dict[int, AlgebraElement]:
    """``lambda_a`` for every index ``a``.

    ``dilatator_power`` overrides the power of ``L`` (negative controls).
    """
    _check_tag(tag)
    ctx = alg.ctx
    p = dilatator_power if dilatator_power is not None else (1 if tag == "plain" else -1)
    out = {}
    for a in ctx.indices:
        g = gammas.values[a]
        if a == 0:
            body = alg.L(p) * alg.x(0, -1)
        elif abs(a) == 1 and not ctx.odd:
            kpow = -a if tag == "plain" else a
            body = alg.L(p) * alg.x(a, -1) * alg.K(kpow)
        else:
            m = abs(a)
            body = alg.L(p) * alg.r(m, -1) * alg.r(m - 1, -1) * alg.x(-a)
        out[a] = g * body
    return out


def e_matrix(alg: ExtendedAlgebra, lambdas: Dict[int, AlgebraElement]) -> Dict[Tuple[int, int], AlgebraElement]:
    """``e[(i, a)] = [lambda_a, x(i)]``."""
    return {(i, a): lambdas[a].commutator(alg.x(i))
            for a in alg.indices for i in alg.indices}


class _Tensors:
    """Cached R^, R^^-1, metric and P_a for a context."""

    def __init__(self, ctx: ScalarContext):
        self.ctx = ctx
        self.R = build_rhat(ctx)
        self.Rinv = rhat_inverse(ctx)
        self.g_lower, self.g_upper = build_metric(ctx)
        self.Pa = projector(ctx, "a", self.R)
        self.Pst = SparseTensor4.identity(ctx) - self.Pa


_TENSOR_CACHE: Dict[tuple, _Tensors] = {}


def tensors_for(ctx: ScalarContext) -> _Tensors:
    key = (ctx.N, ctx.field)
    t = _TENSOR_CACHE.get(key)
    if t is None:
        t = _TENSOR_CACHE[key] = _Tensors(ctx)
    return t


def _witness(el: AlgebraElement, where) -> str:
    text = el.to_text()
    if len(text) > 300:
        text = text[:300] + "..."
    return f"{where}: {text}"


def _record(report: VerificationReport, check_id: str, residuals):
    """``residuals`` yields ``(where, AlgebraElement)``; pass iff all are zero."""
    for where, el in residuals:
        if not el.is_zero():
            report.add(check_id, False, _witness(el, where))
            return False
    report.add(check_id, True)
    return True


# ---------------------------------------------------------------------------
# the exchange equation for the inner derivations


def verify_lambda_equation(alg: ExtendedAlgebra, tag: str, lambdas: Dict[int, AlgebraElement],
                           report: Optional[VerificationReport] = None,
                           e: Optional[dict] = None) -> VerificationReport:
    """``x^h e^i_a = q R^{hi}_{jk} e^j_a x^k`` (plain) or its barred twin
    ``x^h e^i_a = q^-1 (R^-1)^{hi}_{jk} e^j_a x^k``, for every ``a, h, i``."""
    _check_tag(tag)
    ctx = alg.ctx
    report = report if report is not None else VerificationReport()
    T = tensors_for(ctx)
    e = e if e is not None else e_matrix(alg, lambdas)
    M, c = (T.R, ctx.q) if tag == "plain" else (T.Rinv, ctx.q.inverse())
    thm = "thm1" if tag == "plain" else "thm3"
    X = {i: alg.x(i) for i in ctx.indices}
    for a in ctx.indices:
        def residuals(a=a):
            for h, i in product(ctx.indices, repeat=2):
                lhs = X[h] * e[(i, a)]
                rhs = alg.zero
                for (j, k), v in M.rows.get((h, i), {}).items():
                    rhs = rhs + (e[(j, a)] * X[k]).scale(c * v)
                yield (h, i), lhs - rhs
        with report.timed():
            _record(report, f"{thm}.rxlambda.a{a}.N{ctx.N}.{tag}", residuals())
    return report


# ---------------------------------------------------------------------------
# relations among the e matrices


def verify_theorem2(alg: ExtendedAlgebra, tag: str, lambdas: Dict[int, AlgebraElement],
                    e: Optional[dict] = None,
                    report: Optional[VerificationReport] = None) -> VerificationReport:
    """lambda-lambda relations, RTT, both gTT relations and the normalization."""
    _check_tag(tag)
    ctx = alg.ctx
    report = report if report is not None else VerificationReport()
    T = tensors_for(ctx)
    e = e if e is not None else e_matrix(alg, lambdas)
    idx = ctx.indices
    thm = "thm2" if tag == "plain" else "thm4"
    sfx = f"N{ctx.N}.{tag}"
    Lsq = alg.L(2 if tag == "plain" else -2)

    def lamlam():
        prods = {}
        for c, d in product(idx, repeat=2):
            total = alg.zero
            for (a, b), v in T.Pa.rows.get((c, d), {}).items():
                pr = prods.get((a, b))
                if pr is None:
                    pr = prods[(a, b)] = lambdas[a] * lambdas[b]
                total = total + pr.scale(v)
            yield (c, d), total

    with report.timed():
        _record(report, f"{thm}.lambdalambda.{sfx}", lamlam())

    ee: Dict[tuple, AlgebraElement] = {}

    def eprod(i, a, j, b):
        key = (i, a, j, b)
        v = ee.get(key)
        if v is None:
            v = ee[key] = e[(i, a)] * e[(j, b)]
        return v

    def rtt():
        for i, j, a, b in product(idx, repeat=4):
            lhs = alg.zero
            for (k, l), v in T.R.rows.get((i, j), {}).items():
                lhs = lhs + eprod(k, a, l, b).scale(v)
            rhs = alg.zero
            for (c, d), v in T.R.rows.get((a, b), {}).items():
                # R^{cd}_{ab} = R^{ab}_{cd} (symmetric braid matrix)
                rhs = rhs + eprod(i, c, j, d).scale(v)
            yield (i, j, a, b), lhs - rhs

    with report.timed():
        _record(report, f"{thm}.rtt.{sfx}", rtt())

    def gtt_upper():
        for i, j in product(idx, repeat=2):
            total = alg.zero
            for (a, b), v in T.g_upper.entries.items():
                total = total + eprod(i, a, j, b).scale(v)
            target = T.g_upper.get(i, j)
            if target is not None:
                total = total - Lsq.scale(target)
            yield (i, j), total

    def gtt_lower():
        for a, b in product(idx, repeat=2):
            total = alg.zero
            for (i, j), v in T.g_lower.entries.items():
                total = total + eprod(i, a, j, b).scale(v)
            target = T.g_lower.get(a, b)
            if target is not None:
                total = total - Lsq.scale(target)
            yield (a, b), total

    with report.timed():
        _record(report, f"{thm}.gtt.upper.{sfx}", gtt_upper())
    with report.timed():
        _record(report, f"{thm}.gtt.lower.{sfx}", gtt_lower())
    if ctx.odd:
        with report.timed():
            _record(report, f"{thm}.normalization.{sfx}", [((0, 0), eprod(0, 0, 0, 0) - Lsq)])
        with report.timed():
            target = alg.L(1 if tag == "plain" else -1)
            _record(report, f"{thm}.e00.{sfx}", [((0, 0), e[(0, 0)] - target)])
    return report


# ---------------------------------------------------------------------------
# gluing the plain and barred realizations


def verify_glue(alg: ExtendedAlgebra, report: Optional[VerificationReport] = None,
                branch: Optional[Tuple[int, ...]] = None) -> VerificationReport:
    """``e^i_i ebar^i_i = 1`` and ``R^{cd}_{ab} ebar^i_c e^j_d = R^{ij}_{kl} e^k_a ebar^l_b``."""
    ctx = alg.ctx
    report = report if report is not None else VerificationReport()
    sfx = f"N{ctx.N}"
    if not ctx.odd:
        report.add(f"thm5.glue.{sfx}", False,
                   "even N: the two Borel realizations cannot be glued",
                   note="rejected before computation")
        return report
    gp = build_gammas(alg, "plain", "theorem5", branch)
    gb = build_gammas(alg, "barred", "theorem5", branch)
    e = e_matrix(alg, build_lambdas(alg, "plain", gp))
    eb = e_matrix(alg, build_lambdas(alg, "barred", gb))
    T = tensors_for(ctx)
    idx = ctx.indices

    with report.timed():
        _record(report, f"thm5.diagonal.{sfx}",
                (((i, i), e[(i, i)] * eb[(i, i)] - alg.one) for i in idx))

    def mixed():
        cache = {}

        def prod(x, y, kx, ky):
            key = (kx, ky, id(x))
            v = cache.get(key)
            if v is None:
                v = cache[key] = x[kx] * y[ky]
            return v

        for i, j, a, b in product(idx, repeat=4):
            lhs = alg.zero
            for (c, d), v in T.R.rows.get((a, b), {}).items():
                lhs = lhs + prod(eb, e, (i, c), (j, d)).scale(v)
            rhs = alg.zero
            for (k, l), v in T.R.rows.get((i, j), {}).items():
                rhs = rhs + prod(e, eb, (k, a), (l, b)).scale(v)
            yield (i, j, a, b), lhs - rhs

    with report.timed():
        _record(report, f"thm5.rtt_mixed.{sfx}", mixed())
    return report


# ---------------------------------------------------------------------------
# frame


@dataclass
class FrameData:
    """Everything derived from one choice of ``lambda_a`` for one calculus."""

    alg: ExtendedAlgebra
    tag: str
    gammas: GammaAssignment
    lambdas: Dict[int, AlgebraElement]
    e: Dict[Tuple[int, int], AlgebraElement]
    theta_components: Dict[Tuple[int, int], AlgebraElement]

    @property
    def ctx(self) -> ScalarContext:
        return self.alg.ctx

    @cached_property
    def frame(self):
        """``theta^a`` as one-forms in the ``xi`` basis."""
        from .forms import OneForm

        return {a: OneForm(self.alg, self.tag,
                           {l: self.theta_components[(a, l)] for l in self.ctx.indices})
                for a in self.ctx.indices}

    @cached_property
    def dirac(self):
        """``-lambda_a theta^a``."""
        from .forms import OneForm

        coeffs = {}
        for l in self.ctx.indices:
            total = self.alg.zero
            for a in self.ctx.indices:
                total = total - self.lambdas[a] * self.theta_components[(a, l)]
            coeffs[l] = total
        return OneForm(self.alg, self.tag, coeffs)


def build_frame(alg: ExtendedAlgebra, tag: str, mode: str = "theorem2",
                branch: Optional[Tuple[int, ...]] = None,
                gammas: Optional[GammaAssignment] = None) -> FrameData:
    """``theta^a_l = L^(-+2) g^{ab} e^j_b g_{jl}``."""
    _check_tag(tag)
    ctx = alg.ctx
    gammas = gammas if gammas is not None else build_gammas(alg, tag, mode, branch)
    lambdas = build_lambdas(alg, tag, gammas)
    e = e_matrix(alg, lambdas)
    T = tensors_for(ctx)
    Lp = alg.L(-2 if tag == "plain" else 2)
    theta = {}
    for a in ctx.indices:
        b = -a
        gab = T.g_upper.get(a, b)
        for l in ctx.indices:
            j = -l
            gjl = T.g_lower.get(j, l)
            theta[(a, l)] = (Lp * e[(j, b)]).scale(gab * gjl)
    return FrameData(alg, tag, gammas, lambdas, e, theta)


def verify_frame(fd: FrameData, report: Optional[VerificationReport] = None) -> VerificationReport:
    """Commutation, duality, Dirac operator and frame-component relations."""
    from .forms import dirac_theta

    alg, ctx, tag = fd.alg, fd.ctx, fd.tag
    report = report if report is not None else VerificationReport()
    idx = ctx.indices
    sfx = f"N{ctx.N}.{tag}"
    T = tensors_for(ctx)
    th = fd.theta_components
    e = fd.e

    def commute_with(gen):
        for a in idx:
            form = fd.frame[a]
            res = form.left_mul(gen) - form.right_mul(gen)
            for l, c in res.coeffs.items():
                yield (a, l), c

    with report.timed():
        _record(report, f"frame.commute_x.{sfx}",
                (w for i in idx for w in commute_with(alg.x(i))))
    # informational only: conjugation is not modelled
    report[f"frame.commute_x.{sfx}"].note = "the frame does not preserve the star structure (not checked)"
    with report.timed():
        _record(report, f"frame.commute_L.{sfx}", commute_with(alg.L()))

    def duality_e_theta():
        for i, j in product(idx, repeat=2):
            total = alg.zero
            for a in idx:
                total = total + e[(i, a)] * th[(a, j)]
            yield (i, j), total - (alg.one if i == j else alg.zero)

    def duality_theta_e():
        for a, b in product(idx, repeat=2):
            total = alg.zero
            for i in idx:
                total = total + th[(a, i)] * e[(i, b)]
            yield (a, b), total - (alg.one if a == b else alg.zero)

    with report.timed():
        _record(report, f"frame.duality.e_theta.{sfx}", duality_e_theta())
    with report.timed():
        _record(report, f"frame.duality.theta_e.{sfx}", duality_theta_e())

    with report.timed():
        ref = dirac_theta(alg, tag)
        diff = fd.dirac - ref
        _record(report, f"frame.dirac_matches.{sfx}", diff.coeffs.items())

    tt: Dict[tuple, AlgebraElement] = {}

    def ttp(d, j, c, i):
        key = (d, j, c, i)
        v = tt.get(key)
        if v is None:
            v = tt[key] = th[(d, j)] * th[(c, i)]
        return v

    def rtt_theta():
        # R^{ab}_{cd} theta^d_j theta^c_i = theta^b_l theta^a_k R^{kl}_{ij}
        for a, b, i, j in product(idx, repeat=4):
            lhs = alg.zero
            for (c, d), v in T.R.rows.get((a, b), {}).items():
                lhs = lhs + ttp(d, j, c, i).scale(v)
            rhs = alg.zero
            for (k, l), v in T.R.rows.get((i, j), {}).items():
                rhs = rhs + ttp(b, l, a, k).scale(v)
            yield (a, b, i, j), lhs - rhs

    with report.timed():
        _record(report, f"frame.rtt_theta.{sfx}", rtt_theta())

    Lm = alg.L(-2 if tag == "plain" else 2)

    def g_theta_lower():
        # g_ab theta^b_j theta^a_i = L^-+2 g^{ij}
        for i, j in product(idx, repeat=2):
            total = alg.zero
            for (a, b), v in T.g_lower.entries.items():
                total = total + ttp(b, j, a, i).scale(v)
            target = T.g_upper.get(i, j)
            if target is not None:
                total = total - Lm.scale(target)
            yield (i, j), total

    def g_theta_upper():
        # g^{ij} theta^b_j theta^a_i = L^-+2 g_ab
        for a, b in product(idx, repeat=2):
            total = alg.zero
            for (i, j), v in T.g_upper.entries.items():
                total = total + ttp(b, j, a, i).scale(v)
            target = T.g_lower.get(a, b)
            if target is not None:
                total = total - Lm.scale(target)
            yield (a, b), total

    with report.timed():
        _record(report, f"frame.g_theta.lower.{sfx}", g_theta_lower())
    with report.timed():
        _record(report, f"frame.g_theta.upper.{sfx}", g_theta_upper())

    def wedge_theta():
        # theta^c theta^d = theta^d_j theta^c_i xi^i xi^j ; P_{s,t} part must vanish
        for a, b in product(idx, repeat=2):
            coeff = {}
            for (c, d), v in T.Pst.rows.get((a, b), {}).items():
                for i, j in product(idx, repeat=2):
                    term = ttp(d, j, c, i).scale(v)
                    prev = coeff.get((i, j))
                    coeff[(i, j)] = term if prev is None else prev + term
            for k, l in product(idx, repeat=2):
                total = alg.zero
                for (i, j), v in T.Pa.transpose().rows.get((k, l), {}).items():
                    if (i, j) in coeff:
                        total = total + coeff[(i, j)].scale(v)
                yield (a, b, k, l), total

    with report.timed():
        _record(report, f"frame.wedge_pst.{sfx}", wedge_theta())

    def reconstruct_d():
        # d x^i = [lambda_a, x^i] theta^a
        for i in idx:
            for l in idx:
                total = alg.zero
                for a in idx:
                    total = total + e[(i, a)] * th[(a, l)]
                yield (i, l), total - (alg.one if i == l else alg.zero)

    with report.timed():
        _record(report, f"frame.d_from_frame.{sfx}", reconstruct_d())

    def manca():
        # 2 lambda_c lambda_d P_a^{cd}_{ab} = 0 (no linear or constant term)
        lam = fd.lambdas
        cache = {}
        for a, b in product(idx, repeat=2):
            total = alg.zero
            for (c, d), v in T.Pa.transpose().rows.get((a, b), {}).items():
                pr = cache.get((c, d))
                if pr is None:
                    pr = cache[(c, d)] = lam[c] * lam[d]
                total = total + pr.scale(2 * v)
            yield (a, b), total

    with report.timed():
        _record(report, f"frame.quadratic_lambda.{sfx}", manca())
    return report
