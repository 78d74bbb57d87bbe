"""Generalized flip, metric, torsion, covariant derivative and curvature.

Everything is computed in the frame basis ``theta^a``.  Frame elements
commute with functions, so a tensor ``sum T_cd theta^c (x) theta^d`` is
just a table of algebra elements and ``sigma`` acts on it through the
constant tensor ``S`` (``q R^`` on the ``plus`` branch, ``(q R^)^-1`` on
the ``minus`` branch).  Conversions to and from the ``xi`` basis use
``xi^l = e^l_a theta^a`` and ``theta^c (x) theta^d = theta^d_l theta^c_k xi^k (x) xi^l``.
"""
from __future__ import annotations

from itertools import product
from typing import Dict, Optional, Tuple

from .algebra import AlgebraElement, ExtendedAlgebra
from .forms import OneForm, TensorSquare, calculus
from .frame import FrameData, tensors_for
from .report import VerificationReport
from .scalars import ScalarContext
from .tensors import SparseTensor4, SparseTensor6, build_rhat, rhat_inverse

__all__ = [
    "BRANCHES",
    "sigma_tensor",
    "sigma_apply",
    "check_sigma",
    "check_torsion_bilinearity",
    "conformal_factor",
    "check_conformal_compat",
    "Geometry",
    "check_metric",
    "check_covariant",
    "curvature",
    "check_curvature",
]

BRANCHES = ("plus", "minus")

Frame2 = Dict[Tuple[int, int], AlgebraElement]


def sigma_tensor(ctx: ScalarContext, branch: str) -> SparseTensor4:
    """``S^{ab}_{cd}`` with ``sigma(theta^a theta^b) = S^{ab}_{cd} theta^c theta^d``."""
    if branch == "plus":
        return build_rhat(ctx).scale(ctx.q)
    if branch == "minus":
        return rhat_inverse(ctx).scale(ctx.q.inverse())
    if branch == "identity":  # negative control
        return SparseTensor4.identity(ctx)
    raise ValueError(f"sigma branch must be 'plus' or 'minus', got {branch!r}")


def _add(out: dict, key, value: AlgebraElement):
    prev = out.get(key)
    out[key] = value if prev is None else prev + value


def sigma_apply(S: SparseTensor4, T: Frame2) -> Frame2:
    """Apply ``sigma`` to frame coefficients ``T[(a, b)]``."""
    out: Frame2 = {}
    for ab, c in T.items():
        for cd, v in S.rows.get(ab, {}).items():
            _add(out, cd, c.scale(v))
    return out


# ---------------------------------------------------------------------------
# constant-tensor identities


def check_sigma(ctx: ScalarContext, branch: str,
                report: Optional[VerificationReport] = None) -> VerificationReport:
    """Braid relation of ``S`` on triple tensors and ``S(q=1) = flip``."""
    report = report if report is not None else VerificationReport()
    S = sigma_tensor(ctx, branch)
    sfx = f"N{ctx.N}.{branch}"
    with report.timed():
        S12 = SparseTensor6.from_12(S, ctx)
        S23 = SparseTensor6.from_23(S, ctx)
        diff = S12 @ S23 @ S12 - S23 @ S12 @ S23
        report.add(f"geometry.sigma_braid.{sfx}", diff.is_zero())
    if not ctx.field.exact:
        return report
    with report.timed():
        from .scalars import classical_limit

        flip = SparseTensor4.flip(ctx)
        ok = True
        try:
            for key, v in S.items():
                if classical_limit(v) != (1 if flip.get(*key) is not None else 0):
                    ok = False
            for key, _ in flip.items():
                if S.get(*key) is None:
                    ok = False
        except (ZeroDivisionError, AttributeError):
            ok = False
        report.add(f"geometry.sigma_classical_flip.{sfx}", ok)
    return report


def check_torsion_bilinearity(ctx: ScalarContext, branch: str, tag: str = "plain",
                              report: Optional[VerificationReport] = None,
                              S: Optional[SparseTensor4] = None) -> VerificationReport:
    """``pi o (sigma + 1) = 0``: the antisymmetric part of ``S + 1`` vanishes."""
    report = report if report is not None else VerificationReport()
    S = S if S is not None else sigma_tensor(ctx, branch)
    T = tensors_for(ctx)
    with report.timed():
        residual = (S + SparseTensor4.identity(ctx)) @ T.Pa
        report.add(f"geometry.torsion.N{ctx.N}.{tag}.{branch}", residual.is_zero(),
                   residual.max_witness())
    return report


def conformal_factor(ctx: ScalarContext, S: SparseTensor4):
    """``phi`` with ``S^{ae}_{df} g^{fg} S^{cb}_{eg} = phi g^{ac} delta^b_d``, or None."""
    _, gu = tensors_for(ctx).g_lower, tensors_for(ctx).g_upper
    idx = ctx.indices
    phi = None
    for a, b, c, d in product(idx, repeat=4):
        total = ctx.zero
        for e in idx:
            for f in idx:
                v1 = S.get(a, e, d, f)
                if v1 is None:
                    continue
                v2 = S.get(c, b, e, -f)
                if v2 is None:
                    continue
                total = total + v1 * gu.get(f, -f) * v2
        target = gu.get(a, c) if b == d else None
        if target is None:
            if total:
                return None
            continue
        ratio = total / target
        if phi is None:
            phi = ratio
        elif ratio != phi:
            return None
    return phi


def check_conformal_compat(ctx: ScalarContext, tag: str = "plain",
                           report: Optional[VerificationReport] = None) -> Tuple[VerificationReport, dict]:
    """Record the conformal factor of each branch.

    Passes when each factor is ``q^2`` or ``q^-2``, the two branches give
    reciprocal factors, and the strict (factor one) compatibility fails.
    """
    report = report if report is not None else VerificationReport()
    factors = {}
    q2 = ctx.q * ctx.q
    sfx = f"N{ctx.N}.{tag}"
    for branch in BRANCHES:
        with report.timed():
            phi = conformal_factor(ctx, sigma_tensor(ctx, branch))
            factors[branch] = phi
            ok = phi is not None and (phi == q2 or phi == q2.inverse())
            note = "factor " + (phi.to_text() if phi is not None else "none")
            report.add(f"geometry.compat.factor.{sfx}.{branch}", ok, None if ok else note, note=note)
        with report.timed():
            strict = phi is not None and phi == ctx.one
            report.add(f"geometry.compat.strict_fails.{sfx}.{branch}", not strict,
                       None if not strict else "strict compatibility unexpectedly holds")
    with report.timed():
        p, m = factors["plus"], factors["minus"]
        ok = p is not None and m is not None and p * m == ctx.one
        report.add(f"geometry.compat.reciprocal.{sfx}", ok)
    return report, factors


# ---------------------------------------------------------------------------
# forms in the frame basis


class Geometry:
    """Covariant derivative data for one calculus and one ``sigma`` branch."""

    def __init__(self, fd: FrameData, branch: str, S: Optional[SparseTensor4] = None):
        self.fd = fd
        self.alg = fd.alg
        self.ctx = fd.ctx
        self.tag = fd.tag
        self.branch = branch
        self.S = S if S is not None else sigma_tensor(self.ctx, branch)
        # theta = -lambda_a theta^a
        self.t = {a: -fd.lambdas[a] for a in self.ctx.indices}

    # conversions ---------------------------------------------------------------
    def to_frame(self, u: OneForm) -> Dict[int, AlgebraElement]:
        """``sum c_l xi^l -> {a: sum_l c_l e^l_a}``."""
        out = {}
        for a in self.ctx.indices:
            total = self.alg.zero
            for l, c in u.coeffs.items():
                total = total + c * self.fd.e[(l, a)]
            if total.terms:
                out[a] = total
        return out

    def square_to_frame(self, T: TensorSquare) -> Frame2:
        """``sum T_kl xi^k xi^l -> sum T_kl e^k_a e^l_b theta^a theta^b``."""
        e = self.fd.e
        out: Frame2 = {}
        for (k, l), c in T.coeffs.items():
            for a in self.ctx.indices:
                ca = c * e[(k, a)]
                if not ca.terms:
                    continue
                for b in self.ctx.indices:
                    _add(out, (a, b), ca * e[(l, b)])
        return out

    def square_from_frame(self, T: Frame2) -> TensorSquare:
        th = self.fd.theta_components
        out: Dict[Tuple[int, int], AlgebraElement] = {}
        for (c, d), v in T.items():
            for k, l in product(self.ctx.indices, repeat=2):
                _add(out, (k, l), v * th[(d, l)] * th[(c, k)])
        return TensorSquare(self.alg, self.tag, out)

    def d_frame(self, f: AlgebraElement) -> Dict[int, AlgebraElement]:
        """``df = [lambda_a, f] theta^a``."""
        return {a: self.fd.lambdas[a].commutator(f) for a in self.ctx.indices}

    # covariant derivative --------------------------------------------------------
    def cov_frame(self, u: Dict[int, AlgebraElement]) -> Frame2:
        """``D u = -theta (x) u + sigma(u (x) theta)`` for frame coefficients ``u``."""
        out: Frame2 = {}
        for c, tc in self.t.items():
            for d, ud in u.items():
                _add(out, (c, d), -(tc * ud))
        uu: Frame2 = {}
        for a, ua in u.items():
            for b, tb in self.t.items():
                _add(uu, (a, b), ua * tb)
        for key, v in sigma_apply(self.S, uu).items():
            _add(out, key, v)
        return out

    def cov_deriv(self, u: OneForm) -> TensorSquare:
        return self.square_from_frame(self.cov_frame(self.to_frame(u)))

    def metric(self, T: TensorSquare) -> AlgebraElement:
        """``g(xi^k xi^l) = g^{kl} L^(+-2)``."""
        tens = tensors_for(self.ctx)
        Lsq = self.alg.L(2 if self.tag == "plain" else -2)
        total = self.alg.zero
        for (k, l), c in T.coeffs.items():
            v = tens.g_upper.get(k, l)
            if v is not None:
                total = total + (c * Lsq).scale(v)
        return total

    def metric_frame(self, T: Frame2) -> AlgebraElement:
        tens = tensors_for(self.ctx)
        total = self.alg.zero
        for (a, b), c in T.items():
            v = tens.g_upper.get(a, b)
            if v is not None:
                total = total + c.scale(v)
        return total

    # curvature ------------------------------------------------------------------
    def connection(self) -> Dict[int, Frame2]:
        """``D theta^a = A^a_{cd} theta^c theta^d``."""
        return {a: self.cov_frame({a: self.alg.one}) for a in self.ctx.indices}

    def curvature(self) -> Dict[int, Dict[Tuple[int, int, int], AlgebraElement]]:
        """``Curv(theta^a) = pi_12 D_2 (D theta^a)`` with
        ``D_2(f theta^c theta^d) = D(f theta^c) theta^d + sigma_12(f theta^c D theta^d)``."""
        idx = self.ctx.indices
        A = self.connection()
        Pa = tensors_for(self.ctx).Pa
        out = {}
        for a in idx:
            raw: Dict[Tuple[int, int, int], AlgebraElement] = {}
            for (c, d), f in A[a].items():
                # D(f theta^c) = df theta^c + f D theta^c
                for g, dfg in self.d_frame(f).items():
                    if dfg.terms:
                        _add(raw, (g, c, d), dfg)
                for (e, h), v in A[c].items():
                    _add(raw, (e, h, d), f * v)
                # sigma_12(f theta^c (x) A^d_{eh} theta^e theta^h)
                for (e, h), v in A[d].items():
                    fv = f * v
                    if not fv.terms:
                        continue
                    for (g, m), s in self.S.rows.get((c, e), {}).items():
                        _add(raw, (g, m, h), fv.scale(s))
            proj: Dict[Tuple[int, int, int], AlgebraElement] = {}
            for (g, m, h), v in raw.items():
                for (g2, m2), p in Pa.rows.get((g, m), {}).items():
                    _add(proj, (g2, m2, h), v.scale(p))
            out[a] = proj
        return out


def _record(report, check_id, residuals):
    for where, el in residuals:
        if not el.is_zero():
            report.add(check_id, False, f"{where}: {el.to_text()[:300]}")
            return False
    report.add(check_id, True)
    return True


def _sample_functions(alg: ExtendedAlgebra):
    idx = alg.indices
    out = [alg.x(i) for i in idx]
    out.append(alg.x(idx[0]) * alg.x(idx[-1]))
    return out


def check_metric(geo: Geometry, report: Optional[VerificationReport] = None) -> VerificationReport:
    """A-bilinearity of ``g`` and its frame values ``g(theta^a theta^b) = g^{ab}``."""
    report = report if report is not None else VerificationReport()
    alg, tag, ctx = geo.alg, geo.tag, geo.ctx
    sfx = f"N{ctx.N}.{tag}"
    idx = ctx.indices
    xi = {i: OneForm.basis(alg, tag, i) for i in idx}
    fs = _sample_functions(alg)

    def left():
        for f in fs:
            for k, l in product(idx, repeat=2):
                lhs = geo.metric(xi[k].left_mul(f).tensor(xi[l]))
                rhs = f * geo.metric(xi[k].tensor(xi[l]))
                yield (k, l), lhs - rhs

    def right():
        for f in fs:
            for k, l in product(idx, repeat=2):
                lhs = geo.metric(xi[k].tensor(xi[l].right_mul(f)))
                rhs = geo.metric(xi[k].tensor(xi[l])) * f
                yield (k, l), lhs - rhs

    def middle():
        for f in fs:
            for k, l in product(idx, repeat=2):
                lhs = geo.metric(xi[k].right_mul(f).tensor(xi[l]))
                rhs = geo.metric(xi[k].tensor(xi[l].left_mul(f)))
                yield (k, l), lhs - rhs

    def frame_values():
        tens = tensors_for(ctx)
        for a, b in product(idx, repeat=2):
            val = geo.metric(geo.square_from_frame({(a, b): alg.one}))
            target = tens.g_upper.get(a, b)
            yield (a, b), val - (alg.scalar(target) if target is not None else alg.zero)

    with report.timed():
        _record(report, f"geometry.metric.left_linear.{sfx}", left())
    with report.timed():
        _record(report, f"geometry.metric.right_linear.{sfx}", right())
    with report.timed():
        _record(report, f"geometry.metric.balanced.{sfx}", middle())
    with report.timed():
        _record(report, f"geometry.metric.frame_values.{sfx}", frame_values())
    return report


def check_covariant(geo: Geometry, report: Optional[VerificationReport] = None) -> VerificationReport:
    """Left and right Leibniz rules of ``D`` on ``f xi^i`` and ``xi^i f``."""
    report = report if report is not None else VerificationReport()
    alg, tag, ctx = geo.alg, geo.tag, geo.ctx
    sfx = f"N{ctx.N}.{tag}.{geo.branch}"
    calc = calculus(alg, tag)
    idx = ctx.indices
    fs = [alg.x(i) for i in idx]

    def left():
        for f in fs:
            df = geo.to_frame(calc.d(f))
            for i in idx:
                u = geo.to_frame(OneForm.basis(alg, tag, i))
                fu = geo.to_frame(OneForm.basis(alg, tag, i).left_mul(f))
                res = geo.cov_frame(fu)
                for c, dc in df.items():
                    for d_, ud in u.items():
                        _add(res, (c, d_), -(dc * ud))
                for key, v in geo.cov_frame(u).items():
                    _add(res, key, -(f * v))
                for key, v in res.items():
                    yield (i, key), v

    def right():
        for f in fs:
            df = geo.to_frame(calc.d(f))
            for i in idx:
                form = OneForm.basis(alg, tag, i)
                u = geo.to_frame(form)
                uf = geo.to_frame(form.right_mul(f))
                res = geo.cov_frame(uf)
                for key, v in geo.cov_frame(u).items():
                    _add(res, key, -(v * f))
                pair: Frame2 = {}
                for a, ua in u.items():
                    for b, db in df.items():
                        _add(pair, (a, b), ua * db)
                for key, v in sigma_apply(geo.S, pair).items():
                    _add(res, key, -v)
                for key, v in res.items():
                    yield (i, key), v

    def frame_d():
        # the frame-basis derivative agrees with the calculus
        for f in fs + [alg.x(idx[0]) * alg.x(idx[-1])]:
            via_calc = geo.to_frame(calc.d(f))
            via_frame = geo.d_frame(f)
            for a in idx:
                yield a, via_calc.get(a, alg.zero) - via_frame[a]

    with report.timed():
        _record(report, f"geometry.cov.left_leibniz.{sfx}", left())
    with report.timed():
        _record(report, f"geometry.cov.right_leibniz.{sfx}", right())
    with report.timed():
        _record(report, f"geometry.cov.frame_d.{sfx}", frame_d())
    return report


def curvature(geo: Geometry):
    return geo.curvature()


def check_curvature(geo: Geometry, report: Optional[VerificationReport] = None,
                    check_id: Optional[str] = None) -> VerificationReport:
    report = report if report is not None else VerificationReport()
    cid = check_id or f"geometry.curvature.N{geo.ctx.N}.{geo.tag}.{geo.branch}"
    with report.timed():
        curv = geo.curvature()
        _record(report, cid, (((a, key), v) for a, comp in sorted(curv.items())
                              for key, v in sorted(comp.items())))
    return report
