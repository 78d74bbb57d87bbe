"""One-forms and two-forms over the extended algebra.

Forms are stored with coefficients on the left: ``sum_l c_l xi^l``.  Moving
a differential to the right of a function uses

* plain:  ``xi^k x^l = q^-1 (R^-1)^{kl}_{ij} x^i xi^j``,
* barred: ``xi^k x^l = q R^{kl}_{ij} x^i xi^j``,

together with ``xi L = L xi``, ``xi^(+-1) K = q^(-+1) K xi^(+-1)`` and
``xi r_n = q^(-+1) r_n xi``.  The last radial generator is the only one a
differential can pass; other ``r_i`` and inverse coordinates are rejected.

Two-forms ``sum T_kl xi^k xi^l`` are reduced to the antisymmetric part
``T -> T P_a``; this is the canonical form used for the zero test.
"""
from __future__ import annotations

from itertools import product
from typing import Dict, Optional, Tuple

from .algebra import AlgebraElement, ExtendedAlgebra, UnsupportedInput, _add_into
from .report import VerificationReport
from .tensors import SparseTensor4, build_metric, build_rhat, projector, rhat_inverse

__all__ = [
    "OneForm",
    "TwoForm",
    "TensorSquare",
    "Calculus",
    "calculus",
    "dirac_theta",
    "d",
    "push_coefficient",
    "wedge",
    "check_d_as_commutator",
    "rule_table",
    "check_rule_tables",
    "check_calculus",
]


class Calculus:
    """Commutation rules between differentials and functions for one tag."""

    def __init__(self, alg: ExtendedAlgebra, tag: str):
        if tag not in ("plain", "barred"):
            raise ValueError(f"calculus tag must be 'plain' or 'barred', got {tag!r}")
        self.alg = alg
        self.tag = tag
        ctx = alg.ctx
        q = ctx.q
        if tag == "plain":
            M, c = rhat_inverse(ctx), q.inverse()
            self.r_factor = q.inverse()
        else:
            M, c = build_rhat(ctx), q
            self.r_factor = q
        # rule[(k, l)] = {(i, j): coefficient} for xi^k x^l
        self.rule = {key: {ij: c * v for ij, v in row.items()} for key, row in M.rows.items()}
        self.Pa = projector(ctx, "a")
        self.Pa_rows = self.Pa.rows
        self._push_cache: Dict[Tuple[int, tuple], Dict[int, dict]] = {}
        self._d_cache: Dict[tuple, Dict[int, dict]] = {}
        self._theta = None

    # moving a differential to the right -----------------------------------
    def _push_x(self, l: int, X: tuple) -> Dict[int, dict]:
        """``xi^l * x^X = sum_j P_j(x) xi^j``; returns ``{j: x-poly}``."""
        key = (l, X)
        hit = self._push_cache.get(key)
        if hit is not None:
            return hit
        alg = self.alg
        top = alg._x_top(X)
        if top < 0:
            out = {l: {X: alg.ctx.one}}
        else:
            p = alg.indices[top]
            rest = list(X)
            rest[top] -= 1
            head = self._push_x(l, tuple(rest))
            out: Dict[int, dict] = {}
            for j, poly in head.items():
                for (i, jj), v in self.rule.get((j, p), {}).items():
                    prod_poly = alg.x_mul_poly_letter(poly, i, 1)
                    tgt = out.setdefault(jj, {})
                    for Y, c in prod_poly.items():
                        _add_into(tgt, Y, c * v)
            out = {j: P for j, P in out.items() if P}
        self._push_cache[key] = out
        return out

    def push(self, l: int, u: AlgebraElement) -> Dict[int, AlgebraElement]:
        """``xi^l * u`` as left coefficients ``{j: c_j}``."""
        alg = self.alg
        out: Dict[int, dict] = {}
        for (rad, a, b, R, X), coef in u.terms.items():
            if any(e < 0 for e in X):
                raise UnsupportedInput("a differential cannot pass an inverse coordinate")
            if any(R[:-1]):
                raise UnsupportedInput("a differential can only pass the last radial generator")
            c = coef
            if R[-1]:
                c = c * self.r_factor ** R[-1]
            if b and abs(l) == 1:
                c = c * alg.q_pow(-b if l == 1 else b)
            for j, poly in self._push_x(l, X).items():
                tgt = out.setdefault(j, {})
                for Y, v in poly.items():
                    _add_into(tgt, (rad, a, b, R, Y), c * v)
        return {j: AlgebraElement(alg, t) for j, t in out.items() if t}

    # exterior derivative -----------------------------------------------------
    def _d_x(self, X: tuple) -> Dict[int, dict]:
        """``d(x^X)`` for a normal-ordered coordinate monomial (Leibniz)."""
        hit = self._d_cache.get(X)
        if hit is not None:
            return hit
        alg = self.alg
        top = alg._x_top(X)
        out: Dict[int, dict] = {}
        if top >= 0:
            p = alg.indices[top]
            rest = list(X)
            rest[top] -= 1
            rest = tuple(rest)
            # d(Y x^p) = d(Y) x^p + Y xi^p
            for j, poly in self._d_x(rest).items():
                moved = self._push_poly(j, poly, p)
                for jj, P in moved.items():
                    tgt = out.setdefault(jj, {})
                    for Y, v in P.items():
                        _add_into(tgt, Y, v)
            tgt = out.setdefault(p, {})
            _add_into(tgt, rest, alg.ctx.one)
            out = {j: P for j, P in out.items() if P}
        self._d_cache[X] = out
        return out

    def _push_poly(self, j: int, poly: dict, p: int) -> Dict[int, dict]:
        """``poly * xi^j * x^p`` as ``{jj: poly'}``."""
        alg = self.alg
        out: Dict[int, dict] = {}
        for (i, jj), v in self.rule.get((j, p), {}).items():
            P = alg.x_mul_poly_letter(poly, i, 1)
            tgt = out.setdefault(jj, {})
            for Y, c in P.items():
                _add_into(tgt, Y, c * v)
        return out

    @property
    def theta(self) -> "OneForm":
        if self._theta is None:
            self._theta = dirac_theta(self.alg, self.tag)
        return self._theta

    def d(self, u: AlgebraElement) -> "OneForm":
        """Exterior derivative of a function.

        Coordinates obey Leibniz with ``d x^i = xi^i``; ``dK = 0`` and
        ``d(L^a K^b u) = (1 - q^-a) L^a theta K^b u + L^a K^b du``.
        """
        alg = self.alg
        coeffs: Dict[int, dict] = {}
        by_a: Dict[int, dict] = {}
        for (rad, a, b, R, X), coef in u.terms.items():
            if any(R):
                raise UnsupportedInput("d is not defined on radial generators")
            if any(e < 0 for e in X):
                raise UnsupportedInput("d is not defined on inverse coordinates")
            for j, poly in self._d_x(X).items():
                tgt = coeffs.setdefault(j, {})
                for Y, v in poly.items():
                    _add_into(tgt, (rad, a, b, R, Y), coef * v)
            if a:
                # L^a theta (K^b u), grouped by the power of L
                c = coef * (alg.ctx.one - alg.q_pow(-a))
                _add_into(by_a.setdefault(a, {}), (rad, 0, b, R, X), c)
        form = OneForm(alg, self.tag, {j: AlgebraElement(alg, t) for j, t in coeffs.items()})
        for a, t in by_a.items():
            form = form + self.theta.right_mul(AlgebraElement(alg, t)).left_mul(alg.L(a))
        return form


def calculus(alg: ExtendedAlgebra, tag: str) -> Calculus:
    """The (cached) calculus of ``alg`` with the given tag."""
    c = alg.calculi.get(tag)
    if c is None:
        c = alg.calculi[tag] = Calculus(alg, tag)
    return c


def d(u: AlgebraElement, tag: str) -> "OneForm":
    return calculus(u.alg, tag).d(u)


def push_coefficient(j: int, f: AlgebraElement, tag: str) -> "OneForm":
    """``xi^j f`` rewritten with coefficients on the left."""
    return OneForm.basis(f.alg, tag, j).right_mul(f)


def wedge(u: "OneForm", v: "OneForm") -> "TwoForm":
    return u.wedge(v)


def check_d_as_commutator(f: AlgebraElement, tag: str) -> bool:
    """``d f + [theta, f] == 0``."""
    calc = calculus(f.alg, tag)
    theta = calc.theta
    return (calc.d(f) + theta.right_mul(f) - theta.left_mul(f)).is_zero()


class OneForm:
    """``sum_l coeffs[l] xi^l`` for one calculus."""

    __slots__ = ("alg", "tag", "coeffs")

    def __init__(self, alg: ExtendedAlgebra, tag: str, coeffs: Dict[int, AlgebraElement]):
        self.alg = alg
        self.tag = tag
        self.coeffs = {l: c for l, c in coeffs.items() if c.terms}

    @classmethod
    def basis(cls, alg: ExtendedAlgebra, tag: str, l: int) -> "OneForm":
        return cls(alg, tag, {l: alg.one})

    def _same(self, other: "OneForm"):
        if self.tag != other.tag:
            raise ValueError("forms from different calculi cannot be combined")

    def __add__(self, other: "OneForm") -> "OneForm":
        self._same(other)
        out = dict(self.coeffs)
        for l, c in other.coeffs.items():
            out[l] = out[l] + c if l in out else c
        return OneForm(self.alg, self.tag, out)

    def __neg__(self) -> "OneForm":
        return OneForm(self.alg, self.tag, {l: -c for l, c in self.coeffs.items()})

    def __sub__(self, other: "OneForm") -> "OneForm":
        return self + (-other)

    def scale(self, c) -> "OneForm":
        return OneForm(self.alg, self.tag, {l: v.scale(c) for l, v in self.coeffs.items()})

    def left_mul(self, u: AlgebraElement) -> "OneForm":
        return OneForm(self.alg, self.tag, {l: u * c for l, c in self.coeffs.items()})

    def right_mul(self, u: AlgebraElement) -> "OneForm":
        calc = calculus(self.alg, self.tag)
        out: Dict[int, AlgebraElement] = {}
        for l, c in self.coeffs.items():
            for j, v in calc.push(l, u).items():
                term = c * v
                out[j] = out[j] + term if j in out else term
        return OneForm(self.alg, self.tag, out)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def wedge(self, other: "OneForm") -> "TwoForm":
        self._same(other)
        calc = calculus(self.alg, self.tag)
        T: Dict[Tuple[int, int], AlgebraElement] = {}
        for k, a in self.coeffs.items():
            for l, b in other.coeffs.items():
                for j, c in calc.push(k, b).items():
                    term = a * c
                    T[(j, l)] = T[(j, l)] + term if (j, l) in T else term
        return TwoForm(self.alg, self.tag, T)

    def tensor(self, other: "OneForm") -> "TensorSquare":
        self._same(other)
        calc = calculus(self.alg, self.tag)
        T: Dict[Tuple[int, int], AlgebraElement] = {}
        for k, a in self.coeffs.items():
            for l, b in other.coeffs.items():
                for j, c in calc.push(k, b).items():
                    term = a * c
                    T[(j, l)] = T[(j, l)] + term if (j, l) in T else term
        return TensorSquare(self.alg, self.tag, T)

    def d(self) -> "TwoForm":
        """``d(sum c_l xi^l) = sum dc_l ^ xi^l``."""
        calc = calculus(self.alg, self.tag)
        total = TwoForm(self.alg, self.tag, {})
        for l, c in self.coeffs.items():
            total = total + calc.d(c).wedge(OneForm.basis(self.alg, self.tag, l))
        return total

    def to_text(self) -> str:
        name = "xi" if self.tag == "plain" else "xibar"
        if not self.coeffs:
            return "0"
        return " + ".join(f"({c.to_text()})*{name}({l})" for l, c in sorted(self.coeffs.items()))

    def __repr__(self):
        return f"OneForm[{self.tag}]({self.to_text()})"


class TensorSquare:
    """``sum T[(k, l)] xi^k (x) xi^l`` with coefficients on the left."""

    __slots__ = ("alg", "tag", "coeffs")

    def __init__(self, alg: ExtendedAlgebra, tag: str, coeffs: Dict[Tuple[int, int], AlgebraElement]):
        self.alg = alg
        self.tag = tag
        self.coeffs = {kl: c for kl, c in coeffs.items() if c.terms}

    def __add__(self, other):
        out = dict(self.coeffs)
        for kl, c in other.coeffs.items():
            out[kl] = out[kl] + c if kl in out else c
        return type(self)(self.alg, self.tag, out)

    def __neg__(self):
        return type(self)(self.alg, self.tag, {kl: -c for kl, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def left_mul(self, u: AlgebraElement):
        return type(self)(self.alg, self.tag, {kl: u * c for kl, c in self.coeffs.items()})

    def scale(self, c):
        return type(self)(self.alg, self.tag, {kl: v.scale(c) for kl, v in self.coeffs.items()})

    def apply(self, tensor) -> "TensorSquare":
        """``T'_{ef} = sum T_{kl} M^{kl}_{ef}`` for a 4-index tensor ``M``."""
        out: Dict[Tuple[int, int], AlgebraElement] = {}
        for kl, c in self.coeffs.items():
            for ef, v in tensor.rows.get(kl, {}).items():
                term = c.scale(v)
                out[ef] = out[ef] + term if ef in out else term
        return TensorSquare(self.alg, self.tag, out)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, TensorSquare):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None


class TwoForm(TensorSquare):
    """Two-form; coefficients are kept projected onto the antisymmetric part."""

    __slots__ = ()

    def __init__(self, alg: ExtendedAlgebra, tag: str, coeffs: Dict[Tuple[int, int], AlgebraElement],
                 canonical: bool = False):
        if not canonical:
            Pa = calculus(alg, tag).Pa_rows
            out: Dict[Tuple[int, int], AlgebraElement] = {}
            for kl, c in coeffs.items():
                for ef, v in Pa.get(kl, {}).items():
                    term = c.scale(v)
                    out[ef] = out[ef] + term if ef in out else term
            coeffs = out
        super().__init__(alg, tag, coeffs)

    def __add__(self, other):
        out = dict(self.coeffs)
        for kl, c in other.coeffs.items():
            out[kl] = out[kl] + c if kl in out else c
        return TwoForm(self.alg, self.tag, out, canonical=True)

    def __neg__(self):
        return TwoForm(self.alg, self.tag, {kl: -c for kl, c in self.coeffs.items()}, canonical=True)

    def __eq__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None


def dirac_theta(alg: ExtendedAlgebra, tag: str) -> OneForm:
    """The one-form ``theta`` with ``du = -[theta, u]``.

    ``theta = c r_n^-2 sum_j g_{-j,j} x^-j xi^j`` with
    ``c = omega_n q^(N/2) / k`` (plain) or ``-omega_n q^(-N/2) / k`` (barred).
    """
    ctx = alg.ctx
    g_lower, _ = build_metric(ctx)
    sign = 1 if tag == "plain" else -1
    c = ctx.omega[ctx.n] * alg.s_pow(sign * ctx.N) * ctx.k.inverse()
    if tag == "barred":
        c = -c
    rr = alg.r(ctx.n, -2)
    coeffs = {j: (rr * alg.x(-j)).scale(c * g_lower.get(-j, j)) for j in ctx.indices}
    return OneForm(alg, tag, coeffs)


def check_calculus(alg: ExtendedAlgebra, tag: str, report: Optional[VerificationReport] = None,
                   samples=None) -> VerificationReport:
    """Consistency of the differential calculus.

    * pushing a differential through ``x^i x^j`` letter by letter agrees with
      pushing it through the normal-ordered product;
    * pushing through ``r_n^2`` agrees with pushing through its coordinate
      expansion;
    * ``d`` agrees with ``-[theta, .]`` on generators, ``L`` and products;
    * ``d^2 = 0`` on coordinate monomials of degree up to two.
    """
    ctx = alg.ctx
    report = report if report is not None else VerificationReport()
    calc = calculus(alg, tag)
    idx = ctx.indices
    sfx = f"N{ctx.N}.{tag}"
    X = {i: alg.x(i) for i in idx}

    def push_consistency():
        for m, i, j in product(idx, repeat=3):
            step = OneForm.basis(alg, tag, m).right_mul(X[i]).right_mul(X[j])
            direct = OneForm.basis(alg, tag, m).right_mul(X[i] * X[j])
            diff = step - direct
            for l, c in diff.coeffs.items():
                yield (m, i, j, l), c

    with report.timed():
        _record(report, f"calculus.push_relations.{sfx}", push_consistency())

    def push_radial():
        rn = ctx.n
        r2 = alg.r2_element(rn)
        for m in idx:
            via_r = OneForm.basis(alg, tag, m).right_mul(alg.r(rn, 2))
            via_x = OneForm.basis(alg, tag, m).right_mul(r2)
            diff = via_r - via_x
            for l, c in diff.coeffs.items():
                yield (m, l), c

    with report.timed():
        _record(report, f"calculus.push_radial.{sfx}", push_radial())

    def left_rule():
        # x^i xi^j = q R^{ij}_{kl} xi^k x^l (plain); q^-1 (R^-1)^{ij}_{kl} (barred)
        if tag == "plain":
            M, c = build_rhat(ctx), ctx.q
        else:
            M, c = rhat_inverse(ctx), ctx.q.inverse()
        for i, j in product(idx, repeat=2):
            total = OneForm.basis(alg, tag, j).left_mul(X[i])
            for (k, l), v in M.rows.get((i, j), {}).items():
                total = total - OneForm.basis(alg, tag, k).right_mul(X[l]).scale(c * v)
            for m, coef in total.coeffs.items():
                yield (i, j, m), coef

    with report.timed():
        _record(report, f"calculus.left_rule.{sfx}", left_rule())

    theta = calc.theta

    def commutator_form(u):
        # -[theta, u] = u theta - theta u
        return theta.left_mul(u) - theta.right_mul(u)

    samples = samples if samples is not None else _default_samples(alg)

    def d_matches():
        for name, u in samples:
            diff = calc.d(u) - commutator_form(u)
            for l, c in diff.coeffs.items():
                yield (name, l), c

    with report.timed():
        _record(report, f"calculus.d_is_commutator.{sfx}", d_matches())

    def d_relations():
        # d respects the coordinate relations: d(x^i) x^j + x^i d(x^j) = d(x^i x^j)
        for i, j in product(idx, repeat=2):
            lhs = calc.d(X[i]).right_mul(X[j]) + calc.d(X[j]).left_mul(X[i])
            diff = lhs - calc.d(X[i] * X[j])
            for l, c in diff.coeffs.items():
                yield (i, j, l), c

    with report.timed():
        _record(report, f"calculus.leibniz.{sfx}", d_relations())

    def d_squared():
        for name, u in samples:
            if any(k[1] or any(k[3]) or any(e < 0 for e in k[4]) for k in u.terms):
                continue
            dd = calc.d(u).d()
            for kl, c in dd.coeffs.items():
                yield (name, kl), c

    with report.timed():
        _record(report, f"calculus.d_squared.{sfx}", d_squared())
    return report


def rule_table(ctx, tag: str) -> SparseTensor4:
    """``M`` with ``xi^k x^l = M^{kl}_{ij} x^i xi^j``."""
    if tag == "plain":
        return rhat_inverse(ctx).scale(ctx.q.inverse())
    return build_rhat(ctx).scale(ctx.q)


def check_rule_tables(ctx, report: Optional[VerificationReport] = None) -> VerificationReport:
    """The plain table turns into the barred one under ``q -> 1/q`` and ``i -> -i``."""
    report = report if report is not None else VerificationReport()
    with report.timed():
        barred = rule_table(ctx, "barred")
        if ctx.field.exact:
            swapped = rule_table(ctx, "plain").map_scalars(lambda v: v.invert_s())
        else:
            swapped = rule_table(ctx.with_field(ctx.field.reciprocal()), "plain")
        mirrored = SparseTensor4({(-i, -j, -k, -l): v for (i, j, k, l), v in swapped.items()})
        diff = mirrored - barred
        report.add(f"calculus.rule_tables_exchanged.N{ctx.N}", diff.is_zero(), diff.max_witness())
    return report


def _default_samples(alg: ExtendedAlgebra):
    idx = alg.indices
    out = [(f"x({i})", alg.x(i)) for i in idx]
    out += [(f"x({i})x({j})", alg.x(i) * alg.x(j)) for i in idx for j in idx if i <= j]
    out.append(("L", alg.L()))
    out.append(("L^-2*x(%d)" % idx[0], alg.L(-2) * alg.x(idx[0])))
    out.append(("L^3*x(%d)^2" % idx[-1], alg.L(3) * alg.x(idx[-1], 2)))
    if not alg.ctx.odd:
        out.append(("K*x(1)", alg.K() * alg.x(1)))
        out.append(("L*K^-1*x(-1)x(2)", alg.L() * alg.K(-1) * alg.x(-1) * alg.x(2)))
    return out


def _record(report, check_id, residuals):
    for where, el in residuals:
        if not el.is_zero():
            text = el.to_text()
            report.add(check_id, False, f"{where}: {text[:300]}")
            return False
    report.add(check_id, True)
    return True
