"""Extended coordinate algebra of R^N_q and its PBW normal form.

Monomials are kept in the order ``L^a K^b r_1^c1 ... r_n^cn x(-n)^.. ... x(n)^..``
(``L`` is the dilatator, ``K`` the Cartan generator used for even ``N``).
Reordering the coordinates uses

* ``x(i) x(j) = q x(j) x(i)`` for ``i < j``, ``i != -j``;
* ``x(t) x(-t) = x(-t) x(t) + c_t r_{t-1}^2`` for ``t > 0``, where
  ``c_1 = h`` (odd ``N``), ``c_1 = 0`` (even ``N``) and
  ``c_t = k / omega_{t-1}`` otherwise.

``r_{t-1}^2`` is injected as its expanded coordinate polynomial, so ``r``
generators never appear from rewriting; they only enter through explicit
input.  The remaining exchange rules are diagonal: ``x(i) L = q L x(i)``,
``r_i L = q L r_i``, ``K x(+-1) = q^(+-1) x(+-1) K`` and
``x(j) r_i = q^eps r_i x(j)`` with ``eps`` 0, 1 or -1 for ``|j| <= i``,
``j < -i`` or ``j > i``.

A monomial key also carries a bit mask of central radicals ``w(a)`` (square
roots of registered scalars); products of equal radicals are replaced by
their squares.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, Optional, Tuple

from .scalars import ScalarContext

__all__ = ["ExtendedAlgebra", "AlgebraElement", "UnsupportedInput", "scale_check"]

Key = Tuple[int, int, int, Tuple[int, ...], Tuple[int, ...]]


class UnsupportedInput(ValueError):
    """Input outside the sector an operation is defined on."""


def _add_into(target: dict, key, value):
    prev = target.get(key)
    if prev is None:
        target[key] = value
    else:
        v = prev + value
        if v:
            target[key] = v
        else:
            del target[key]


class ExtendedAlgebra:
    """Generators, relations and normal-ordering caches for one ``N``."""

    def __init__(self, ctx: ScalarContext):
        self.ctx = ctx
        self.N = ctx.N
        self.n = ctx.n
        self.indices = ctx.indices
        self.pos = {i: p for p, i in enumerate(self.indices)}
        self.invertible = frozenset({0} if ctx.odd else {-1, 1})
        self._spow = {}
        self.zero_x = (0,) * self.N
        self.zero_r = (0,) * self.n
        # commutator constants c_t for t > 0 (None when x(t), x(-t) commute)
        self.cconst: Dict[int, object] = {}
        for t in range(1, self.n + 1):
            if t == 1:
                self.cconst[t] = ctx.h if ctx.odd else None
            else:
                self.cconst[t] = ctx.k * ctx.omega[t - 1].inverse()
        # exponent of q picked up when x(j) passes r_i to the right: x(j) r_i = q^eps r_i x(j)
        self.r_eps = [[0 if abs(j) <= i else (1 if j < -i else -1)
                       for i in range(1, self.n + 1)] for j in self.indices]
        self._xletter_cache: Dict[Tuple[tuple, int, int], dict] = {}
        self._mono_cache: Dict[Tuple[Key, Key], dict] = {}
        self._r2_cache: Dict[int, dict] = {}
        self.radical_squares: Dict[int, object] = {}
        self.radical_names: Dict[int, str] = {}
        self.calculi: Dict[str, object] = {}

    # scalars --------------------------------------------------------------
    def s_pow(self, e: int):
        v = self._spow.get(e)
        if v is None:
            v = self._spow[e] = self.ctx.field.s_pow(e)
        return v

    def q_pow(self, e: int):
        return self.s_pow(2 * e)

    # radicals ---------------------------------------------------------------
    def register_radical(self, a: int, square) -> int:
        """Register the central symbol ``w(a)`` with ``w(a)^2 = square``."""
        bit = 1 << (a - 1)
        old = self.radical_squares.get(bit)
        if old is not None and old != square:
            raise ValueError(f"radical w({a}) already registered with another square")
        self.radical_squares[bit] = square
        self.radical_names[bit] = f"w({a})"
        self._mono_cache.clear()
        return bit

    # x sector -------------------------------------------------------------
    def _x_top(self, X):
        for p in range(self.N - 1, -1, -1):
            if X[p]:
                return p
        return -1

    def _x_times_letter(self, X: tuple, j: int, e: int) -> dict:
        """Normal-ordered ``X * x(j)^e``.  ``e`` may be negative only for invertible letters."""
        key = (X, j, e)
        hit = self._xletter_cache.get(key)
        if hit is not None:
            return hit
        pj = self.pos[j]
        tp = self._x_top(X)
        if tp <= pj:
            Y = list(X)
            Y[pj] += e
            res = {tuple(Y): self.ctx.one}
        elif j not in self.invertible and e != 1:
            res = {X: self.ctx.one}
            for _ in range(e):
                res = self.x_mul_poly_letter(res, j, 1)
        else:
            t = self.indices[tp]
            a = X[tp]
            Xp = list(X)
            Xp[tp] = 0
            Xp = tuple(Xp)
            res = {}
            c = self.cconst.get(t) if t == -j else None
            if t == -j and c is not None:
                # (x^t)^a x^-t = x^-t (x^t)^a + c (sum_{p<a} q^-2p) r_{t-1}^2 (x^t)^(a-1)
                for Y, v in self._x_times_letter(Xp, j, 1).items():
                    Y = list(Y)
                    Y[tp] = a
                    _add_into(res, tuple(Y), v)
                coef = c * sum((self.q_pow(-2 * p) for p in range(a)), self.ctx.zero)
                for Y, v in self.x_mul(Xp, self.r2(t - 1)).items():
                    Y = list(Y)
                    Y[tp] = a - 1
                    _add_into(res, tuple(Y), coef * v)
            else:
                factor = self.ctx.one if t == -j else self.q_pow(-a * e)
                for Y, v in self._x_times_letter(Xp, j, e).items():
                    Y = list(Y)
                    Y[tp] = a
                    _add_into(res, tuple(Y), factor * v)
        self._xletter_cache[key] = res
        return res

    def x_mul_poly_letter(self, P: dict, j: int, e: int) -> dict:
        out = {}
        for X, c in P.items():
            for Y, v in self._x_times_letter(X, j, e).items():
                _add_into(out, Y, c * v)
        return out

    def x_mul(self, X: tuple, P: dict) -> dict:
        """``X * P`` for an x-monomial ``X`` and x-polynomial ``P``."""
        out = {}
        for Y, c in P.items():
            for Z, v in self.x_mul_mono(X, Y).items():
                _add_into(out, Z, c * v)
        return out

    def x_mul_mono(self, X: tuple, Y: tuple) -> dict:
        res = {X: self.ctx.one}
        for p, e in enumerate(Y):
            if e:
                res = self.x_mul_poly_letter(res, self.indices[p], e)
        return res

    def x_poly_mul(self, P: dict, Q: dict) -> dict:
        out = {}
        for X, a in P.items():
            for Y, b in Q.items():
                ab = a * b
                for Z, v in self.x_mul_mono(X, Y).items():
                    _add_into(out, Z, ab * v)
        return out

    def r2(self, i: int) -> dict:
        """``r_i^2 = sum_{|k|,|l| <= i} g_kl x(k) x(l)`` as a normal-ordered x-polynomial."""
        hit = self._r2_cache.get(i)
        if hit is not None:
            return hit
        if i < (0 if self.ctx.odd else 1) or i > self.n:
            raise ValueError(f"r_{i} is not defined for N={self.N}")
        out = {}
        for kk in self.indices:
            if abs(kk) > i:
                continue
            g = self.ctx.q_pow(-self.ctx.rho[kk])
            X = [0] * self.N
            X[self.pos[kk]] = 1
            for Y, v in self._x_times_letter(tuple(X), -kk, 1).items():
                _add_into(out, Y, g * v)
        self._r2_cache[i] = out
        return out

    # full monomials ---------------------------------------------------------
    def mono_mul(self, m1: Key, m2: Key) -> dict:
        key = (m1, m2)
        hit = self._mono_cache.get(key)
        if hit is not None:
            return hit
        rad1, a1, b1, R1, X1 = m1
        rad2, a2, b2, R2, X2 = m2
        qe = 0
        if a2:
            qe += a2 * (sum(X1) + sum(R1))
        if b2:
            # x(1) K = q^-1 K x(1), x(-1) K = q K x(-1)
            qe += b2 * (X1[self.pos[-1]] - X1[self.pos[1]])
        if any(R2):
            for p, e in enumerate(X1):
                if e:
                    row = self.r_eps[p]
                    for i, g in enumerate(R2):
                        if g and row[i]:
                            qe += e * g * row[i]
        coef = self.q_pow(qe)
        common = rad1 & rad2
        if common:
            for bit, sq in self.radical_squares.items():
                if common & bit:
                    coef = coef * sq
        R = tuple(x + y for x, y in zip(R1, R2))
        head = (rad1 ^ rad2, a1 + a2, b1 + b2, R)
        if any(X2):
            xs = self.x_mul_mono(X1, X2)
        else:
            xs = {X1: self.ctx.one}
        res = {head + (X,): coef * v for X, v in xs.items()}
        self._mono_cache[key] = res
        return res

    # element constructors ----------------------------------------------------
    def element(self, terms: Optional[dict] = None) -> "AlgebraElement":
        return AlgebraElement(self, terms or {})

    def mono_key(self, alpha=0, beta=0, r=None, x=None, rad=0) -> Key:
        if beta and self.ctx.odd:
            raise UnsupportedInput("K only exists for even N")
        R = [0] * self.n
        for i, e in (r or {}).items():
            if not 1 <= i <= self.n:
                raise UnsupportedInput(f"r({i}) out of range 1..{self.n}")
            R[i - 1] += e
        X = [0] * self.N
        for i, e in (x or {}).items():
            if i not in self.pos:
                raise UnsupportedInput(f"x({i}) is not a coordinate for N={self.N}")
            if e < 0 and i not in self.invertible:
                raise UnsupportedInput(f"x({i}) is not invertible")
            X[self.pos[i]] += e
        return (rad, alpha, beta, tuple(R), tuple(X))

    def monomial(self, coef=None, **kw) -> "AlgebraElement":
        coef = self.ctx.one if coef is None else coef
        return AlgebraElement(self, {self.mono_key(**kw): coef})

    @property
    def one(self) -> "AlgebraElement":
        return self.monomial()

    @property
    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    def scalar(self, c) -> "AlgebraElement":
        return self.monomial(self.ctx.field.const(c) if not hasattr(c, "inverse") else c)

    def x(self, i: int, e: int = 1) -> "AlgebraElement":
        return self.monomial(x={i: e})

    def r(self, i: int, e: int = 1) -> "AlgebraElement":
        """``r_i^e``; for odd ``N`` ``r_0`` is ``x(0)``."""
        if i == 0 and self.ctx.odd:
            return self.x(0, e)
        return self.monomial(r={i: e})

    def L(self, e: int = 1) -> "AlgebraElement":
        return self.monomial(alpha=e)

    def K(self, e: int = 1) -> "AlgebraElement":
        return self.monomial(beta=e)

    def radical(self, a: int) -> "AlgebraElement":
        bit = 1 << (a - 1)
        if bit not in self.radical_squares:
            raise UnsupportedInput(f"radical w({a}) is not registered")
        return AlgebraElement(self, {(bit, 0, 0, self.zero_r, self.zero_x): self.ctx.one})

    def r2_element(self, i: int) -> "AlgebraElement":
        return AlgebraElement(self, {(0, 0, 0, self.zero_r, X): v for X, v in self.r2(i).items()})

    # zero test ---------------------------------------------------------------
    def is_zero(self, u: "AlgebraElement") -> bool:
        """Decide ``u == 0`` in the extended algebra.

        Terms are split by radical mask, ``(L, K)`` degree and the parity
        vector of the ``r`` exponents.  In every class the element is
        right-multiplied by a power of the ``r`` generators that makes all
        ``r`` exponents even and non-negative; the even powers are then
        expanded into coordinates and the resulting PBW coefficients must
        all vanish.
        """
        if not u.terms:
            return True
        classes = defaultdict(dict)
        for key, c in u.terms.items():
            rad, a, b, R, X = key
            classes[(rad, a, b, tuple(g & 1 for g in R))][key] = c
        for cls_terms in classes.values():
            if not self._class_is_zero(cls_terms):
                return False
        return True

    def _class_is_zero(self, terms: dict) -> bool:
        if len(terms) == 1:
            return False
        Rs = [key[3] for key in terms]
        shift = tuple(-min(R[i] for R in Rs) for i in range(self.n))
        if any(shift):
            shifted = (AlgebraElement(self, terms) * self.monomial(r={i + 1: s for i, s in enumerate(shift) if s})).terms
        else:
            shifted = terms
        # all r exponents now even and >= 0; expand r_i^2 into coordinates
        out = {}
        for (rad, a, b, R, X), c in shifted.items():
            poly = {X: c}
            for i, g in enumerate(R):
                for _ in range(g // 2):
                    poly = self.x_poly_mul(self.r2(i + 1), poly)
            for Y, v in poly.items():
                _add_into(out, Y, v)
        return not out

    # text ------------------------------------------------------------------------
    def mono_text(self, key: Key) -> str:
        rad, a, b, R, X = key
        parts = []
        for bit, name in sorted(self.radical_names.items()):
            if rad & bit:
                parts.append(name)

        def pw(name, e):
            return name if e == 1 else f"{name}^{e}"

        if a:
            parts.append(pw("L", a))
        if b:
            parts.append(pw("K", b))
        for i, g in enumerate(R):
            if g:
                parts.append(pw(f"r({i + 1})", g))
        for p, e in enumerate(X):
            if e:
                parts.append(pw(f"x({self.indices[p]})", e))
        return "*".join(parts) if parts else "1"


def _scalar_text(c) -> str:
    return c.to_text() if hasattr(c, "to_text") else str(c)


class AlgebraElement:
    """Finite linear combination of normal-ordered monomials."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: ExtendedAlgebra, terms: dict):
        self.alg = alg
        self.terms = {k: v for k, v in terms.items() if v}

    def _wrap(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            return other
        return self.alg.monomial(self.alg.ctx.field.const(other)
                                 if isinstance(other, (int,)) else other)

    def __add__(self, other):
        other = self._wrap(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(out, k, v)
        return AlgebraElement(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def scale(self, c) -> "AlgebraElement":
        if not c:
            return AlgebraElement(self.alg, {})
        return AlgebraElement(self.alg, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other if hasattr(other, "inverse") else self.alg.ctx.field.const(other))
        out = {}
        mono_mul = self.alg.mono_mul
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                c = c1 * c2
                for k, v in mono_mul(k1, k2).items():
                    _add_into(out, k, c * v)
        return AlgebraElement(self.alg, out)

    def __rmul__(self, other):
        return self.scale(other if hasattr(other, "inverse") else self.alg.ctx.field.const(other))

    def __pow__(self, e: int):
        if e < 0:
            if len(self.terms) != 1:
                raise UnsupportedInput("only monomials can be inverted")
            (key, c), = self.terms.items()
            rad, a, b, R, X = key
            if rad:
                raise UnsupportedInput("radicals are not inverted")
            for p, ex in enumerate(X):
                if ex and self.alg.indices[p] not in self.alg.invertible:
                    raise UnsupportedInput(f"x({self.alg.indices[p]}) is not invertible")
            inv = AlgebraElement(self.alg, {self.alg.mono_key(): c.inverse()})
            # reverse product of inverted generators
            for p in range(self.alg.N - 1, -1, -1):
                if X[p]:
                    inv = inv * self.alg.x(self.alg.indices[p], -X[p])
            for i in range(self.alg.n - 1, -1, -1):
                if R[i]:
                    inv = inv * self.alg.r(i + 1, -R[i])
            if b:
                inv = inv * self.alg.K(-b)
            if a:
                inv = inv * self.alg.L(-a)
            return inv ** (-e)
        out = self.alg.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def commutator(self, other) -> "AlgebraElement":
        other = self._wrap(other)
        return self * other - other * self

    def is_zero(self) -> bool:
        return self.alg.is_zero(self)

    def is_syntactic_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, (AlgebraElement, int)):
            return NotImplemented
        return (self - self._wrap(other)).is_zero()

    __hash__ = None

    def map_scalars(self, fn) -> "AlgebraElement":
        return AlgebraElement(self.alg, {k: fn(v) for k, v in self.terms.items()})

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for key, c in self.sorted_terms():
            mono = self.alg.mono_text(key)
            ctext = _scalar_text(c)
            if mono == "1":
                body = f"({ctext})" if any(ch in ctext for ch in "+-/ ") else ctext
            elif ctext == "1":
                body = mono
            elif ctext == "-1":
                body = "-" + mono
            else:
                body = f"({ctext})*{mono}"
            pieces.append(body)
        text = pieces[0]
        for p in pieces[1:]:
            text += " - " + p[1:] if p.startswith("-") and not p.startswith("-(") else " + " + p
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"AlgebraElement({self.to_text()})"

    def __len__(self):
        return len(self.terms)

    def has_r(self) -> bool:
        return any(any(key[3]) for key in self.terms)

    def degree_bounds(self):
        return [sum(key[4]) for key in self.terms]


def scale_check(u: AlgebraElement, i: int) -> AlgebraElement:
    """``u * r_i`` in normal form (the shift used by the zero test)."""
    if not 1 <= i <= u.alg.n:
        raise UnsupportedInput(f"r({i}) is not a radial generator for N={u.alg.N}")
    return u * u.alg.r(i)
