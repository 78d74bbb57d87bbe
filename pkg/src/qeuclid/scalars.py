"""Exact coefficient field for the quantum Euclidean spaces.

Scalars are rational functions in ``s = q^(1/2)`` with Gaussian-rational
coefficients.  A :class:`QScalar` is stored as ``(a + i*b) / d`` where ``a``,
``b`` and ``d`` are polynomials in ``s`` over the rationals, ``d`` is monic and
``gcd(a, b, d) == 1``.  That representative is unique, so equality is plain
structural equality.

The same downstream code can run over :class:`GaussRational` numbers instead
(the value of every scalar at one fixed rational ``s``); see
:class:`SampledField`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple, Union

from flint import fmpq, fmpq_poly

__all__ = [
    "PoleError",
    "GaussRational",
    "QScalar",
    "ExactField",
    "SampledField",
    "ScalarContext",
    "context_constant",
    "evaluate",
    "classical_limit",
    "index_set",
]


class PoleError(ZeroDivisionError):
    """Raised when a scalar is evaluated at a root of its denominator."""


def _q(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, str):
        f = Fraction(x)
        return fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot coerce {x!r} to a rational")


_ZQ = fmpq(0)


class GaussRational:
    """``re + i*im`` with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _make(cls, re: fmpq, im: fmpq) -> "GaussRational":
        obj = cls.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def _coerce(self, other):
        if isinstance(other, GaussRational):
            return other
        if isinstance(other, (int, Fraction, fmpq)):
            return GaussRational._make(_q(other), _ZQ)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussRational._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussRational._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return GaussRational._make(-self.re, -self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.im and not o.im:
            return GaussRational._make(self.re * o.re, _ZQ)
        return GaussRational._make(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussRational":
        if not self.im:
            if not self.re:
                raise ZeroDivisionError("inverse of zero")
            return GaussRational._make(1 / self.re, _ZQ)
        n = self.re * self.re + self.im * self.im
        return GaussRational._make(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = GaussRational._make(fmpq(1), _ZQ)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self) -> bool:
        return not self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussRational":
        return GaussRational._make(self.re, -self.im)

    def to_text(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"

    def __repr__(self):
        return f"GaussRational({self.to_text()})"

    __str__ = to_text


_P0 = fmpq_poly([])
_P1 = fmpq_poly([1])
_S = fmpq_poly([0, 1])


def _normalize(a: fmpq_poly, b: fmpq_poly, d: fmpq_poly):
    if not d:
        raise ZeroDivisionError("zero denominator")
    if not a and not b:
        return _P0, _P0, _P1
    if d.degree() > 0:
        g = d.gcd(a) if not b else d.gcd(a).gcd(b)
        if g.degree() > 0:
            a = a // g
            if b:
                b = b // g
            d = d // g
    lc = d.leading_coefficient()
    if lc != 1:
        a = a / lc
        if b:
            b = b / lc
        d = d / lc
    return a, b, d


def _laurent_terms(p: fmpq_poly, shift: int):
    """Nonzero (exponent, coefficient) pairs of ``p * s^shift``, highest first."""
    cs = p.coeffs()
    return [(e + shift, c) for e, c in reversed(list(enumerate(cs))) if c]


def _s_power_text(e: int) -> str:
    if e == 0:
        return ""
    if e % 2 == 0:
        v = e // 2
        return "q" if v == 1 else f"q^{v}"
    return f"q^({e}/2)"


class QScalar:
    """Element of the rational function field Q(i)(s), s = q^(1/2)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: fmpq_poly = _P0, b: fmpq_poly = _P0, d: fmpq_poly = _P1):
        self.a, self.b, self.d = _normalize(a, b, d)

    @classmethod
    def _raw(cls, a, b, d) -> "QScalar":
        obj = cls.__new__(cls)
        obj.a = a
        obj.b = b
        obj.d = d
        return obj

    # constructors -----------------------------------------------------
    @classmethod
    def const(cls, value) -> "QScalar":
        if isinstance(value, QScalar):
            return value
        if isinstance(value, GaussRational):
            return cls._raw(fmpq_poly([value.re]) if value.re else _P0,
                            fmpq_poly([value.im]) if value.im else _P0, _P1)
        v = _q(value)
        return cls._raw(fmpq_poly([v]) if v else _P0, _P0, _P1)

    @classmethod
    def s_pow(cls, e: int) -> "QScalar":
        if e >= 0:
            return cls._raw(_S ** e, _P0, _P1)
        return cls._raw(_P1, _P0, _S ** (-e))

    @classmethod
    def imag_unit(cls) -> "QScalar":
        return cls._raw(_P0, _P1, _P1)

    @classmethod
    def from_laurent(cls, terms: Dict[int, object], imag: Dict[int, object] | None = None,
                     den: Dict[int, object] | None = None) -> "QScalar":
        """Build from sparse ``{exponent of s: rational}`` maps (Laurent allowed)."""

        def poly(m):
            if not m:
                return _P0, 0
            lo = min(m)
            shift = min(lo, 0)
            cs = [0] * (max(m) - shift + 1)
            for e, c in m.items():
                cs[e - shift] = _q(c)
            return fmpq_poly(cs), shift

        pa, sa = poly(terms)
        pb, sb = poly(imag or {})
        lo = min(sa, sb)
        a = pa * _S ** (sa - lo) if pa else _P0
        b = pb * _S ** (sb - lo) if pb else _P0
        d = _S ** (-lo)
        if den is not None:
            pd, sd = poly(den)
            # x / (pd s^sd) = x s^-sd / pd
            if sd < 0:
                a, b = a * _S ** (-sd), b * _S ** (-sd)
            else:
                d = d * _S ** sd
            d = d * pd
        return cls(a, b, d)

    # predicates --------------------------------------------------------
    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_zero(self) -> bool:
        return not self

    def is_real(self) -> bool:
        return not self.b

    def is_one(self) -> bool:
        return self.a == _P1 and not self.b and self.d == _P1

    def __eq__(self, other):
        if not isinstance(other, QScalar):
            try:
                other = QScalar.const(other)
            except TypeError:
                return False
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        return hash((str(self.a), str(self.b), str(self.d)))

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QScalar):
            other = QScalar.const(other)
        if not other:
            return self
        if not self:
            return other
        d1, d2 = self.d, other.d
        if d1 == d2:
            a = self.a + other.a
            b = self.b + other.b
            if d1 == _P1:
                return QScalar._raw(a, b, _P1)
            return QScalar(a, b, d1)
        g = d1.gcd(d2)
        if g == _P1:
            return QScalar(self.a * d2 + other.a * d1, self.b * d2 + other.b * d1, d1 * d2)
        e1, e2 = d2 // g, d1 // g
        return QScalar(self.a * e1 + other.a * e2, self.b * e1 + other.b * e2, d1 * e1)

    __radd__ = __add__

    def __neg__(self):
        return QScalar._raw(-self.a, -self.b, self.d)

    def __sub__(self, other):
        if not isinstance(other, QScalar):
            other = QScalar.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return QScalar.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, QScalar):
            other = QScalar.const(other)
        if not self or not other:
            return _ZERO
        if self.b or other.b:
            a = self.a * other.a - self.b * other.b
            b = self.a * other.b + self.b * other.a
        else:
            a = self.a * other.a
            b = _P0
        d = self.d * other.d
        if d == _P1:
            return QScalar._raw(a, b, _P1)
        return QScalar(a, b, d)

    __rmul__ = __mul__

    def inverse(self) -> "QScalar":
        if not self:
            raise ZeroDivisionError("inverse of zero scalar")
        if not self.b:
            return QScalar(self.d, _P0, self.a)
        n = self.a * self.a + self.b * self.b
        return QScalar(self.d * self.a, -(self.d * self.b), n)

    def __truediv__(self, other):
        if not isinstance(other, QScalar):
            other = QScalar.const(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QScalar.const(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = _ONE
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "QScalar":
        return QScalar._raw(self.a, -self.b, self.d)

    def invert_s(self) -> "QScalar":
        """Substitute ``s -> 1/s`` (so ``q -> 1/q``)."""
        top = max(self.a.degree(), self.b.degree(), self.d.degree(), 0)

        def rev(p):
            cs = p.coeffs()
            cs = cs + [0] * (top + 1 - len(cs))
            return fmpq_poly(cs[::-1])

        return QScalar(rev(self.a), rev(self.b), rev(self.d))

    # evaluation --------------------------------------------------------
    def evaluate(self, s_value) -> GaussRational:
        if not isinstance(s_value, GaussRational):
            s_value = GaussRational(s_value)
        if not s_value.im:
            x = s_value.re
            den = self.d(x)
            if not den:
                raise PoleError(f"pole at s = {s_value}")
            return GaussRational._make(self.a(x) / den, self.b(x) / den)

        def horner(p):
            acc = GaussRational()
            for c in reversed(p.coeffs()):
                acc = acc * s_value + GaussRational._make(c, _ZQ)
            return acc

        den = horner(self.d)
        if not den:
            raise PoleError(f"pole at s = {s_value}")
        return (horner(self.a) + horner(self.b) * GaussRational(0, 1)) / den

    # text ----------------------------------------------------------------
    def _split_den(self):
        # den = s^m * rest, rest(0) != 0
        cs = self.d.coeffs()
        m = 0
        while m < len(cs) and not cs[m]:
            m += 1
        rest = fmpq_poly(cs[m:]) if m else self.d
        return m, rest

    def to_text(self) -> str:
        """Canonical text: sums of ``c*q^e`` terms, ``(num)/(den)`` when needed."""
        m, rest = self._split_den()
        re_terms = dict(_laurent_terms(self.a, -m))
        im_terms = dict(_laurent_terms(self.b, -m))
        num = _terms_text(re_terms, im_terms)
        if rest == _P1:
            return num
        den = _terms_text(dict(_laurent_terms(rest, 0)), {})
        if " " in num or num.startswith("("):
            num = f"({num})"
        return f"{num}/({den})"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"QScalar({self.to_text()})"


def _coef_text(re: fmpq, im: fmpq) -> str:
    if not im:
        return str(re)
    return GaussRational._make(re, im).to_text()


def _terms_text(re_terms, im_terms) -> str:
    exps = sorted(set(re_terms) | set(im_terms), reverse=True)
    if not exps:
        return "0"
    parts = []
    for e in exps:
        re = re_terms.get(e, _ZQ)
        im = im_terms.get(e, _ZQ)
        power = _s_power_text(e)
        neg = False
        if (not im and re < 0) or (not re and im < 0):
            neg, re, im = True, -re, -im
        coef = _coef_text(re, im)
        if not power:
            body = coef
        elif coef == "1":
            body = power
        else:
            body = f"{coef}*{power}"
        parts.append(("-" if neg else "+", body))
    text = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_ZERO = QScalar._raw(_P0, _P0, _P1)
_ONE = QScalar._raw(_P1, _P0, _P1)


def evaluate(a: QScalar, s_value) -> GaussRational:
    """Exact value of ``a`` at ``s = s_value``; :class:`PoleError` at a pole."""
    return a.evaluate(s_value)


def classical_limit(a: QScalar) -> GaussRational:
    """Value at ``q = 1``.  Constants such as ``1/h`` raise :class:`PoleError`."""
    return a.evaluate(GaussRational(1))


# --------------------------------------------------------------------------
# fields: exact rational functions, or values at a sample point


class ExactField:
    """Scalars are :class:`QScalar` rational functions of ``s``."""

    exact = True
    sample_point = None

    def const(self, value) -> QScalar:
        return QScalar.const(value)

    def s_pow(self, e: int) -> QScalar:
        return QScalar.s_pow(e)

    def imag_unit(self) -> QScalar:
        return QScalar.imag_unit()

    def lift(self, value: QScalar) -> QScalar:
        return value

    def sqrt(self, value: QScalar):
        """Square root inside the field, or ``None`` when ``value`` is not a square.

        For ``-(square)`` the root with positive imaginary leading coefficient
        is returned.
        """
        if not value.is_real():
            return None
        sign = 1
        a = value.a
        if a.leading_coefficient() < 0:
            sign, a = -1, -a
        try:
            ra = a.sqrt()
            rd = value.d.sqrt()
        except Exception:
            return None
        root = QScalar(ra, _P0, rd)
        if sign < 0:
            root = root * QScalar.imag_unit()
        return root

    def __eq__(self, other):
        return isinstance(other, ExactField)

    def __hash__(self):
        return hash("ExactField")

    def __repr__(self):
        return "ExactField()"


class SampledField:
    """Scalars are :class:`GaussRational` values at one fixed ``s``."""

    exact = False

    def __init__(self, s_value):
        s_value = s_value if isinstance(s_value, GaussRational) else GaussRational(s_value)
        if not s_value:
            raise PoleError("s = 0 is a pole of q^(-1/2)")
        self.sample_point = s_value

    def const(self, value) -> GaussRational:
        if isinstance(value, GaussRational):
            return value
        if isinstance(value, QScalar):
            return value.evaluate(self.sample_point)
        return GaussRational(value)

    def s_pow(self, e: int) -> GaussRational:
        return self.sample_point ** e

    def imag_unit(self) -> GaussRational:
        return GaussRational(0, 1)

    def lift(self, value):
        if isinstance(value, QScalar):
            return value.evaluate(self.sample_point)
        return value

    def sqrt(self, value):
        # radicals are kept symbolic in sampled mode
        return None

    def reciprocal(self) -> "SampledField":
        """The field sampled at ``1/s``."""
        return SampledField(self.sample_point.inverse())

    def __eq__(self, other):
        return isinstance(other, SampledField) and other.sample_point == self.sample_point

    def __hash__(self):
        return hash(("SampledField", self.sample_point))

    def __repr__(self):
        return f"SampledField(s={self.sample_point})"


Scalar = Union[QScalar, GaussRational]


def index_set(N: int) -> Tuple[int, ...]:
    """Coordinate indices ``-n..n``, omitting 0 for even ``N``."""
    n = N // 2
    if N % 2:
        return tuple(range(-n, n + 1))
    return tuple(i for i in range(-n, n + 1) if i != 0)


@dataclass(frozen=True)
class ScalarContext:
    """Per-dimension constants: ``rho``, ``omega``, ``h`` and ``k``.

    ``k_convention='standard'`` uses ``k = q - q^-1``; ``'h'`` sets ``k = h``
    (a literal reading of a duplicated definition, kept as a negative control).
    """

    N: int
    k_convention: str = "standard"
    field: object = field(default_factory=ExactField, compare=False)

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N!r}")
        if self.k_convention not in ("standard", "h"):
            raise ValueError(f"unknown k convention {self.k_convention!r}")
        n = self.N // 2
        idx = index_set(self.N)
        if self.N % 2:
            # rho_{-n} = n - 1/2, ..., rho_{-1} = 1/2, rho_0 = 0, rho_1 = -1/2, ...
            half = Fraction(1, 2)
            rho = {i: (Fraction(0) if i == 0 else -i + (half if i > 0 else -half)) for i in idx}
        else:
            # rho_{-n} = n - 1, ..., rho_{-1} = 0, rho_1 = 0, ..., rho_n = 1 - n
            rho = {i: (Fraction(-i - 1) if i < 0 else Fraction(1 - i)) for i in idx}
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "rho", rho)
        f = self.field
        h = f.s_pow(1) - f.s_pow(-1)
        k = f.s_pow(2) - f.s_pow(-2) if self.k_convention == "standard" else h
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "k", k)
        omega = {i: self.q_pow(rho[i]) + self.q_pow(-rho[i]) for i in idx}
        object.__setattr__(self, "omega", omega)

    @property
    def parity(self) -> str:
        return "odd" if self.N % 2 else "even"

    @property
    def odd(self) -> bool:
        return bool(self.N % 2)

    @property
    def one(self):
        return self.field.const(1)

    @property
    def zero(self):
        return self.field.const(0)

    @property
    def q(self):
        return self.field.s_pow(2)

    def q_pow(self, e) -> Scalar:
        """``q^e`` for integer or half-integer ``e``."""
        e2 = Fraction(e) * 2
        if e2.denominator != 1:
            raise ValueError(f"q exponent {e} is not a half-integer")
        return self.field.s_pow(int(e2))

    def const(self, value):
        return self.field.const(value)

    def with_field(self, fld) -> "ScalarContext":
        return ScalarContext(self.N, self.k_convention, fld)

    def index_position(self, i: int) -> int:
        return self.indices.index(i)


def context_constant(ctx: ScalarContext, name: str, index: int | None = None):
    """Named constant ``rho``, ``omega``, ``h`` or ``k`` of ``ctx``."""
    if name in ("rho", "omega"):
        if index is None:
            raise ValueError(f"{name} needs an index")
        if index not in ctx.indices:
            raise IndexError(f"index {index} out of range for N={ctx.N}")
        if name == "rho":
            return ctx.rho[index]
        return ctx.omega[index]
    if name == "h":
        return ctx.h
    if name == "k":
        return ctx.k
    raise ValueError(f"unknown constant {name!r}")
