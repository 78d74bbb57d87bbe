"""Braid matrix, q-metric and spectral projectors of SO_q(N).

Tensors are sparse maps over signed coordinate indices.  A
:class:`SparseTensor4` ``T`` holds ``T^{ij}_{kl}`` under the key
``(i, j, k, l)`` and acts on the tensor square from the upper pair to the
lower pair, so composition is ``(AB)^{ij}_{kl} = A^{ij}_{mn} B^{mn}_{kl}``.
"""
from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
from itertools import product
from typing import Dict, Tuple

from .report import VerificationReport
from .scalars import ScalarContext

__all__ = [
    "SparseTensor2",
    "SparseTensor4",
    "SparseTensor6",
    "build_metric",
    "build_rhat",
    "rhat_inverse",
    "projector",
    "projector_trace",
    "check_braid",
    "check_projectors",
    "check_gtt",
    "classical_ranks",
    "solve_inverse",
]


def _clean(entries):
    return {key: v for key, v in entries.items() if v}


class SparseTensor2:
    """Sparse ``N x N`` array ``(i, j) -> scalar``."""

    __slots__ = ("entries",)

    def __init__(self, entries: Dict[Tuple[int, int], object]):
        self.entries = _clean(entries)

    def __getitem__(self, key):
        return self.entries.get(key)

    def get(self, i, j, default=None):
        return self.entries.get((i, j), default)

    def items(self):
        return sorted(self.entries.items())

    def __len__(self):
        return len(self.entries)

    def to_records(self):
        return [{"i": i, "j": j, "value": str(v)} for (i, j), v in self.items()]


class SparseTensor4:
    """Sparse map on the tensor square, keyed ``(i, j, k, l)``."""

    __slots__ = ("entries", "_rows")

    def __init__(self, entries: Dict[Tuple[int, int, int, int], object]):
        self.entries = _clean(entries)
        self._rows = None

    @property
    def rows(self):
        if self._rows is None:
            rows = defaultdict(dict)
            for (i, j, k, l), v in self.entries.items():
                rows[(i, j)][(k, l)] = v
            self._rows = dict(rows)
        return self._rows

    def get(self, i, j, k, l, default=None):
        return self.entries.get((i, j, k, l), default)

    def __getitem__(self, key):
        return self.entries.get(key)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return sorted(self.entries.items())

    @classmethod
    def identity(cls, ctx: ScalarContext) -> "SparseTensor4":
        one = ctx.one
        return cls({(i, j, i, j): one for i in ctx.indices for j in ctx.indices})

    @classmethod
    def flip(cls, ctx: ScalarContext) -> "SparseTensor4":
        one = ctx.one
        return cls({(i, j, j, i): one for i in ctx.indices for j in ctx.indices})

    def __matmul__(self, other: "SparseTensor4") -> "SparseTensor4":
        out = {}
        orows = other.rows
        for (i, j), row in self.rows.items():
            for (m, n), a in row.items():
                brow = orows.get((m, n))
                if not brow:
                    continue
                for (k, l), b in brow.items():
                    key = (i, j, k, l)
                    prev = out.get(key)
                    out[key] = a * b if prev is None else prev + a * b
        return SparseTensor4(out)

    def _combine(self, other, sign):
        out = dict(self.entries)
        for key, v in other.entries.items():
            prev = out.get(key)
            v = v if sign > 0 else -v
            out[key] = v if prev is None else prev + v
        return SparseTensor4(out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, c) -> "SparseTensor4":
        return SparseTensor4({key: c * v for key, v in self.entries.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def transpose(self) -> "SparseTensor4":
        return SparseTensor4({(k, l, i, j): v for (i, j, k, l), v in self.entries.items()})

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, SparseTensor4):
            return NotImplemented
        return (self - other).is_zero()

    def map_scalars(self, fn) -> "SparseTensor4":
        return SparseTensor4({key: fn(v) for key, v in self.entries.items()})

    def to_records(self):
        return [{"i": i, "j": j, "k": k, "l": l, "value": str(v)}
                for (i, j, k, l), v in self.items()]

    def max_witness(self):
        """Deterministic nonzero entry, or ``None``."""
        if not self.entries:
            return None
        key = min(self.entries)
        return f"{key}: {self.entries[key]}"


class SparseTensor6:
    """Sparse operator on triple tensors, keyed ``(a, b, c, d, e, f)``."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = _clean(entries)

    @classmethod
    def from_12(cls, t: SparseTensor4, ctx: ScalarContext) -> "SparseTensor6":
        return cls({(i, j, m, k, l, m): v for (i, j, k, l), v in t.entries.items()
                    for m in ctx.indices})

    @classmethod
    def from_23(cls, t: SparseTensor4, ctx: ScalarContext) -> "SparseTensor6":
        return cls({(m, i, j, m, k, l): v for (i, j, k, l), v in t.entries.items()
                    for m in ctx.indices})

    def __matmul__(self, other: "SparseTensor6") -> "SparseTensor6":
        rows = defaultdict(list)
        for key, v in other.entries.items():
            rows[key[:3]].append((key[3:], v))
        out = {}
        for key, a in self.entries.items():
            for tail, b in rows.get(key[3:], ()):
                k = key[:3] + tail
                prev = out.get(k)
                out[k] = a * b if prev is None else prev + a * b
        return SparseTensor6(out)

    def __sub__(self, other):
        out = dict(self.entries)
        for key, v in other.entries.items():
            prev = out.get(key)
            out[key] = -v if prev is None else prev - v
        return SparseTensor6(out)

    def is_zero(self):
        return not self.entries


# ---------------------------------------------------------------------------
# construction


def build_metric(ctx: ScalarContext) -> Tuple[SparseTensor2, SparseTensor2]:
    """``(g_ij, g^ij)`` with ``g_ij = q^(-rho_i) delta_{i,-j}``."""
    lower = {(i, -i): ctx.q_pow(-ctx.rho[i]) for i in ctx.indices}
    # g^{-i,i} = q^{rho_i} = q^{-rho_{-i}}: same values as the lower metric
    upper = {(i, -i): ctx.q_pow(-ctx.rho[i]) for i in ctx.indices}
    return SparseTensor2(lower), SparseTensor2(upper)


def build_rhat(ctx: ScalarContext) -> SparseTensor4:
    """Braid matrix of the B/D series in the ``-n..n`` index convention.

    ``R^ = q sum_{i!=0} e_ii (x) e_ii + e_00 (x) e_00 + sum_{i!=+-j} e_ji (x) e_ij
    + q^-1 sum_{i!=0} e_{-i,i} (x) e_{i,-i}
    + k sum_{i<j} (e_ii (x) e_jj - q^(rho_j - rho_i) e_{-j,i} (x) e_{j,-i})``
    with ``k = q - q^-1`` (independent of the configured k convention).
    """
    return _rhat_cached(ctx.N, ctx.field)


@lru_cache(maxsize=64)
def _rhat_cached(N: int, fld) -> SparseTensor4:
    ctx = ScalarContext(N, "standard", fld)
    idx = ctx.indices
    q = ctx.q
    kk = q - q.inverse() if hasattr(q, "inverse") else q - 1 / q
    out: Dict[Tuple[int, int, int, int], object] = {}

    def add(key, v):
        prev = out.get(key)
        out[key] = v if prev is None else prev + v

    for i in idx:
        if i != 0:
            add((i, i, i, i), q)
            add((-i, i, i, -i), q.inverse())
        else:
            add((0, 0, 0, 0), ctx.one)
    for i, j in product(idx, idx):
        if i != j and i != -j:
            add((j, i, i, j), ctx.one)
    for i, j in product(idx, idx):
        if i < j:
            add((i, j, i, j), kk)
            add((-j, j, i, -i), -kk * ctx.q_pow(ctx.rho[j] - ctx.rho[i]))
    return SparseTensor4(out)


def projector_trace(ctx: ScalarContext):
    """``g^{sm} g_{sm}``."""
    lower, upper = build_metric(ctx)
    total = ctx.zero
    for (s, m), v in upper.entries.items():
        total = total + v * lower.get(s, m, ctx.zero)
    return total


def _pt_from_metric(ctx: ScalarContext) -> SparseTensor4:
    lower, upper = build_metric(ctx)
    norm = projector_trace(ctx).inverse()
    return SparseTensor4({(i, j, k, l): norm * gu * gl
                          for (i, j), gu in upper.entries.items()
                          for (k, l), gl in lower.entries.items()})


def projector(ctx: ScalarContext, kind: str, rhat: SparseTensor4 | None = None) -> SparseTensor4:
    """Spectral projector ``s``, ``a`` or ``t`` of the braid matrix.

    ``t`` comes from the metric, ``s`` and ``a`` from Lagrange interpolation
    on the eigenvalues ``q``, ``-q^-1``, ``q^(1-N)``.
    """
    if kind == "t":
        return _pt_from_metric(ctx)
    if kind not in ("s", "a", "t_spectral"):
        raise ValueError(f"unknown projector kind {kind!r}")
    R = rhat if rhat is not None else build_rhat(ctx)
    one = SparseTensor4.identity(ctx)
    q = ctx.q
    ev = {"s": q, "a": -q.inverse(), "t_spectral": ctx.q_pow(1 - ctx.N)}
    target = ev[kind]
    out = one
    for name, lam in ev.items():
        if name == kind:
            continue
        factor = (target - lam).inverse()
        out = (R - one.scale(lam)).scale(factor) @ out
    return out


def rhat_inverse(ctx: ScalarContext) -> SparseTensor4:
    """``q^-1 P_s - q P_a + q^(N-1) P_t``."""
    q = ctx.q
    return (projector(ctx, "s").scale(q.inverse())
            - projector(ctx, "a").scale(q)
            + projector(ctx, "t").scale(ctx.q_pow(ctx.N - 1)))


def solve_inverse(ctx: ScalarContext, t: SparseTensor4) -> SparseTensor4:
    """Inverse by Gauss-Jordan elimination on the dense ``N^2 x N^2`` matrix."""
    pairs = [(i, j) for i in ctx.indices for j in ctx.indices]
    size = len(pairs)
    zero, one = ctx.zero, ctx.one
    m = [[t.get(*a, *b, zero) for b in pairs] + [one if a == b else zero for b in pairs]
         for a in pairs]
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular tensor")
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col].inverse()
        m[col] = [v * inv if v else v for v in m[col]]
        for r in range(size):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b if b else a for a, b in zip(m[r], m[col])]
    return SparseTensor4({(*a, *b): m[ra][size + cb]
                          for ra, a in enumerate(pairs) for cb, b in enumerate(pairs)})


# ---------------------------------------------------------------------------
# checks


def check_braid(ctx: ScalarContext, rhat: SparseTensor4 | None = None,
                report: VerificationReport | None = None, label: str = "rmatrix.braid"):
    R = rhat if rhat is not None else build_rhat(ctx)
    r12 = SparseTensor6.from_12(R, ctx)
    r23 = SparseTensor6.from_23(R, ctx)
    diff = (r12 @ r23 @ r12) - (r23 @ r12 @ r23)
    report = report if report is not None else VerificationReport()
    witness = None
    if diff.entries:
        key = min(diff.entries)
        witness = f"{key}: {diff.entries[key]}"
    report.add(f"{label}.N{ctx.N}", diff.is_zero(), witness)
    return report


def check_projectors(ctx: ScalarContext, report: VerificationReport | None = None):
    """Idempotence, orthogonality, completeness and the spectral decomposition."""
    report = report if report is not None else VerificationReport()
    R = build_rhat(ctx)
    P = {k: projector(ctx, k, R) for k in ("s", "a", "t")}
    one = SparseTensor4.identity(ctx)
    tag = f"N{ctx.N}"
    report.add(f"rmatrix.symmetric.{tag}", (R - R.transpose()).is_zero(),
               (R - R.transpose()).max_witness())
    pt_spectral = projector(ctx, "t_spectral", R)
    d = pt_spectral - P["t"]
    report.add(f"rmatrix.ptrace_matches_metric.{tag}", d.is_zero(), d.max_witness())
    for k, p in P.items():
        d = p @ p - p
        report.add(f"rmatrix.idempotent.{k}.{tag}", d.is_zero(), d.max_witness())
    for a, b in (("s", "a"), ("s", "t"), ("a", "t"), ("a", "s"), ("t", "s"), ("t", "a")):
        d = P[a] @ P[b]
        report.add(f"rmatrix.orthogonal.{a}{b}.{tag}", d.is_zero(), d.max_witness())
    d = P["s"] + P["a"] + P["t"] - one
    report.add(f"rmatrix.complete.{tag}", d.is_zero(), d.max_witness())
    q = ctx.q
    recon = P["s"].scale(q) - P["a"].scale(q.inverse()) + P["t"].scale(ctx.q_pow(1 - ctx.N))
    d = recon - R
    report.add(f"rmatrix.decomposition.{tag}", d.is_zero(), d.max_witness())
    Rinv = rhat_inverse(ctx)
    d = R @ Rinv - one
    report.add(f"rmatrix.inverse.{tag}", d.is_zero(), d.max_witness())
    return report


def _gtt_residuals(ctx: ScalarContext, R: SparseTensor4, Rinv: SparseTensor4):
    lower, upper = build_metric(ctx)
    idx = ctx.indices
    zero = ctx.zero
    out = {}
    for sign, A, B in (("+", R, Rinv), ("-", Rinv, R)):
        # g_il A^{lh}_{jk} = B^{hl}_{ij} g_lk
        lower_res = {}
        upper_res = {}
        for i, h, j, k in product(idx, repeat=4):
            lhs = zero
            l = -i
            lhs = lower.get(i, l, zero) * A.get(l, h, j, k, zero)
            l2 = -k
            rhs = B.get(h, l2, i, j, zero) * lower.get(l2, k, zero)
            v = lhs - rhs
            if v:
                lower_res[(i, h, j, k)] = v
            # g^il A_{lh}^{jk} = B_{hl}^{ij} g^lk  (lower pair of A is (l, h))
            lhs = upper.get(i, -i, zero) * A.get(j, k, -i, h, zero)
            rhs = B.get(i, j, h, -k, zero) * upper.get(-k, k, zero)
            v = lhs - rhs
            if v:
                upper_res[(i, h, j, k)] = v
        out[f"lower{sign}"] = lower_res
        out[f"upper{sign}"] = upper_res
    return out


def check_gtt(ctx: ScalarContext, rhat: SparseTensor4 | None = None,
              report: VerificationReport | None = None):
    """All four gTT variants; a perturbed ``rhat`` may be passed as a control."""
    report = report if report is not None else VerificationReport()
    R = rhat if rhat is not None else build_rhat(ctx)
    Rinv = rhat_inverse(ctx) if rhat is None else solve_inverse(ctx, R)
    for name, res in _gtt_residuals(ctx, R, Rinv).items():
        witness = None
        if res:
            key = min(res)
            witness = f"{key}: {res[key]}"
        report.add(f"rmatrix.gtt.{name}.N{ctx.N}", not res, witness)
    return report


def classical_ranks(ctx: ScalarContext) -> Tuple[int, int, int]:
    """Ranks of ``(P_s, P_a, P_t)`` at ``q = 1``."""
    from flint import fmpq_mat

    from .scalars import classical_limit

    pairs = [(i, j) for i in ctx.indices for j in ctx.indices]
    ranks = []
    for kind in ("s", "a", "t"):
        P = projector(ctx, kind)
        rows = []
        for a in pairs:
            row = []
            for b in pairs:
                v = P.get(*a, *b)
                if v is None:
                    row.append(0)
                else:
                    c = classical_limit(v)
                    if c.im:
                        raise ValueError("complex classical projector entry")
                    row.append(c.re)
            rows.append(row)
        ranks.append(fmpq_mat(rows).rank())
    return tuple(ranks)


def rhat_at_one_is_flip(ctx: ScalarContext) -> bool:
    from .scalars import classical_limit

    R = build_rhat(ctx)
    F = SparseTensor4.flip(ctx)
    keys = set(R.entries) | set(F.entries)
    for key in keys:
        a = classical_limit(R.entries[key]) if key in R.entries else 0
        b = 1 if key in F.entries else 0
        if a != b:
            return False
    return True
