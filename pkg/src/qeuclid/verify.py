"""Check families and the run driver used by the command line."""
from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Tuple

from .algebra import ExtendedAlgebra
from .forms import check_calculus, check_rule_tables
from .frame import (
    FrameData,
    build_frame,
    build_gammas,
    build_lambdas,
    e_matrix,
    tensors_for,
    verify_frame,
    verify_glue,
    verify_lambda_equation,
    verify_theorem2,
)
from .geometry import (
    BRANCHES,
    Geometry,
    check_conformal_compat,
    check_covariant,
    check_curvature,
    check_metric,
    check_sigma,
    check_torsion_bilinearity,
)
from .report import VerificationReport
from .scalars import ExactField, PoleError, SampledField, ScalarContext
from .tensors import check_braid, check_gtt, check_projectors, classical_ranks, rhat_at_one_is_flip

__all__ = [
    "FAMILIES",
    "RunConfig",
    "RunResult",
    "ConfigError",
    "Session",
    "run_verify",
    "run_point",
    "sample_points",
    "check_space",
]

FAMILIES = ("rmatrix", "space", "calculus", "theorem1", "theorem2", "theorem3",
            "theorem4", "theorem5", "frame", "geometry")


class ConfigError(ValueError):
    """Invalid run configuration (usage error)."""


@dataclass(frozen=True)
class RunConfig:
    N: int
    families: Tuple[str, ...] = FAMILIES
    calculi: Tuple[str, ...] = ("plain", "barred")
    sigmas: Tuple[str, ...] = BRANCHES
    mode: str = "exact"
    samples: Tuple[Fraction, ...] = ()
    seed: int = 0
    k_convention: str = "standard"
    gamma_branch: Optional[Tuple[int, ...]] = None
    curvature_max_n: Optional[int] = None
    space_triples: int = 200

    def validate(self) -> "RunConfig":
        if self.N < 3:
            raise ConfigError("N must be at least 3")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad:
            raise ConfigError(f"unknown check families: {', '.join(bad)}")
        if not self.families:
            raise ConfigError("no check family selected")
        for tag in self.calculi:
            if tag not in ("plain", "barred"):
                raise ConfigError(f"unknown calculus {tag!r}")
        for br in self.sigmas:
            if br not in BRANCHES:
                raise ConfigError(f"unknown sigma branch {br!r}")
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.k_convention not in ("standard", "h"):
            raise ConfigError(f"unknown k convention {self.k_convention!r}")
        if self.mode == "sampled":
            if not self.samples:
                raise ConfigError("sampled mode needs at least one sample point")
            for s in self.samples:
                if s in (0, 1, -1):
                    raise ConfigError(f"s = {s} is a pole of the constants")
        n = self.N // 2
        if self.gamma_branch is not None:
            if len(self.gamma_branch) != n or any(b not in (1, -1) for b in self.gamma_branch):
                raise ConfigError(f"gamma branch must be {n} signs")
        return self

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "families": list(self.families),
            "calculi": list(self.calculi),
            "sigmas": list(self.sigmas),
            "mode": self.mode,
            "samples": [str(s) for s in self.samples],
            "seed": self.seed,
            "k_convention": self.k_convention,
            "gamma_branch": list(self.gamma_branch) if self.gamma_branch else None,
        }


def sample_points(seed: int, count: int = 3) -> Tuple[Fraction, ...]:
    """Random rational values of ``s = q^(1/2)`` away from the poles ``0, +-1``."""
    rng = random.Random(seed)
    out: List[Fraction] = []
    while len(out) < count:
        s = Fraction(rng.randint(-40, 40), rng.randint(1, 17))
        if s not in (0, 1, -1) and s not in out:
            out.append(s)
    return tuple(out)


@dataclass
class RunResult:
    config: RunConfig
    report: VerificationReport
    sections: Dict[str, dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.report.passed

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


class Session:
    """Shared algebra and frame data for one scalar context."""

    def __init__(self, ctx: ScalarContext, gamma_branch=None):
        self.ctx = ctx
        self.alg = ExtendedAlgebra(ctx)
        self.gamma_branch = gamma_branch
        self._frames: Dict[str, FrameData] = {}

    def frame(self, tag: str) -> FrameData:
        fd = self._frames.get(tag)
        if fd is None:
            fd = self._frames[tag] = build_frame(self.alg, tag, "theorem2", self.gamma_branch)
        return fd


# ---------------------------------------------------------------------------
# individual families


def check_space(alg: ExtendedAlgebra, report: VerificationReport, seed: int = 0,
                triples: int = 200) -> VerificationReport:
    """Coordinate relations, radial exchange rules, associativity and the classical limit."""
    ctx = alg.ctx
    T = tensors_for(ctx)
    idx = ctx.indices
    sfx = f"N{ctx.N}"
    X = {i: alg.x(i) for i in idx}
    with report.timed():
        bad = None
        for k, l in product(idx, repeat=2):
            total = alg.zero
            for (i, j), v in T.Pa.transpose().rows.get((k, l), {}).items():
                total = total + (X[i] * X[j]).scale(v)
            if not total.is_zero():
                bad = f"{(k, l)}: {total.to_text()[:200]}"
                break
        report.add(f"space.pa_relations.{sfx}", bad is None, bad)
    with report.timed():
        bad = None
        for i in range(1, ctx.n + 1):
            r2 = alg.r2_element(i)
            if not (alg.r(i, 2) - r2).is_zero():
                bad = f"r({i})^2"
            for j in idx:
                eps = 0 if abs(j) <= i else (1 if j < -i else -1)
                # x^j r_i = q^eps r_i x^j, so r_i^2 picks up q^(2 eps)
                lhs = X[j] * r2
                rhs = (r2 * X[j]).scale(ctx.q_pow(2 * eps))
                if not (lhs - rhs).is_zero():
                    bad = f"x({j}) r({i})^2"
                lhs = X[j] * alg.r(i)
                if not (lhs - (alg.r(i) * X[j]).scale(ctx.q_pow(eps))).is_zero():
                    bad = f"x({j}) r({i})"
        report.add(f"space.radial_exchange.{sfx}", bad is None, bad)
    with report.timed():
        rng = random.Random(seed)
        bad = None
        for _ in range(triples):
            u, v, w = (_random_monomial(alg, rng) for _ in range(3))
            if not ((u * v) * w - u * (v * w)).is_zero():
                bad = f"{u.to_text()} | {v.to_text()} | {w.to_text()}"
                break
        report.add(f"space.associativity.{sfx}", bad is None, bad)
    if ctx.field.exact:
        with report.timed():
            from .scalars import classical_limit

            bad = None
            for i, j in product(idx, repeat=2):
                diff = X[i] * X[j] - X[j] * X[i]
                for key, c in diff.terms.items():
                    if classical_limit(c) != 0:
                        bad = f"[x({i}), x({j})]"
            report.add(f"space.classical_commutative.{sfx}", bad is None, bad)
    return report


def _random_monomial(alg: ExtendedAlgebra, rng: random.Random):
    ctx = alg.ctx
    x = {i: rng.randint(0, 2) for i in rng.sample(ctx.indices, k=min(3, ctx.N))}
    for i in list(x):
        if i in alg.invertible and rng.random() < 0.3:
            x[i] = -x[i]
    r = {i: rng.randint(-1, 1) for i in range(1, ctx.n + 1) if rng.random() < 0.4}
    beta = rng.randint(-1, 1) if not ctx.odd else 0
    return alg.monomial(alpha=rng.randint(-1, 1), beta=beta, r=r, x=x)


def _family_rmatrix(sess: Session, cfg: RunConfig, report: VerificationReport):
    ctx = sess.ctx
    with report.timed():
        check_braid(ctx, report=report)
    with report.timed():
        check_projectors(ctx, report)
    with report.timed():
        check_gtt(ctx, report=report)
    if ctx.field.exact:
        with report.timed():
            N = ctx.N
            want = (N * (N + 1) // 2 - 1, N * (N - 1) // 2, 1)
            got = classical_ranks(ctx)
            report.add(f"rmatrix.classical_ranks.N{N}", got == want,
                       None if got == want else f"ranks {got}, expected {want}")
        with report.timed():
            report.add(f"rmatrix.classical_flip.N{ctx.N}", rhat_at_one_is_flip(ctx))


def _family_space(sess: Session, cfg: RunConfig, report: VerificationReport):
    check_space(sess.alg, report, cfg.seed, cfg.space_triples)


def _family_calculus(sess: Session, cfg: RunConfig, report: VerificationReport):
    check_rule_tables(sess.ctx, report)
    for tag in cfg.calculi:
        check_calculus(sess.alg, tag, report)


def _lambda_run(sess: Session, tag: str, cfg: RunConfig, report: VerificationReport, which: str):
    fd = sess.frame(tag)
    if which == "lambda":
        verify_lambda_equation(sess.alg, tag, fd.lambdas, report, fd.e)
    else:
        verify_theorem2(sess.alg, tag, fd.lambdas, fd.e, report)
    # the sign of each gamma pair is free: the flipped branch must pass as well
    base = cfg.gamma_branch or (1,) * sess.ctx.n
    flipped = tuple(-b for b in base)
    g = build_gammas(sess.alg, tag, "theorem2", flipped)
    lam = build_lambdas(sess.alg, tag, g)
    e = e_matrix(sess.alg, lam)
    sub = VerificationReport()
    if which == "lambda":
        verify_lambda_equation(sess.alg, tag, lam, sub, e)
    else:
        verify_theorem2(sess.alg, tag, lam, e, sub)
    for r in sub:
        report.add(r.check_id + ".flipped", r.passed, r.residual, r.timing_ms, r.note)


def _family_theorem(k: int):
    def run(sess: Session, cfg: RunConfig, report: VerificationReport):
        tag = "plain" if k in (1, 2) else "barred"
        _lambda_run(sess, tag, cfg, report, "lambda" if k in (1, 3) else "algebra")
    return run


def _family_theorem5(sess: Session, cfg: RunConfig, report: VerificationReport):
    verify_glue(sess.alg, report, cfg.gamma_branch)


def _family_frame(sess: Session, cfg: RunConfig, report: VerificationReport):
    for tag in cfg.calculi:
        verify_frame(sess.frame(tag), report)


def _family_geometry(sess: Session, cfg: RunConfig, report: VerificationReport,
                     sections: Dict[str, dict]):
    ctx = sess.ctx
    for br in cfg.sigmas:
        check_sigma(ctx, br, report)
    torsion = sections.setdefault("torsion", {})
    for tag in cfg.calculi:
        for br in cfg.sigmas:
            check_torsion_bilinearity(ctx, br, tag, report)
            torsion[f"{tag}.{br}"] = report[f"geometry.torsion.N{ctx.N}.{tag}.{br}"].status
    compat = sections.setdefault("compat", {})
    for tag in cfg.calculi:
        _, factors = check_conformal_compat(ctx, tag, report)
        compat[tag] = {br: (None if f is None else f.to_text() if hasattr(f, "to_text") else str(f))
                       for br, f in factors.items()}
    curv = sections.setdefault("curvature", {})
    for tag in cfg.calculi:
        fd = sess.frame(tag)
        for br in cfg.sigmas:
            geo = Geometry(fd, br)
            if br == cfg.sigmas[0]:
                check_metric(geo, report)
            check_covariant(geo, report)
            if cfg.curvature_max_n is None or ctx.N <= cfg.curvature_max_n:
                cid = f"geometry.curvature.N{ctx.N}.{tag}.{br}"
                check_curvature(geo, report, cid)
                curv[f"{tag}.{br}"] = "zero" if report[cid].passed else "nonzero"
            else:
                curv[f"{tag}.{br}"] = "skipped"


_RUNNERS = {
    "rmatrix": _family_rmatrix,
    "space": _family_space,
    "calculus": _family_calculus,
    "theorem1": _family_theorem(1),
    "theorem2": _family_theorem(2),
    "theorem3": _family_theorem(3),
    "theorem4": _family_theorem(4),
    "theorem5": _family_theorem5,
    "frame": _family_frame,
}


def run_point(cfg: RunConfig, s_value: Optional[Fraction] = None) -> Tuple[VerificationReport, Dict[str, dict]]:
    """All selected families for one scalar field (exact, or sampled at ``s_value``)."""
    fld = ExactField() if s_value is None else SampledField(s_value)
    ctx = ScalarContext(cfg.N, k_convention=cfg.k_convention, field=fld)
    sess = Session(ctx, cfg.gamma_branch)
    report = VerificationReport()
    sections: Dict[str, dict] = {}
    for fam in FAMILIES:
        if fam not in cfg.families:
            continue
        if fam == "geometry":
            _family_geometry(sess, cfg, report, sections)
        else:
            _RUNNERS[fam](sess, cfg, report)
    return report, sections


def _point_job(args):
    cfg, s = args
    rep, sections = run_point(cfg, s)
    return [(r.check_id, r.passed, r.residual, r.timing_ms, r.note) for r in rep], sections


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("QEUCLID_THREADS", "1")))
    except ValueError:
        return 1


def run_verify(cfg: RunConfig) -> RunResult:
    """Run every selected family; sampled mode repeats them at each point."""
    cfg.validate()
    if cfg.mode == "exact":
        try:
            report, sections = run_point(cfg)
        except PoleError as exc:  # pragma: no cover - exact mode has no sample point
            raise ConfigError(str(exc)) from None
        return RunResult(cfg, report, sections)
    jobs = [(cfg, s) for s in cfg.samples]
    workers = min(thread_cap(), len(jobs))
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outputs = list(pool.map(_point_job, jobs))
        else:
            outputs = [_point_job(j) for j in jobs]
    except PoleError as exc:
        raise ConfigError(f"sample point hits a pole: {exc}") from None
    report = VerificationReport()
    sections: Dict[str, dict] = {}
    for s, (rows, secs) in zip(cfg.samples, outputs):
        prefix = f"sampled[s={s}]."
        for cid, passed, residual, ms, note in rows:
            report.add(prefix + cid, passed, residual, ms, note)
        for name, sec in secs.items():
            sections.setdefault(name, {})[str(s)] = sec
    return RunResult(cfg, report, sections)
