"""Command line: ``qeuclid verify | emit | normalize | parse-check``.

Exit codes: 0 when every selected check passes, 1 when any check fails,
2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from .algebra import ExtendedAlgebra
from .expr import ExprError, normalize, parse_expr
from .forms import OneForm, dirac_theta
from .frame import build_frame
from .scalars import ExactField, PoleError, SampledField, ScalarContext
from .tensors import build_metric, build_rhat, projector, rhat_inverse
from .verify import FAMILIES, ConfigError, RunConfig, run_verify, sample_points

__all__ = ["main", "build_parser", "emit_document", "render_report"]

SCHEMA = 1
EMIT_KINDS = ("rmatrix", "metric", "projectors", "lambdas", "frame", "dirac")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 2 with a short message
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, required=True, dest="N", help="dimension N >= 3")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--seed", type=int, default=0, help="seed for sample points and random tests")
    p.add_argument("--samples", type=int, default=3, help="number of sample points in sampled mode")
    p.add_argument("--k-convention", choices=("standard", "h"), default="standard",
                   help="'h' sets k = q^(1/2) - q^(-1/2) (negative control)")
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--out", default=None, help="write the document to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qeuclid", description="Exact checks for the quantum Euclidean spaces R^N_q.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("verify", help="run identity checks")
    _common(v)
    v.add_argument("--calculus", choices=("plain", "barred", "both"), default="both")
    v.add_argument("--sigma", choices=("plus", "minus", "both"), default="both")
    v.add_argument("--theorem", choices=("1", "2", "3", "4", "5", "all"), default=None,
                   help="restrict to one theorem family")
    v.add_argument("--family", action="append", choices=FAMILIES, default=None,
                   help="check family to run (repeatable)")
    v.add_argument("--all", action="store_true", help="run every family (default)")
    v.add_argument("--gamma-branch", default=None,
                   help="comma separated signs for the gamma pairs, e.g. 1,-1")
    v.add_argument("--timings", action="store_true", help="include per-check timings")

    e = sub.add_parser("emit", help="print structure constants")
    _common(e)
    e.add_argument("what", choices=EMIT_KINDS)
    e.add_argument("--calculus", choices=("plain", "barred"), default="plain")

    nz = sub.add_parser("normalize", help="normal form of an expression")
    _common(nz)
    nz.add_argument("expr")

    pc = sub.add_parser("parse-check", help="parse an expression and report errors")
    pc.add_argument("--n", type=int, default=None, dest="N")
    pc.add_argument("--format", choices=("json", "md"), default="json")
    pc.add_argument("--out", default=None)
    pc.add_argument("expr")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _context(args) -> ScalarContext:
    if args.N < 3:
        raise ConfigError("N must be at least 3")
    fld = ExactField()
    if args.mode == "sampled":
        fld = SampledField(sample_points(args.seed, 1)[0])
    return ScalarContext(args.N, k_convention=args.k_convention, field=fld)


def _scalar_text(v) -> str:
    return v.to_text() if hasattr(v, "to_text") else str(v)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _md_table(headers: Sequence[str], rows: List[Sequence[str]]) -> str:
    def esc(s):
        return str(s).replace("|", "\\|")

    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    lines += ["| " + " | ".join(esc(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# verify


def _verify_config(args) -> RunConfig:
    families = tuple(args.family) if args.family else FAMILIES
    if args.theorem is not None:
        if args.theorem == "all":
            families = tuple(f for f in FAMILIES if f.startswith("theorem"))
        else:
            families = (f"theorem{args.theorem}",)
    calculi = ("plain", "barred") if args.calculus == "both" else (args.calculus,)
    sigmas = ("plus", "minus") if args.sigma == "both" else (args.sigma,)
    branch = None
    if args.gamma_branch:
        try:
            branch = tuple(int(b) for b in args.gamma_branch.split(","))
        except ValueError:
            raise ConfigError("gamma branch must be comma separated integers") from None
    samples = sample_points(args.seed, args.samples) if args.mode == "sampled" else ()
    return RunConfig(N=args.N, families=families, calculi=calculi, sigmas=sigmas, mode=args.mode,
                     samples=samples, seed=args.seed, k_convention=args.k_convention,
                     gamma_branch=branch).validate()


def render_report(result, fmt: str = "json", timings: bool = False) -> str:
    rep = result.report
    doc = {
        "schema": SCHEMA,
        "command": "verify",
        "config": result.config.to_dict(),
        "summary": {
            "total": len(rep),
            "passed": sum(r.passed for r in rep),
            "failed": len(rep.failures()),
            "status": "pass" if rep.passed else "fail",
        },
        "checks": [r.to_dict(timings) for r in rep],
    }
    for name in ("torsion", "compat", "curvature"):
        if name in result.sections:
            doc[name] = result.sections[name]
    if fmt == "json":
        return _dump(doc)
    out = [f"# Verification report (N={result.config.N}, {result.config.mode})\n",
           f"{doc['summary']['passed']}/{doc['summary']['total']} checks pass.\n"]
    rows = [(r.check_id, r.status, r.residual or "") for r in rep]
    out.append(_md_table(("check", "status", "residual"), rows))
    for name in ("torsion", "compat", "curvature"):
        if name in doc:
            out.append(f"\n## {name}\n\n```json\n{json.dumps(doc[name], indent=2, sort_keys=True)}\n```\n")
    return "\n".join(out)


def _cmd_verify(args) -> int:
    cfg = _verify_config(args)
    result = run_verify(cfg)
    _write(render_report(result, args.format, args.timings), args.out)
    return result.exit_code


# ---------------------------------------------------------------------------
# emit


def emit_document(ctx: ScalarContext, what: str, tag: str = "plain") -> dict:
    """Structure constants as a JSON-ready document with canonical strings."""
    doc = {"schema": SCHEMA, "command": "emit", "what": what, "N": ctx.N,
           "mode": "exact" if ctx.field.exact else "sampled"}
    if not ctx.field.exact:
        doc["sample_point"] = str(ctx.field.sample_point)
    if what == "metric":
        lower, upper = build_metric(ctx)
        doc["entries"] = lower.to_records()
        doc["inverse"] = upper.to_records()
    elif what == "rmatrix":
        doc["entries"] = build_rhat(ctx).to_records()
        doc["inverse"] = rhat_inverse(ctx).to_records()
    elif what == "projectors":
        R = build_rhat(ctx)
        doc["projectors"] = {k: projector(ctx, k, R).to_records() for k in ("s", "a", "t")}
    elif what in ("lambdas", "frame"):
        alg = ExtendedAlgebra(ctx)
        fd = build_frame(alg, tag)
        doc["calculus"] = tag
        doc["gammas"] = {str(a): g.to_text() for a, g in sorted(fd.gammas.values.items())}
        if what == "lambdas":
            doc["lambdas"] = {str(a): l.to_text() for a, l in sorted(fd.lambdas.items())}
        else:
            doc["e"] = [{"i": i, "a": a, "value": v.to_text()} for (i, a), v in sorted(fd.e.items())]
            doc["theta"] = [{"a": a, "l": l, "value": v.to_text()}
                            for (a, l), v in sorted(fd.theta_components.items())]
    elif what == "dirac":
        alg = ExtendedAlgebra(ctx)
        theta = dirac_theta(alg, tag)
        doc["calculus"] = tag
        doc["components"] = {str(l): c.to_text() for l, c in sorted(theta.coeffs.items())}
    else:
        raise ConfigError(f"unknown emit target {what!r}")
    return doc


def _emit_md(doc: dict) -> str:
    out = [f"# {doc['what']} (N={doc['N']})\n"]
    for key in ("entries", "inverse"):
        if key in doc:
            recs = doc[key]
            headers = [k for k in recs[0] if k != "value"] + ["value"] if recs else ["value"]
            out.append(f"## {key}\n\n" + _md_table(headers, [[r[h] for h in headers] for r in recs]))
    for key in ("gammas", "lambdas", "components"):
        if key in doc:
            out.append(f"## {key}\n\n" + _md_table(("index", "value"), sorted(doc[key].items(), key=lambda kv: int(kv[0]))))
    if "projectors" in doc:
        for k, recs in doc["projectors"].items():
            headers = ["i", "j", "k", "l", "value"]
            out.append(f"## P_{k}\n\n" + _md_table(headers, [[r[h] for h in headers] for r in recs]))
    for key, cols in (("e", ("i", "a", "value")), ("theta", ("a", "l", "value"))):
        if key in doc:
            out.append(f"## {key}\n\n" + _md_table(cols, [[r[c] for c in cols] for r in doc[key]]))
    return "\n".join(out)


def _cmd_emit(args) -> int:
    ctx = _context(args)
    doc = emit_document(ctx, args.what, args.calculus)
    _write(_dump(doc) if args.format == "json" else _emit_md(doc), args.out)
    return 0


# ---------------------------------------------------------------------------
# normalize / parse-check


def _cmd_normalize(args) -> int:
    ctx = _context(args)
    alg = ExtendedAlgebra(ctx)
    value = normalize(args.expr, alg)
    if isinstance(value, OneForm):
        kind = "one-form"
        zero = value.is_zero()
    else:
        kind = "function"
        zero = value.is_zero()
    doc = {"schema": SCHEMA, "command": "normalize", "N": ctx.N, "input": args.expr,
           "kind": kind, "normal_form": value.to_text(), "is_zero": zero}
    if args.format == "json":
        _write(_dump(doc), args.out)
    else:
        _write(f"`{args.expr}` = `{value.to_text()}`\n\nzero: {zero}\n", args.out)
    return 0


def _cmd_parse_check(args) -> int:
    doc = {"schema": SCHEMA, "command": "parse-check", "input": args.expr, "N": args.N}
    try:
        ast = parse_expr(args.expr, args.N)
        doc.update(ok=True, ast=repr(ast))
        code = 0
    except ExprError as exc:
        doc.update(ok=False, error=exc.message, position=exc.pos)
        code = 1
    if args.format == "json":
        _write(_dump(doc), args.out)
    else:
        line = "ok" if doc["ok"] else f"error at position {doc['position']}: {doc['error']}"
        _write(f"`{args.expr}`: {line}\n", args.out)
    return code


_COMMANDS = {
    "verify": _cmd_verify,
    "emit": _cmd_emit,
    "normalize": _cmd_normalize,
    "parse-check": _cmd_parse_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qeuclid: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ExprError, PoleError) as exc:
        print(f"qeuclid: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
