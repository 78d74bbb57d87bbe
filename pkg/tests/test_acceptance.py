"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are printed at the end of the
pytest run (see ``conftest.py``) and when this file is run as a script.
All comparisons are exact.
"""
import json
import subprocess
import sys
import time
from itertools import product

import pytest

from qeuclid import ExtendedAlgebra, ScalarContext
from qeuclid.forms import check_d_as_commutator
from qeuclid.frame import build_frame, verify_frame, verify_glue, verify_lambda_equation, verify_theorem2
from qeuclid.geometry import (
    Geometry,
    check_conformal_compat,
    check_curvature,
    check_sigma,
    check_torsion_bilinearity,
)
from qeuclid.report import VerificationReport
from qeuclid.tensors import check_braid, check_gtt, check_projectors, classical_ranks
from qeuclid.verify import check_space

RESULTS = {}
TITLES = {
    1: "braid matrix layer",
    2: "coordinate algebra layer",
    3: "inner derivations solve the exchange equation",
    4: "algebra of the e matrices",
    5: "gluing the two calculi",
    6: "frame layer",
    7: "geometry layer",
    8: "sampled mode agrees with exact mode",
}
TAGS = ("plain", "barred")
BRANCHES = ("plus", "minus")


def record(k, ok, detail=""):
    RESULTS[k] = (ok, detail)
    return ok


def summary_lines():
    lines = []
    for k in sorted(TITLES):
        if k not in RESULTS:
            lines.append(f"criterion {k}: NOT RUN  {TITLES[k]}")
            continue
        ok, detail = RESULTS[k]
        lines.append(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {TITLES[k]}" + (f" ({detail})" if detail else ""))
    return lines


def failures_of(rep):
    return [f"{r.check_id}: {r.residual}" for r in rep.failures()]


def test_criterion_1_rmatrix():
    bad, slow = [], []
    for N in (3, 4, 5, 6):
        t0 = time.perf_counter()
        ctx = ScalarContext(N)
        rep = VerificationReport()
        check_braid(ctx, report=rep)
        check_projectors(ctx, rep)
        check_gtt(ctx, report=rep)
        bad += failures_of(rep)
        want = (N * (N + 1) // 2 - 1, N * (N - 1) // 2, 1)
        if classical_ranks(ctx) != want:
            bad.append(f"ranks N={N}")
        if time.perf_counter() - t0 > 60:
            slow.append(N)
    ok = record(1, not bad and not slow, "; ".join(bad[:3]) or (f"slow for N={slow}" if slow else ""))
    assert ok, RESULTS[1]


def test_criterion_2_space():
    t0 = time.perf_counter()
    bad = []
    for N in (3, 4, 5, 6):
        rep = check_space(ExtendedAlgebra(ScalarContext(N)), VerificationReport(), seed=N, triples=200)
        bad += failures_of(rep)
    elapsed = time.perf_counter() - t0
    ok = record(2, not bad and elapsed < 60, "; ".join(bad[:3]) or f"{elapsed:.1f}s")
    assert ok, RESULTS[2]


def test_criterion_3_lambda_equation():
    t0 = time.perf_counter()
    bad = []
    for N in (3, 4, 5, 6):
        alg = ExtendedAlgebra(ScalarContext(N))
        for tag in TAGS:
            fd = build_frame(alg, tag)
            rep = verify_lambda_equation(alg, tag, fd.lambdas, e=fd.e)
            if len(rep) != N:
                bad.append(f"N={N} {tag}: {len(rep)} solutions checked")
            bad += failures_of(rep)
    elapsed = time.perf_counter() - t0
    ok = record(3, not bad and elapsed < 300, "; ".join(bad[:3]) or f"{elapsed:.1f}s")
    assert ok, RESULTS[3]


def test_criterion_4_e_matrix_algebra():
    t0 = time.perf_counter()
    bad = []
    for N in (3, 4, 5, 6):
        alg = ExtendedAlgebra(ScalarContext(N))
        for tag in TAGS:
            fd = build_frame(alg, tag)
            rep = verify_theorem2(alg, tag, fd.lambdas, fd.e)
            bad += failures_of(rep)
            if N % 2 and f"thm{2 if tag == 'plain' else 4}.normalization.N{N}.{tag}" not in rep:
                bad.append(f"normalization missing N={N} {tag}")
        if N % 2 and not (build_frame(alg, "plain").e[(0, 0)] - alg.L()).is_zero():
            bad.append(f"e00 != L for N={N}")
    # negative control: k = q^(1/2) - q^(-1/2) must break something for N = 5
    alg = ExtendedAlgebra(ScalarContext(5, k_convention="h"))
    fd = build_frame(alg, "plain")
    control = verify_theorem2(alg, "plain", fd.lambdas, fd.e)
    if control.passed:
        bad.append("k = h did not break any check")
    elapsed = time.perf_counter() - t0
    ok = record(4, not bad and elapsed < 600,
                "; ".join(bad[:3]) or f"{elapsed:.1f}s, k=h breaks {len(control.failures())} checks")
    assert ok, RESULTS[4]


def test_criterion_5_glue():
    t0 = time.perf_counter()
    bad = []
    for N in (3, 5):
        rep = verify_glue(ExtendedAlgebra(ScalarContext(N)))
        if f"thm5.diagonal.N{N}" not in rep:
            bad.append(f"diagonal missing N={N}")
        bad += failures_of(rep)
    rep = verify_glue(ExtendedAlgebra(ScalarContext(4)))
    res = rep["thm5.glue.N4"] if "thm5.glue.N4" in rep else None
    if res is None or res.passed or "even N" not in (res.residual or ""):
        bad.append("N=4 not reported impossible")
    elapsed = time.perf_counter() - t0
    ok = record(5, not bad and elapsed < 300, "; ".join(bad[:3]) or f"{elapsed:.1f}s")
    assert ok, RESULTS[5]


def test_criterion_6_frame():
    t0 = time.perf_counter()
    bad = []
    needed = ("frame.commute_x", "frame.commute_L", "frame.duality.e_theta",
              "frame.duality.theta_e", "frame.dirac_matches")
    for N in (3, 4):
        alg = ExtendedAlgebra(ScalarContext(N))
        for tag in TAGS:
            rep = verify_frame(build_frame(alg, tag))
            for name in needed:
                if f"{name}.N{N}.{tag}" not in rep:
                    bad.append(f"{name} missing N={N} {tag}")
            bad += failures_of(rep)
            samples = [alg.x(i) for i in alg.indices]
            samples += [alg.x(i) * alg.x(j) for i, j in product(alg.indices, repeat=2)]
            for f in samples:
                if not check_d_as_commutator(f, tag):
                    bad.append(f"d != -[theta, {f.to_text()}] N={N} {tag}")
    elapsed = time.perf_counter() - t0
    ok = record(6, not bad and elapsed < 300, "; ".join(bad[:3]) or f"{elapsed:.1f}s")
    assert ok, RESULTS[6]


def test_criterion_7_geometry():
    t0 = time.perf_counter()
    bad = []
    factors = {}
    for N in (3, 4, 5):
        ctx = ScalarContext(N)
        rep = VerificationReport()
        for br in BRANCHES:
            check_sigma(ctx, br, rep)
        for tag in TAGS:
            for br in BRANCHES:
                check_torsion_bilinearity(ctx, br, tag, rep)
            _, f = check_conformal_compat(ctx, tag, rep)
            factors[(N, tag)] = f
        bad += failures_of(rep)
    q2 = ScalarContext(3).q ** 2
    for key, f in factors.items():
        if f["plus"] != q2 or f["minus"] * f["plus"] != ScalarContext(3).one:
            bad.append(f"factors {key}: {f}")
    alg = ExtendedAlgebra(ScalarContext(3))
    t1 = time.perf_counter()
    for tag in TAGS:
        fd = build_frame(alg, tag)
        for br in BRANCHES:
            bad += failures_of(check_curvature(Geometry(fd, br)))
    curvature_time = time.perf_counter() - t1
    elapsed = time.perf_counter() - t0
    ok = record(7, not bad and curvature_time < 900,
                "; ".join(bad[:3]) or f"{elapsed:.1f}s, factors plus=q^2 minus=q^-2")
    assert ok, RESULTS[7]


# ---------------------------------------------------------------------------
# criterion 8: every verdict of the run driver, exact versus three random points


def _cli(*argv):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "qeuclid.cli", *argv],
                          capture_output=True, text=True, check=False)
    elapsed = time.perf_counter() - t0
    assert proc.returncode in (0, 1), proc.stderr
    return json.loads(proc.stdout), elapsed


def _verdicts(doc):
    out = {}
    for c in doc["checks"]:
        cid = c["check_id"]
        if cid.startswith("sampled["):
            cid = cid.split("].", 1)[1]
        out.setdefault(cid, []).append(c["status"])
    return out


def test_criterion_8_mode_agreement():
    mismatches, exact_only = [], set()
    t_exact = t_sampled = 0.0
    compared = 0
    runs = [(N, ()) for N in (3, 4, 5, 6)] + [(5, ("--k-convention", "h", "--theorem", "2"))]
    for N, extra in runs:
        exact, te = _cli("verify", "--n", str(N), *extra)
        sampled, ts = _cli("verify", "--n", str(N), "--mode", "sampled", "--samples", "3",
                           "--seed", "2024", *extra)
        if not extra:
            t_exact += te
            t_sampled += ts
        ev, sv = _verdicts(exact), _verdicts(sampled)
        for cid, (status,) in ev.items():
            if cid not in sv:
                exact_only.add(cid.split(".")[1])
                continue
            compared += 1
            if len(sv[cid]) != 3 or any(s != status for s in sv[cid]):
                mismatches.append(f"N={N} {cid}: exact {status}, sampled {sv[cid]}")
        mismatches += [f"N={N} {cid}: sampled only" for cid in set(sv) - set(ev)]
    agree = not mismatches and compared > 0
    fast = t_sampled < 0.5 * t_exact
    detail = (f"{compared} verdicts compared, {len(mismatches)} mismatches; "
              f"runtime exact {t_exact:.1f}s, sampled {t_sampled:.1f}s "
              f"(ratio {t_sampled / t_exact:.2f}, required < 0.50)")
    ok = record(8, agree and fast, detail)
    assert agree, mismatches[:5]
    assert exact_only <= {"classical_ranks", "classical_flip", "classical_commutative",
                          "sigma_classical_flip"}, exact_only
    assert fast, detail


if __name__ == "__main__":
    code = pytest.main([__file__, "-q"])
    print("\n".join(summary_lines()))
    sys.exit(code)
