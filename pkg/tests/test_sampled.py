from fractions import Fraction

import pytest

from qeuclid import ScalarContext
from qeuclid.scalars import PoleError, SampledField
from qeuclid.verify import ConfigError, RunConfig, run_verify, sample_points


def strip(check_id):
    return check_id.split("].", 1)[1] if check_id.startswith("sampled[") else check_id


def verdicts(result):
    out = {}
    for r in result.report:
        out.setdefault(strip(r.check_id), []).append(r.passed)
    return out


def test_sample_points_avoid_poles():
    for seed in range(20):
        pts = sample_points(seed, 5)
        assert len(set(pts)) == 5
        assert not set(pts) & {0, 1, -1}
    assert sample_points(3) == sample_points(3)


@pytest.mark.parametrize("N", (3, 4))
def test_sampled_matches_exact(N):
    exact = verdicts(run_verify(RunConfig(N=N)))
    sampled = verdicts(run_verify(RunConfig(N=N, mode="sampled", samples=sample_points(N, 3))))
    common = set(exact) & set(sampled)
    assert len(common) > 50
    for cid in common:
        assert all(v == exact[cid][0] for v in sampled[cid]), cid
    # only classical-limit checks are exact-only
    assert all("classical" in cid for cid in set(exact) - set(sampled))


def test_negative_control_also_fails_sampled():
    fams = ("theorem2",)
    exact = verdicts(run_verify(RunConfig(N=5, families=fams, k_convention="h")))
    sampled = verdicts(run_verify(RunConfig(N=5, families=fams, k_convention="h", mode="sampled",
                                            samples=sample_points(1, 3))))
    assert not all(v[0] for v in exact.values())
    assert exact.keys() == sampled.keys()
    for cid, v in exact.items():
        assert all(s == v[0] for s in sampled[cid]), cid


def test_pole_points_rejected():
    with pytest.raises(ConfigError):
        RunConfig(N=3, mode="sampled", samples=(Fraction(1),)).validate()
    with pytest.raises(ConfigError):
        RunConfig(N=3, mode="sampled").validate()
    with pytest.raises(ZeroDivisionError):
        ScalarContext(3, field=SampledField(1)).h.inverse()
    with pytest.raises(PoleError):
        SampledField(0)


def test_sampled_constants_are_evaluations():
    s = Fraction(5, 3)
    exact, sampled = ScalarContext(5), ScalarContext(5, field=SampledField(s))
    for name in ("h", "k"):
        assert getattr(exact, name).evaluate(s) == getattr(sampled, name)
    for i in exact.indices:
        assert exact.omega[i].evaluate(s) == sampled.omega[i]
