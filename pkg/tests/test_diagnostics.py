import json
import math

import numpy as np
import pytest
from scipy import stats

from selfstab.bounds import stable_integral
from selfstab.construction import build_stable
from selfstab.core import AlphaFunction, ProcessConfig
from selfstab.diagnostics import (
    DiagnosticsReport,
    check_convergence_rate,
    check_holder,
    check_local_form,
    check_sign_martingale,
    enumerate_sign_moments,
    stable_oracle_sample,
)
from selfstab.points import TruncationSchedule, sample_half_plane

TANH = AlphaFunction.tanh(1.2, 0.4)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5])
def test_oracle_characteristic_function(alpha):
    count = 200_000
    x = stable_oracle_sample(alpha, 0.5, count, seed=1)
    for theta in (0.3, 1.0, 2.0):
        ecf = np.mean(np.cos(theta * x))
        cf = math.exp(-2.0 * 0.5 * stable_integral(alpha) * theta**alpha)
        assert abs(ecf - cf) <= 4 / math.sqrt(count)


def test_oracle_matches_scipy_levy_stable():
    alpha = 1.3
    scale = (2.0 * 1.0 * stable_integral(alpha)) ** (1 / alpha)
    x = stable_oracle_sample(alpha, 1.0, 5000, seed=2)
    ref = stats.levy_stable.rvs(alpha, 0.0, scale=scale, size=5000, random_state=3)
    assert stats.ks_2samp(x, ref).pvalue > 0.001


def test_point_sum_matches_oracle():
    # a=0.7 so the truncated tail above y=2000 is negligible against the KS resolution
    alpha, t = 0.7, 0.5
    vals = [build_stable(sample_half_plane(0, 1, 0, 2000, seed=k), alpha, 0, 1)(t) for k in range(2000)]
    ref = stable_oracle_sample(alpha, t, 20_000, seed=5)
    assert stats.ks_2samp(vals, ref).pvalue > 0.001


def test_oracle_scaling_self_consistency():
    alpha = 1.4
    x = stable_oracle_sample(alpha, 2.0, 20_000, seed=1)
    y = stable_oracle_sample(alpha, 1.0, 20_000, seed=2) * 2.0 ** (1 / alpha)
    assert stats.ks_2samp(x, y).pvalue > 0.001


def test_oracle_rejects_bad_input():
    with pytest.raises(ValueError):
        stable_oracle_sample(2.0, 1.0, 10)
    with pytest.raises(ValueError):
        stable_oracle_sample(1.0, 0.0, 10)


def test_enumerated_mean_is_zero():
    ps = sample_half_plane(0, 1, 0, 4, seed=3)
    assert len(ps) <= 22
    ex = enumerate_sign_moments(ps, TANH, 0.0, 1, 4)
    assert abs(ex["mean"]) < 1e-12
    assert ex["second_moment"] <= ex["sup_sq"] + 1e-15


def test_enumeration_of_empty_set():
    from selfstab.points import SignedPointSet

    ex = enumerate_sign_moments(SignedPointSet([], [], [], (0, 1, 0, 2)), TANH, 0.0, 1, 2)
    assert ex["mean"] == 0.0 and ex["sup_sq"] == 0.0


def test_enumeration_refuses_large_sets():
    ps = sample_half_plane(0, 1, 0, 40, seed=3)
    with pytest.raises(ValueError):
        enumerate_sign_moments(ps, TANH, 0.0, 1, 4)


def test_sign_martingale_report():
    ps = sample_half_plane(0, 1, 0, 4, seed=7)
    rep = check_sign_martingale(ps, TANH, 0.0, 1, 4, resamples=4000, seed=1)
    assert rep.passed, rep.verdicts
    assert rep.stat("exact_sup_sq") <= rep.stat("cauchy_bound")
    doc = json.loads(rep.to_json())
    assert doc["schema_version"] == 1 and doc["experiment"] == "sign_martingale"


def test_report_cleans_nonfinite_and_raw_csv(tmp_path):
    rep = DiagnosticsReport("x", {}, 0, 2)
    rep.add_stat("a", float("nan"))
    rep.add_verdict("v", 1.0, 2.0, "<=")
    rep.raw = {"q": np.array([1.0, 2.0])}
    assert rep.to_dict()["statistics"][0]["value"] is None
    assert rep.passed
    rep.raw_to_csv(tmp_path / "raw.csv")
    assert (tmp_path / "raw.csv").read_text().splitlines()[0] == "q"
    with pytest.raises(ValueError):
        rep.add_verdict("w", 1.0, 2.0, "<")


def test_convergence_small_run():
    cfg = ProcessConfig(0, 1, 0, 256, 0.5, 3)
    rep = check_convergence_rate(cfg, AlphaFunction.tanh(1.0, 0.2), TruncationSchedule((4, 16, 64, 256)),
                                 replicas=60)
    assert rep.passed, rep.verdicts
    with pytest.raises(ValueError):
        check_convergence_rate(ProcessConfig(0, 1, 0, 256, 0.0), TANH, TruncationSchedule((4, 16, 256)))


def test_convergence_independent_of_threads():
    cfg = ProcessConfig(0, 1, 0, 64, 0.5, 1)
    sched = TruncationSchedule((4, 16, 64))
    a = check_convergence_rate(cfg, TANH, sched, replicas=120, threads=1)
    b = check_convergence_rate(cfg, TANH, sched, replicas=120, threads=4)
    assert a.to_json() == b.to_json()


def test_holder_small_run():
    cfg = ProcessConfig(0, 1, 0, 2.0**10, 0, 2)
    rep = check_holder(0.5, cfg, TANH, replicas=400, h_grid=[2.0**-k for k in range(3, 7)])
    names = [v["criterion"] for v in rep.verdicts]
    assert names == ["m2 nondecreasing in h", "slope >= 2/alpha(Z(t)) - eps"]
    assert rep.verdicts[0]["passed"]
    assert math.isfinite(rep.stat("slope_mean_statistic"))
    with pytest.raises(ValueError):
        check_holder(0.9, cfg, TANH, replicas=10, h_grid=[0.5, 0.25])


def test_local_form_small_run():
    cfg = ProcessConfig(0, 1, 0, 2.0**10, 0, 2)
    rep = check_local_form(0.5, cfg, TANH, replicas=500, r_grid=(1e-2, 1e-3), window_points=2000)
    names = [v["criterion"] for v in rep.verdicts]
    assert sum(n.startswith("KS") for n in names) == 3
    assert "companion exponent >= 1/b - tol" in names
    with pytest.raises(ValueError):
        check_local_form(0.5, cfg, TANH, replicas=10, u_grid=(0.5, 2.0))
