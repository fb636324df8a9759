"""Monte Carlo checks of convergence, Hoelder regularity and local form.

All experiments are deterministic given their base seed: replicas are
split into fixed-size chunks, each drawing from its own counter-based
stream, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from .bounds import cauchy_bound, rate_bound, stable_integral
from .construction import build_truncated, coupled_levels
from .core import AlphaFunction, ProcessConfig
from .points import (
    DEFAULT_INTENSITY,
    SignedPointSet,
    TruncationSchedule,
    freeze_prefix,
    make_rng,
    sample_half_plane,
    sample_nested,
)

__all__ = [
    "DiagnosticsReport",
    "stable_oracle_sample",
    "enumerate_sign_moments",
    "check_sign_martingale",
    "check_convergence_rate",
    "check_holder",
    "check_local_form",
    "frozen_prefix_value",
]

SCHEMA_VERSION = 1
CHUNK = 2500  # replicas per RNG stream; fixed so output is thread-count independent


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class DiagnosticsReport:
    experiment: str
    parameters: dict
    seed: int
    replicas: int
    statistics: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    raw: dict = field(default_factory=dict, repr=False)

    def add_stat(self, label, value, standard_error=None):
        self.statistics.append({"label": label, "value": value, "standard_error": standard_error})

    def add_verdict(self, criterion, value, threshold, comparison, passed=None):
        """Record a pass/fail line; ``comparison`` is ``"<="`` or ``">="``."""
        if comparison not in ("<=", ">="):
            raise ValueError(f"unknown comparison {comparison!r}")
        if passed is None:
            passed = value <= threshold if comparison == "<=" else value >= threshold
        self.verdicts.append({
            "criterion": criterion, "value": value, "threshold": threshold,
            "comparison": comparison, "passed": bool(passed),
        })

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)

    def stat(self, label):
        for s in self.statistics:
            if s["label"] == label:
                return s["value"]
        raise KeyError(label)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        d["passed"] = self.passed
        d["schema_version"] = SCHEMA_VERSION
        return _clean(d)

    def to_json(self, **kw) -> str:
        kw.setdefault("indent", 2)
        kw.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kw)

    def raw_to_csv(self, path) -> None:
        """Dump equal-length per-replica arrays in ``raw`` as CSV columns."""
        cols = {k: np.asarray(v).ravel() for k, v in self.raw.items()}
        if not cols:
            raise ValueError("report has no raw data")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols))
            for row in zip(*cols.values()):
                w.writerow([repr(float(v)) for v in row])


def _chunks(replicas, size=CHUNK):
    return [(i, min(size, replicas - i * size)) for i in range(-(-replicas // size))]


def _map(fn, items, threads):
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fit_slope(x, y):
    slope, _ = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope)


# --------------------------------------------------------------------------
# independent stable sampler


def stable_oracle_sample(alpha, scale_t, count, seed=0, intensity=DEFAULT_INTENSITY):
    """Samples of the non-normalised stable motion at time ``scale_t``.

    Uses the Chambers-Mallows-Stuck transform, independently of any point
    sum. For points of intensity ``intensity`` on the half-plane with fair
    signs, the law has characteristic function
    ``exp(-intensity * scale_t * I(alpha) * |theta|**alpha)``.
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    if not scale_t > 0:
        raise ValueError("scale_t must be positive")
    rng = make_rng(seed)
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, count)
    w = rng.standard_exponential(count)
    if alpha == 1.0:
        x = np.tan(v)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    scale = (intensity * scale_t * stable_integral(alpha)) ** (1.0 / alpha)
    return scale * x


# --------------------------------------------------------------------------
# random signs on a fixed point set


def _endpoint_mask(ps, t):
    if t is None:
        return np.ones(len(ps), dtype=bool)
    return ps.x <= t


def enumerate_sign_moments(ps: SignedPointSet, alpha: AlphaFunction, a0, n, m, t=None):
    """Exact moments of ``Z_m - Z_n`` over all ``2**k`` sign vectors.

    Returns a dict with ``mean`` and ``second_moment`` of the difference at
    ``t`` (default: right end) and ``sup_sq`` = ``E sup_t (Z_m - Z_n)^2``.
    Only feasible for small ``k``; refuses more than 22 points.
    """
    k = len(ps)
    if k > 22:
        raise ValueError(f"{k} points is too many to enumerate")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=k)), dtype=float).reshape(2**k, k)
    return _sign_stats(ps, alpha, a0, n, m, signs, t)


def _sign_stats(ps, alpha, a0, n, m, signs, t):
    y = np.where(ps.y <= m, ps.y, 1.0)
    signs = signs * (ps.y <= m)
    _, sup_sq = coupled_levels(y, signs, alpha, a0, [n, m])
    mask = _endpoint_mask(ps, t)
    final, _ = coupled_levels(y[mask], signs[:, mask], alpha, a0, [n, m])
    diff = final[1] - final[0]
    return {"diff": diff, "sup_sq_samples": sup_sq[0],
            "mean": float(diff.mean()), "second_moment": float(np.mean(diff**2)),
            "sup_sq": float(sup_sq[0].mean())}


def check_sign_martingale(ps: SignedPointSet, alpha: AlphaFunction, a0, n, m,
                          resamples=10_000, seed=0, t=None, brute_force_limit=20):
    """Resample only the signs of ``ps`` and test the martingale structure.

    Checks that ``E[Z_m(t) - Z_n(t)]`` is zero within 4 standard errors and
    that ``E sup (Z_m - Z_n)^2`` is below the point-sum Cauchy bound. When
    ``ps`` has at most ``brute_force_limit`` points the Monte Carlo moments
    are also compared with exact enumeration.
    """
    if n > m:
        raise ValueError("need n <= m")
    rng = make_rng(seed, "signs")
    signs = np.where(rng.random((resamples, len(ps))) < 0.5, -1.0, 1.0)
    mc = _sign_stats(ps, alpha, a0, n, m, signs, t)
    diff, sup_sq = mc["diff"], mc["sup_sq_samples"]
    se_mean = float(diff.std(ddof=1) / math.sqrt(resamples)) if resamples > 1 else math.inf
    se_m2 = float((diff**2).std(ddof=1) / math.sqrt(resamples)) if resamples > 1 else math.inf
    se_sup = float(sup_sq.std(ddof=1) / math.sqrt(resamples)) if resamples > 1 else math.inf
    bound = cauchy_bound(ps, alpha, n, m)

    rep = DiagnosticsReport(
        "sign_martingale",
        {"a0": a0, "n": n, "m": m, "t": t, "points": len(ps), "alpha": alpha.to_dict(),
         "window": list(ps.window)},
        seed, resamples,
    )
    rep.add_stat("mean_diff", mc["mean"], se_mean)
    rep.add_stat("second_moment", mc["second_moment"], se_m2)
    rep.add_stat("sup_sq", mc["sup_sq"], se_sup)
    rep.add_stat("cauchy_bound", bound.value)
    rep.add_verdict("|mean_diff| <= 4 SE", abs(mc["mean"]), 4 * se_mean, "<=",
                    passed=abs(mc["mean"]) <= 4 * se_mean or (se_mean == 0 and mc["mean"] == 0))
    rep.add_verdict("sup_sq <= cauchy_bound", mc["sup_sq"], bound.value, "<=")
    if len(ps) <= brute_force_limit:
        ex = enumerate_sign_moments(ps, alpha, a0, n, m, t)
        rep.add_stat("exact_mean_diff", ex["mean"])
        rep.add_stat("exact_second_moment", ex["second_moment"])
        rep.add_stat("exact_sup_sq", ex["sup_sq"])
        rep.add_verdict("|MC mean - exact| <= 4 SE", abs(mc["mean"] - ex["mean"]), 4 * se_mean, "<=",
                        passed=abs(mc["mean"] - ex["mean"]) <= 4 * se_mean + 1e-15)
        rep.add_verdict("|MC second moment - exact| <= 4 SE",
                        abs(mc["second_moment"] - ex["second_moment"]), 4 * se_m2, "<=",
                        passed=abs(mc["second_moment"] - ex["second_moment"]) <= 4 * se_m2 + 1e-15)
        rep.add_verdict("exact sup_sq <= cauchy_bound", ex["sup_sq"], bound.value, "<=")
    rep.raw = {"diff": diff, "sup_sq": sup_sq}
    return rep


# --------------------------------------------------------------------------
# convergence rate along a truncation schedule


def _pad(sets):
    k = max((len(p) for p in sets), default=0)
    y = np.ones((len(sets), k))
    s = np.zeros((len(sets), k))
    for i, p in enumerate(sets):
        y[i, :len(p)] = p.y
        s[i, :len(p)] = p.s
    return y, s


def check_convergence_rate(cfg: ProcessConfig, alpha: AlphaFunction, schedule: TruncationSchedule,
                           replicas=500, threads=1, intensity=DEFAULT_INTENSITY, slope_tolerance=0.2):
    """Estimate ``e(n) = E sup |Z_n - Z_N|^2`` along ``schedule``.

    ``N`` is the terminal level; replicas use the shared-low-band coupling.
    Verdicts: ``e(n) <= rate_bound(n)`` for each tested level, and the
    log-log slope of ``e`` is at most ``-(2-b)/b + slope_tolerance``.
    """
    if not cfg.y0 > 0:
        raise ValueError("the rate check needs a lower cutoff y0 > 0")
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    levels = [max(float(v), cfg.y0) for v in schedule.levels]
    if len(levels) < 3:
        raise ValueError("schedule needs at least two tested levels plus the terminal one")
    tested = levels[:-1]

    def run(chunk):
        idx, size = chunk
        sets = [
            sample_nested(cfg.t0, cfg.t1, levels, y_low=cfg.y0, intensity=intensity,
                          seed=np.random.SeedSequence(cfg.rng_seed, spawn_key=(idx * CHUNK + i,)))
            for i in range(size)
        ]
        y, s = _pad(sets)
        _, sup_sq = coupled_levels(y, s, alpha, cfg.a0, levels)
        return sup_sq

    sup_sq = np.concatenate(_map(run, _chunks(replicas, 50), threads), axis=1)
    e = sup_sq.mean(axis=1)
    se = sup_sq.std(axis=1, ddof=1) / math.sqrt(replicas)

    rep = DiagnosticsReport(
        "convergence_rate",
        {"t0": cfg.t0, "t1": cfg.t1, "a0": cfg.a0, "y0": cfg.y0, "levels": levels,
         "alpha": alpha.to_dict(), "intensity": intensity, "slope_tolerance": slope_tolerance},
        cfg.rng_seed, replicas,
    )
    for lv, ev, sev in zip(levels, e, se):
        rep.add_stat(f"e({lv:g})", float(ev), float(sev))
    for lv, ev in zip(tested, e[:-1]):
        bound = rate_bound(cfg.t0, cfg.t1, alpha.a, alpha.b, alpha.M, cfg.y0, lv).value
        rep.add_stat(f"rate_bound({lv:g})", bound)
        rep.add_verdict(f"e({lv:g}) <= rate_bound", float(ev), bound, "<=")
    positive = e[:-1] > 0
    if positive.sum() >= 2:
        slope = _fit_slope(np.log(np.array(tested)[positive]), np.log(e[:-1][positive]))
    else:
        slope = -math.inf
    target = -(2.0 - alpha.b) / alpha.b
    rep.add_stat("slope", slope)
    rep.add_stat("bound_exponent", target)
    rep.add_verdict("slope <= -(2-b)/b + tol", slope, target + slope_tolerance, "<=")
    rep.raw = {f"sup_sq_{lv:g}": sup_sq[i] for i, lv in enumerate(levels)}
    return rep


# --------------------------------------------------------------------------
# frozen prefix and streamed futures


def frozen_prefix_value(t, cfg: ProcessConfig, alpha: AlphaFunction, seed, intensity=DEFAULT_INTENSITY):
    """Build the prefix on ``(t0, t]`` for ``seed`` and return ``Z(t)``."""
    if not cfg.t0 < t < cfg.t1:
        raise ValueError("t must lie strictly inside (t0, t1)")
    ps = sample_half_plane(cfg.t0, cfg.t1, cfg.y0, cfg.n, intensity, make_rng(seed, "prefix"))
    head, _ = freeze_prefix(ps, t)
    return build_truncated(head, alpha, cfg)(t)


def _stream_future(rng, size, zt, alpha, alpha_t, horizon, marks, y_low, y_high, intensity):
    """Run ``size`` independent futures over ``(t, t + horizon]``.

    Points arrive in time order with exponential spacings (rate
    ``intensity * (y_high - y_low)``), uniform heights and fair signs.
    The increment ``W = Z - Z(t)`` and the frozen-index companion ``L`` are
    advanced with identical arithmetic so they agree exactly when the
    index is constant.

    Returns increments and companion values at each mark, the running
    ``sup W^2`` up to each mark, and ``sup |W - L|`` over the horizon.
    """
    rate = intensity * (y_high - y_low)
    span = y_high - y_low
    marks = np.asarray(marks, dtype=float)
    x = np.zeros(size)
    w = np.zeros(size)
    comp = np.zeros(size)
    w_at = np.zeros((marks.size, size))
    l_at = np.zeros((marks.size, size))
    sup_w2 = np.zeros((marks.size, size))
    sup_d = np.zeros(size)
    e_frozen = -1.0 / alpha_t
    if rate <= 0:
        return w_at, l_at, sup_w2, sup_d
    while True:
        x += rng.standard_exponential(size) / rate
        alive = x <= horizon
        if not alive.any():
            break
        y = y_high - span * rng.random(size)
        s = np.where(rng.random(size) < 0.5, -1.0, 1.0) * alive
        w = w + s * np.power(y, -1.0 / alpha(zt + w))
        comp = comp + s * np.power(y, e_frozen)
        np.maximum(sup_d, np.abs(w - comp), out=sup_d)
        w2 = w * w
        for j, mk in enumerate(marks):
            inside = x <= mk
            if not inside.any():
                continue
            w_at[j] = np.where(inside, w, w_at[j])
            l_at[j] = np.where(inside, comp, l_at[j])
            sup_w2[j] = np.where(inside, np.maximum(sup_w2[j], w2), sup_w2[j])
    return w_at, l_at, sup_w2, sup_d


def _summary(values, statistic):
    if statistic == "mean":
        return float(np.mean(values))
    if statistic == "median":
        return float(np.median(values))
    raise ValueError(f"unknown statistic {statistic!r}")


def check_holder(t, cfg: ProcessConfig, alpha: AlphaFunction, replicas=10_000, h_grid=None,
                 threads=1, intensity=DEFAULT_INTENSITY, statistic="median", epsilon=0.3):
    """Right Hoelder exponent of ``Z`` at ``t`` given a frozen prefix.

    The prefix (points with ``x <= t``) is drawn once from ``cfg.rng_seed``;
    each replica draws an independent future with truncation ``cfg.n``.
    ``m2(h)`` summarises ``sup_{h'<=h} (Z(t+h') - Z(t))^2`` across replicas
    with ``statistic`` (``"median"`` by default, ``"mean"`` also reported),
    and the slope of ``log m2`` against ``log h`` must be at least
    ``2/alpha(Z(t)) - epsilon``.
    """
    if h_grid is None:
        h_grid = [2.0**-k for k in range(3, 11)]
    h = np.sort(np.asarray(h_grid, dtype=float))
    if h.size < 2 or h[0] <= 0 or np.any(np.diff(h) <= 0):
        raise ValueError("h_grid needs at least two distinct positive values")
    if not t + h[-1] < cfg.t1:
        raise ValueError("largest h must satisfy t + h < t1")
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    zt = frozen_prefix_value(t, cfg, alpha, cfg.rng_seed, intensity)
    alpha_t = float(alpha(zt))

    def run(chunk):
        idx, size = chunk
        rng = make_rng(cfg.rng_seed, "holder", idx)
        _, _, sup_w2, _ = _stream_future(rng, size, zt, alpha, alpha_t, h[-1], h,
                                         cfg.y0, cfg.n, intensity)
        return sup_w2

    sup_w2 = np.concatenate(_map(run, _chunks(replicas), threads), axis=1)
    m2 = np.array([_summary(v, statistic) for v in sup_w2])
    m2_mean = sup_w2.mean(axis=1)
    m2_se = sup_w2.std(axis=1, ddof=1) / math.sqrt(replicas)

    rep = DiagnosticsReport(
        "holder",
        {"t": t, "t0": cfg.t0, "t1": cfg.t1, "a0": cfg.a0, "n": cfg.n, "y0": cfg.y0,
         "h_grid": h.tolist(), "alpha": alpha.to_dict(), "statistic": statistic,
         "epsilon": epsilon, "intensity": intensity},
        cfg.rng_seed, replicas,
    )
    rep.add_stat("Z(t)", zt)
    rep.add_stat("alpha(Z(t))", alpha_t)
    for hv, mv, mm, ms in zip(h, m2, m2_mean, m2_se):
        rep.add_stat(f"m2({hv:g})", float(mv))
        rep.add_stat(f"mean_sup_sq({hv:g})", float(mm), float(ms))
    good = m2 > 0
    slope = _fit_slope(np.log(h[good]), np.log(m2[good])) if good.sum() >= 2 else -math.inf
    good_mean = m2_mean > 0
    slope_mean = (_fit_slope(np.log(h[good_mean]), np.log(m2_mean[good_mean]))
                  if good_mean.sum() >= 2 else -math.inf)
    rep.add_stat("slope", slope)
    rep.add_stat("slope_mean_statistic", slope_mean)
    rep.add_verdict("m2 nondecreasing in h", float(np.min(np.diff(m2))), 0.0, ">=")
    rep.add_verdict("slope >= 2/alpha(Z(t)) - eps", slope, 2.0 / alpha_t - epsilon, ">=")
    rep.raw = {f"sup_sq_{hv:g}": sup_w2[i] for i, hv in enumerate(h)}
    return rep


def check_local_form(t, cfg: ProcessConfig, alpha: AlphaFunction, replicas=10_000,
                     r_grid=(1e-2, 1e-3), u_grid=(0.25, 0.5, 1.0), oracle_count=None,
                     threads=1, intensity=DEFAULT_INTENSITY, window_points=None,
                     level=0.01, exponent_tolerance=0.2):
    """Distributional and pathwise local form of ``Z`` at ``t``.

    For each ``r`` the scaled increments ``(Z(t+ru) - Z(t)) / r**(1/alpha(Z(t)))``
    are computed per replica. At the smallest ``r`` each ``u > 0`` gets a
    two-sample KS test against :func:`stable_oracle_sample`, at level
    ``level`` with a Bonferroni correction over ``u``. The companion
    deviation ``sup_u |scaled Z - scaled L|`` (median over replicas) must
    decay across ``r`` with exponent at least ``1/b - exponent_tolerance``.

    ``window_points``, if given, sets a per-``r`` truncation level so that
    the future window ``(t, t+r]`` holds that many points on average;
    otherwise ``cfg.n`` is used throughout.
    """
    r = np.sort(np.asarray(r_grid, dtype=float))[::-1]
    u = np.asarray(u_grid, dtype=float)
    if r.size < 1 or r[-1] <= 0 or not t + r[0] < cfg.t1:
        raise ValueError("r_grid must be positive with t + max(r) < t1")
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u_grid must lie in [0, 1]")
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    oracle_count = replicas if oracle_count is None else oracle_count
    zt = frozen_prefix_value(t, cfg, alpha, cfg.rng_seed, intensity)
    alpha_t = float(alpha(zt))
    positive_u = u[u > 0]
    corrected = level / max(1, positive_u.size)

    rep = DiagnosticsReport(
        "local_form",
        {"t": t, "t0": cfg.t0, "t1": cfg.t1, "a0": cfg.a0, "n": cfg.n, "y0": cfg.y0,
         "r_grid": r.tolist(), "u_grid": u.tolist(), "alpha": alpha.to_dict(),
         "oracle_count": oracle_count, "level": level, "bonferroni_level": corrected,
         "window_points": window_points, "intensity": intensity,
         "exponent_tolerance": exponent_tolerance},
        cfg.rng_seed, replicas,
    )
    rep.add_stat("Z(t)", zt)
    rep.add_stat("alpha(Z(t))", alpha_t)

    dev = []
    scaled_last = None
    for ri, rv in enumerate(r):
        top = cfg.n if window_points is None else cfg.y0 + window_points / (intensity * rv)

        def run(chunk, rv=rv, top=top, ri=ri):
            idx, size = chunk
            rng = make_rng(cfg.rng_seed, "local", ri, idx)
            return _stream_future(rng, size, zt, alpha, alpha_t, rv, rv * np.maximum(u, 0.0),
                                  cfg.y0, top, intensity)

        parts = _map(run, _chunks(replicas), threads)
        w_at = np.concatenate([p[0] for p in parts], axis=1)
        l_at = np.concatenate([p[1] for p in parts], axis=1)
        sup_d = np.concatenate([p[3] for p in parts])
        scale = rv ** (1.0 / alpha_t)
        scaled = w_at / scale
        scaled_dev = sup_d / scale
        dev.append(float(np.median(scaled_dev)))
        rep.add_stat(f"truncation(r={rv:g})", top)
        rep.add_stat(f"companion_deviation(r={rv:g})", dev[-1])
        rep.add_stat(f"max_scaled_gap_at_grid(r={rv:g})",
                     float(np.max(np.abs(scaled - l_at / scale))) if scaled.size else 0.0)
        for j, uv in enumerate(u):
            if uv == 0:
                rep.add_stat(f"max|scaled|(r={rv:g},u=0)", float(np.max(np.abs(scaled[j]))))
                continue
            oracle = stable_oracle_sample(alpha_t, uv, oracle_count,
                                          make_rng(cfg.rng_seed, "oracle", ri, j), intensity)
            ks = stats.ks_2samp(scaled[j], oracle)
            rep.add_stat(f"ks(r={rv:g},u={uv:g})", float(ks.statistic))
            rep.add_stat(f"ks_pvalue(r={rv:g},u={uv:g})", float(ks.pvalue))
            if ri == r.size - 1:
                rep.add_verdict(f"KS p-value at r={rv:g}, u={uv:g}", float(ks.pvalue), corrected, ">=")
        scaled_last = scaled

    if r.size >= 2:
        devs = np.array(dev)
        if np.all(devs == 0):
            exponent = math.inf
        elif np.all(devs > 0):
            exponent = _fit_slope(np.log(r), np.log(devs))
        else:
            exponent = -math.inf
        rep.add_stat("companion_exponent", exponent)
        rep.add_verdict("companion exponent >= 1/b - tol", exponent,
                        1.0 / alpha.b - exponent_tolerance, ">=")
    rep.raw = {f"scaled_u{uv:g}": scaled_last[j] for j, uv in enumerate(u)}
    return rep
