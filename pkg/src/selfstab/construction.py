"""Recursive construction of truncated self-stabilizing paths and companions.

``build_truncated`` is the reference single-path recursion: walking the
points in time order, each jump is ``s * y**(-1/alpha(z))`` where ``z`` is
the value just before the jump. ``coupled_levels`` runs the same
recursion for many replicas and several truncation levels at once.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bounds import stable_norm_constant
from .core import AlphaFunction, PathFunction, ProcessConfig, sup_distance
from .points import DEFAULT_INTENSITY, SignedPointSet, TruncationSchedule, restrict, sample_nested

__all__ = [
    "build_truncated",
    "build_limit",
    "ConvergenceTrace",
    "build_stable",
    "build_local_companion",
    "build_multistable",
    "build_subordinator",
    "coupled_levels",
]


def _window_points(ps: SignedPointSet, cfg: ProcessConfig):
    w = ps.window
    if w.t0 < cfg.t0 or w.t1 > cfg.t1:
        raise ValueError("point set window lies outside the configured interval")
    keep = (ps.y <= cfg.n) & (ps.y >= cfg.y0)
    return ps.x[keep], ps.y[keep], ps.s[keep]


def build_truncated(ps: SignedPointSet, alpha: AlphaFunction, cfg: ProcessConfig) -> PathFunction:
    """Truncated path ``Z_n`` on ``[cfg.t0, cfg.t1)`` from the points with
    ``cfg.y0 <= y <= cfg.n``.

    Single left-to-right pass; the left limit at each jump is the previous
    post-jump value.
    """
    x, y, s = _window_points(ps, cfg)
    if x.size and np.any(np.diff(x) <= 0):
        raise ValueError("x values must be strictly increasing")
    z = cfg.a0
    values = []
    for yi, si in zip(y.tolist(), s.tolist()):
        z = z + si * yi ** (-1.0 / alpha(z))
        values.append(z)
    return PathFunction(cfg.t0, cfg.t1, cfg.a0, x, values)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-level diagnostics of a run along a truncation schedule.

    ``distances[j]`` is ``sup |Z_{n_{j+1}} - Z_{n_j}|``; ``tail_sums[j]`` is
    ``sum_{y > n_j} y^(-2/b)`` over the sampled window, and
    ``rapid[j]`` records whether it is below ``2**-(j+1)``.
    """

    levels: tuple
    distances: tuple
    tail_sums: tuple
    rapid: tuple
    jumps: tuple


def build_limit(alpha: AlphaFunction, cfg: ProcessConfig, schedule: TruncationSchedule | None = None,
                points: SignedPointSet | None = None, intensity: float = DEFAULT_INTENSITY):
    """Build ``Z_{n_j}`` for every schedule level with shared low bands.

    If ``points`` is omitted, a nested sample is drawn band by band from
    ``cfg.rng_seed``. Returns ``(terminal_path, trace)``; the terminal level
    stands in for the limit.
    """
    if schedule is None:
        schedule = TruncationSchedule.dyadic(0, 10)
    levels = [lv for lv in schedule.levels]
    if points is None:
        lo = cfg.y0
        levels = [max(lv, lo) for lv in levels]
        points = sample_nested(cfg.t0, cfg.t1, levels, y_low=lo, intensity=intensity, seed=cfg.rng_seed)
    elif points.window.y_high < levels[-1]:
        raise ValueError("point set does not cover the terminal level")
    paths = [build_truncated(points, alpha, replace(cfg, n=lv)) for lv in levels]
    distances = tuple(sup_distance(p, q) for p, q in zip(paths, paths[1:]))
    tails = tuple(float(np.sum(points.y[points.y > lv] ** (-2.0 / alpha.b))) for lv in levels)
    rapid = tuple(t < 2.0 ** -(j + 1) for j, t in enumerate(tails))
    trace = ConvergenceTrace(tuple(levels), distances, tails, rapid, tuple(p.n_jumps for p in paths))
    return paths[-1], trace


def build_stable(ps: SignedPointSet, alpha_const: float, t0: float, t1: float,
                 normalized: bool = False, start: float = 0.0) -> PathFunction:
    """Point-sum stable motion ``sum_{x<=t} s y^(-1/alpha)``.

    With ``normalized`` the jumps are multiplied by ``C_alpha``. ``start``
    is the initial value; accumulation runs left to right from it.
    """
    if not 0 < alpha_const < 2:
        raise ValueError("alpha must lie in (0, 2)")
    keep = (ps.x > t0) & (ps.x < t1)
    e = -1.0 / alpha_const
    scale = stable_norm_constant(alpha_const) if normalized else None
    v = start
    values = []
    for yi, si in zip(ps.y[keep].tolist(), ps.s[keep].tolist()):
        jump = si * yi ** e
        if scale is not None:
            jump = scale * jump
        v = v + jump
        values.append(v)
    return PathFunction(t0, t1, start, ps.x[keep], values)


def build_local_companion(ps: SignedPointSet, alpha_frozen: float, t: float, t1: float) -> PathFunction:
    """Fixed-index companion ``L(u) = sum_{t<x<=u} s y^(-1/alpha_frozen)`` on ``[t, t1)``."""
    return build_stable(ps, alpha_frozen, t, t1, normalized=False, start=0.0)


def build_multistable(ps: SignedPointSet, alpha: AlphaFunction, t0: float, t1: float) -> PathFunction:
    """Multistable motion: the index depends on the jump *time*, not the value."""
    keep = (ps.x > t0) & (ps.x < t1)
    x, y, s = ps.x[keep], ps.y[keep], ps.s[keep]
    idx = np.asarray(alpha(x), dtype=float)
    if np.any((idx <= 0) | (idx >= 2)):
        raise ValueError("alpha(x) must lie in (0, 2)")
    if x.size == 0:
        return PathFunction(t0, t1, 0.0)
    jumps = stable_norm_constant(idx) * s * y ** (-1.0 / idx)
    return PathFunction(t0, t1, 0.0, x, np.cumsum(jumps))


def build_subordinator(ps: SignedPointSet, alpha_const: float, t0: float, t1: float,
                       truncated: bool = False) -> PathFunction:
    """Stable subordinator ``sum_{x<=t} y^(-1/alpha)`` (signs ignored).

    ``alpha_const >= 1`` is only accepted with ``truncated=True`` since the
    untruncated sum then diverges.
    """
    if not 0 < alpha_const < 2:
        raise ValueError("alpha must lie in (0, 2)")
    if alpha_const >= 1 and not truncated:
        raise ValueError("alpha >= 1 gives a divergent sum; pass truncated=True to accept")
    keep = (ps.x > t0) & (ps.x < t1)
    jumps = ps.y[keep] ** (-1.0 / alpha_const)
    return PathFunction(t0, t1, 0.0, ps.x[keep], np.cumsum(jumps))


def coupled_levels(y, s, alpha: AlphaFunction, a0, levels):
    """Run the recursion for several truncation levels over many replicas.

    Parameters
    ----------
    y : ndarray, shape (K,) or (R, K)
        Point heights in time order (shared across replicas if 1-d).
        Padding entries must carry sign 0.
    s : ndarray, shape (R, K)
        Signs in {-1, 0, +1}.
    levels : sequence of float
        Truncation levels; the last one is the reference level.

    Returns
    -------
    final : ndarray, shape (L, R)
        ``Z_level`` after the last point.
    sup_sq : ndarray, shape (L, R)
        ``max_t (Z_level(t) - Z_last(t))**2`` over the merged jump grid.
    """
    s = np.atleast_2d(np.asarray(s, dtype=float))
    y = np.asarray(y, dtype=float)
    shared = y.ndim == 1
    R, K = s.shape
    lv = np.asarray(levels, dtype=float)[:, None]
    z = np.full((lv.shape[0], R), float(a0))
    sup_sq = np.zeros_like(z)
    for k in range(K):
        yk = y[k] if shared else y[:, k]
        active = s[:, k] * (yk <= lv)
        if not active.any():
            continue
        z = z + active * np.power(yk, -1.0 / alpha(z))
        d = z - z[-1]
        np.maximum(sup_sq, d * d, out=sup_sq)
    return z, sup_sq
