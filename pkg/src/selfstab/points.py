"""Signed Poisson point sets on strips ``(t0, t1) x [y_low, y_high]``.

The canonical form is a half-plane Poisson process with mean measure
``intensity * Lebesgue`` (intensity 2 by default) carrying independent
fair signs, which is equal in law to a full-plane process with unit
intensity.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Window",
    "SignedPointSet",
    "TruncationSchedule",
    "make_rng",
    "sample_half_plane",
    "extend_window",
    "restrict",
    "freeze_prefix",
    "sample_nested",
]

DEFAULT_INTENSITY = 2.0


def _tag(key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode())
    return int(key)


def make_rng(seed, *keys) -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, *keys)``.

    Every distinct key tuple gives an independent Philox stream, so replicas
    can be drawn in any order (or in parallel) with identical results.
    String keys are hashed.
    """
    if isinstance(seed, np.random.Generator):
        if keys:
            raise TypeError("keys cannot be combined with a Generator seed")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + tuple(_tag(k) for k in keys))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_tag(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class Window(NamedTuple):
    t0: float
    t1: float
    y_low: float
    y_high: float

    @property
    def area(self) -> float:
        return (self.t1 - self.t0) * (self.y_high - self.y_low)


class SignedPointSet:
    """Finite realisation ``{(x, y, s)}`` sorted by strictly increasing ``x``."""

    __slots__ = ("x", "y", "s", "window", "intensity")

    def __init__(self, x, y, s, window, intensity=DEFAULT_INTENSITY):
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        s = np.array(s, dtype=np.int8)
        window = Window(*map(float, window))
        if not (x.shape == y.shape == s.shape) or x.ndim != 1:
            raise ValueError("x, y, s must be 1-d arrays of equal length")
        if x.size:
            if np.any(np.diff(x) <= 0):
                raise ValueError("x must be strictly increasing")
            if x[0] <= window.t0 or x[-1] >= window.t1:
                raise ValueError("x must lie strictly inside (t0, t1)")
            if np.any(y < window.y_low) or np.any(y > window.y_high) or np.any(y <= 0):
                raise ValueError("y outside the window")
            if np.any(np.abs(s) != 1):
                raise ValueError("signs must be +1 or -1")
        for arr in (x, y, s):
            arr.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "intensity", float(intensity))

    def __setattr__(self, name, value):
        raise AttributeError("SignedPointSet is immutable")

    def __len__(self):
        return int(self.x.size)

    def __repr__(self):
        return f"SignedPointSet({len(self)} points, window={tuple(self.window)})"

    def __eq__(self, other):
        if not isinstance(other, SignedPointSet):
            return NotImplemented
        return (
            self.window == other.window
            and self.intensity == other.intensity
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.s, other.s)
        )

    __hash__ = None

    def full_plane(self) -> tuple[np.ndarray, np.ndarray]:
        """View as a full-plane set: ``(x, s*y)``."""
        return self.x, self.s * self.y

    def with_signs(self, s) -> "SignedPointSet":
        """Same points with new signs; a scalar is broadcast."""
        s = np.broadcast_to(np.asarray(s), self.x.shape)
        return SignedPointSet(self.x, self.y, s, self.window, self.intensity)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        w = self.window
        lines = [
            f"# t0={w.t0!r},t1={w.t1!r},y_low={w.y_low!r},y_high={w.y_high!r},intensity={self.intensity!r}",
            "x,y,s",
        ]
        lines += [f"{float(a)!r},{float(b)!r},{int(c)}" for a, b, c in zip(self.x, self.y, self.s)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, path, window=None, intensity=None) -> "SignedPointSet":
        """Read a CSV written by :meth:`to_csv`.

        The window comment line is optional if ``window`` is passed.
        """
        meta = {}
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for item in line[1:].split(","):
                        k, _, v = item.partition("=")
                        meta[k.strip()] = float(v)
                    continue
                rows.append(line.split(","))
        if not rows or rows[0] != ["x", "y", "s"]:
            raise ValueError("expected header 'x,y,s'")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 3)
        if window is None:
            try:
                window = (meta["t0"], meta["t1"], meta["y_low"], meta["y_high"])
            except KeyError as exc:
                raise ValueError("window missing from CSV and not supplied") from exc
        if intensity is None:
            intensity = meta.get("intensity", DEFAULT_INTENSITY)
        return cls(data[:, 0], data[:, 1], data[:, 2].astype(np.int8), window, intensity)


@dataclass(frozen=True)
class TruncationSchedule:
    """Strictly increasing truncation levels; the last one is terminal."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if not levels:
            raise ValueError("schedule needs at least one level")
        if levels[0] <= 0 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be positive and strictly increasing")
        object.__setattr__(self, "levels", levels)

    @property
    def terminal(self) -> float:
        return self.levels[-1]

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    @classmethod
    def dyadic(cls, start_power=0, stop_power=10) -> "TruncationSchedule":
        """Levels ``2**j`` for ``j = start_power..stop_power``."""
        return cls(tuple(2.0**j for j in range(start_power, stop_power + 1)))


def _draw_band(rng, t0, t1, lo, hi, intensity, taken=None):
    """Poisson band sample; returns unsorted x, y, s with x values distinct."""
    area = (t1 - t0) * (hi - lo)
    k = int(rng.poisson(intensity * area)) if area > 0 else 0
    x = rng.uniform(t0, t1, k)
    y = rng.uniform(lo, hi, k)
    s = np.where(rng.random(k) < 0.5, -1, 1).astype(np.int8)
    # open interval in y at the low end when lo == 0, closed-open never matters otherwise
    bad = y <= 0
    while np.any(bad):
        y[bad] = rng.uniform(lo, hi, int(bad.sum()))
        bad = y <= 0
    x = _redraw_ties(rng, x, t0, t1, taken)
    return x, y, s


def _redraw_ties(rng, x, t0, t1, taken=None):
    """Redraw x values that collide (with each other, an endpoint, or ``taken``)."""
    while True:
        allx = x if taken is None else np.concatenate([taken, x])
        order = np.argsort(allx, kind="stable")
        sx = allx[order]
        dup = np.zeros(allx.size, dtype=bool)
        dup[order[1:][np.diff(sx) == 0]] = True
        dup |= (allx <= t0) | (allx >= t1)
        if taken is not None:
            dup = dup[taken.size:]
        if not dup.any():
            return x
        x = x.copy()
        x[dup] = rng.uniform(t0, t1, int(dup.sum()))


def sample_half_plane(t0, t1, y_low, y_high, intensity=DEFAULT_INTENSITY, seed=0) -> SignedPointSet:
    """Poisson points on ``(t0, t1) x [y_low, y_high]`` with fair random signs.

    Examples
    --------
    >>> ps = sample_half_plane(0.0, 1.0, 0.0, 10.0, seed=3)
    >>> bool(np.all(np.diff(ps.x) > 0))
    True
    """
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    if not 0 <= y_low <= y_high:
        raise ValueError("need 0 <= y_low <= y_high")
    if not intensity > 0:
        raise ValueError("intensity must be positive")
    rng = make_rng(seed)
    x, y, s = _draw_band(rng, t0, t1, y_low, y_high, intensity)
    order = np.argsort(x)
    return SignedPointSet(x[order], y[order], s[order], (t0, t1, y_low, y_high), intensity)


def extend_window(ps: SignedPointSet, new_y_high, seed=0) -> SignedPointSet:
    """Add an independent band ``(y_high, new_y_high]`` to ``ps``.

    Existing points and signs are kept, so restricting the result back to
    ``y <= ps.window.y_high`` recovers ``ps`` exactly.
    """
    w = ps.window
    if new_y_high < w.y_high:
        raise ValueError("new_y_high must not be below the current y_high")
    if new_y_high == w.y_high:
        return ps
    rng = make_rng(seed)
    x, y, s = _draw_band(rng, w.t0, w.t1, w.y_high, new_y_high, ps.intensity, taken=ps.x)
    # band is (y_high, new]: a draw exactly at y_high belongs to the old band
    at_edge = y == w.y_high
    while np.any(at_edge):
        y[at_edge] = rng.uniform(w.y_high, new_y_high, int(at_edge.sum()))
        at_edge = y == w.y_high
    xs = np.concatenate([ps.x, x])
    order = np.argsort(xs, kind="stable")
    return SignedPointSet(
        xs[order],
        np.concatenate([ps.y, y])[order],
        np.concatenate([ps.s, s])[order],
        (w.t0, w.t1, w.y_low, new_y_high),
        ps.intensity,
    )


def restrict(ps: SignedPointSet, y_max) -> SignedPointSet:
    """Keep the points with ``y <= y_max`` (inclusive)."""
    w = ps.window
    keep = ps.y <= y_max
    top = min(w.y_high, max(y_max, w.y_low))
    return SignedPointSet(ps.x[keep], ps.y[keep], ps.s[keep], (w.t0, w.t1, w.y_low, top), ps.intensity)


def freeze_prefix(ps: SignedPointSet, t) -> tuple[SignedPointSet, SignedPointSet]:
    """Split into points with ``x <= t`` and ``x > t``.

    The prefix is what gets held fixed when conditioning on the past up to
    ``t``; the suffix is resampled per replica.
    """
    w = ps.window
    if not w.t0 <= t < w.t1:
        raise ValueError(f"t={t} outside [{w.t0}, {w.t1})")
    k = int(np.searchsorted(ps.x, t, side="right"))
    # the prefix window is closed at t; nudge so x == t stays strictly inside
    head_t1 = float(np.nextafter(t, np.inf))
    head = SignedPointSet(ps.x[:k], ps.y[:k], ps.s[:k], (w.t0, head_t1, w.y_low, w.y_high), ps.intensity)
    tail = SignedPointSet(ps.x[k:], ps.y[k:], ps.s[k:], (t, w.t1, w.y_low, w.y_high), ps.intensity)
    return head, tail


def sample_nested(t0, t1, levels: Sequence[float], y_low=0.0, intensity=DEFAULT_INTENSITY, seed=0) -> SignedPointSet:
    """Sample up to ``levels[-1]`` band by band with :func:`extend_window`.

    Band ``j`` uses its own stream ``(seed, j)``, so the low bands of a
    longer schedule coincide with those of a shorter one.
    """
    levels = list(levels)
    if not levels or levels[0] < y_low:
        raise ValueError("levels must start at or above y_low")
    ps = sample_half_plane(t0, t1, y_low, levels[0], intensity, make_rng(seed, "band", 0))
    for j, level in enumerate(levels[1:], start=1):
        ps = extend_window(ps, level, make_rng(seed, "band", j))
    return ps
