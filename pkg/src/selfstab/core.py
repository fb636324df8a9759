"""Shared vocabulary: signed powers, index functions, piecewise-constant paths."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "signed_power",
    "ab_power",
    "AlphaFunction",
    "ALPHA_FAMILIES",
    "parse_alpha",
    "PathFunction",
    "evaluate_path",
    "sup_distance",
    "ProcessConfig",
]


def signed_power(r, s):
    """Return ``sign(r) * |r|**s``.

    Works elementwise on arrays. Raises ``ValueError`` when ``r == 0`` and
    ``s <= 0``.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any((r == 0) & (s <= 0)):
        raise ValueError("signed_power: r == 0 requires s > 0")
    out = np.sign(r) * np.abs(r) ** s
    return out.item() if out.ndim == 0 else out


def ab_power(y, a, b, order=1):
    """Auxiliary power ``max(y**(-1/a), y**(-1/b)) * (1 + |log y|)``.

    With ``order=2`` the square is returned.

    Parameters
    ----------
    y : float or ndarray
        Positive argument.
    a, b : float
        Lower and upper bounds of the index function.
    order : {1, 2}
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("ab_power requires y > 0")
    logy = np.log(y)
    base = np.maximum(np.exp(-logy / a), np.exp(-logy / b)) * (1.0 + np.abs(logy))
    out = base * base if order == 2 else base
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class AlphaFunction:
    """Index map ``alpha: R -> [a, b]`` with certified bounds.

    ``derivative_bound`` is an upper bound for ``sup |alpha'| / alpha**2``.
    Use :meth:`constant`, :meth:`tanh` or :meth:`custom` to construct one.
    """

    func: Callable = field(repr=False)
    lower_bound: float
    upper_bound: float
    derivative_bound: float
    name: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        a, b, M = self.lower_bound, self.upper_bound, self.derivative_bound
        if not (0 < a <= b < 2):
            raise ValueError(f"need 0 < a <= b < 2, got a={a}, b={b}")
        if not M >= 0:
            raise ValueError(f"derivative bound must be >= 0, got {M}")

    @property
    def a(self) -> float:
        return self.lower_bound

    @property
    def b(self) -> float:
        return self.upper_bound

    @property
    def M(self) -> float:
        return self.derivative_bound

    def evaluate(self, z):
        return self.func(z)

    __call__ = evaluate

    @property
    def is_constant(self) -> bool:
        return self.name == "constant"

    @classmethod
    def constant(cls, value: float) -> "AlphaFunction":
        value = float(value)
        return cls(_Constant(value), value, value, 0.0, "constant", (value,))

    @classmethod
    def tanh(cls, c0: float, c1: float) -> "AlphaFunction":
        """``alpha(z) = c0 + c1*tanh(z)``, with ``M = |c1| / (c0 - |c1|)**2``."""
        c0, c1 = float(c0), float(c1)
        lo, hi = c0 - abs(c1), c0 + abs(c1)
        if lo <= 0 or hi >= 2:
            raise ValueError(f"tanh family needs 0 < c0-|c1| and c0+|c1| < 2, got ({c0}, {c1})")
        if c1 == 0:
            return cls.constant(c0)
        return cls(_Tanh(c0, c1), lo, hi, abs(c1) / lo**2, "tanh", (c0, c1))

    @classmethod
    def custom(cls, func, a, b, M, name="custom") -> "AlphaFunction":
        """Wrap a user map; ``a``, ``b`` and ``M`` must be certified by the caller."""
        return cls(func, float(a), float(b), float(M), name, ())

    def to_dict(self) -> dict:
        return {"name": self.name, "params": list(self.params)}


class _Constant:
    def __init__(self, value):
        self.value = value

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self.value
        return np.full(np.shape(z), self.value)


class _Tanh:
    def __init__(self, c0, c1):
        self.c0, self.c1 = c0, c1

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self.c0 + self.c1 * math.tanh(z)
        return self.c0 + self.c1 * np.tanh(z)


ALPHA_FAMILIES = {
    "constant": AlphaFunction.constant,
    "tanh": AlphaFunction.tanh,
}


def parse_alpha(text: str) -> AlphaFunction:
    """Parse ``"name:p1,p2,..."`` into a built-in :class:`AlphaFunction`."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in ALPHA_FAMILIES:
        raise ValueError(
            f"unknown alpha family {name!r}; built-ins: {', '.join(sorted(ALPHA_FAMILIES))}"
        )
    try:
        params = [float(p) for p in rest.split(",") if p.strip()]
    except ValueError as exc:
        raise ValueError(f"bad alpha parameters in {text!r}") from exc
    return ALPHA_FAMILIES[name](*params)


def alpha_from_dict(d: dict) -> AlphaFunction:
    name = d["name"]
    if name not in ALPHA_FAMILIES:
        raise ValueError(
            f"unknown alpha family {name!r}; built-ins: {', '.join(sorted(ALPHA_FAMILIES))}"
        )
    return ALPHA_FAMILIES[name](*d.get("params", []))


class PathFunction:
    """Piecewise-constant cadlag path on ``[t_start, t_end)``.

    Stored as an initial value plus strictly increasing jump times and the
    value taken *after* each jump. Instances are immutable.
    """

    __slots__ = ("t_start", "t_end", "initial_value", "jump_times", "jump_values")

    def __init__(self, t_start, t_end, initial_value, jump_times=(), jump_values=()):
        times = np.array(jump_times, dtype=float)
        values = np.array(jump_values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("jump_times and jump_values must be 1-d and equal length")
        if not t_start < t_end:
            raise ValueError("need t_start < t_end")
        if times.size:
            if np.any(np.diff(times) <= 0):
                raise ValueError("jump times must be strictly increasing")
            if times[0] <= t_start or times[-1] >= t_end:
                raise ValueError("jump times must lie in (t_start, t_end)")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "t_start", float(t_start))
        object.__setattr__(self, "t_end", float(t_end))
        object.__setattr__(self, "initial_value", float(initial_value))
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "jump_values", values)

    def __setattr__(self, name, value):
        raise AttributeError("PathFunction is immutable")

    def __repr__(self):
        return (
            f"PathFunction([{self.t_start}, {self.t_end}), initial={self.initial_value}, "
            f"jumps={self.jump_times.size})"
        )

    def __eq__(self, other):
        if not isinstance(other, PathFunction):
            return NotImplemented
        return (
            self.t_start == other.t_start
            and self.t_end == other.t_end
            and self.initial_value == other.initial_value
            and np.array_equal(self.jump_times, other.jump_times)
            and np.array_equal(self.jump_values, other.jump_values)
        )

    __hash__ = None

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)

    @property
    def jump_sizes(self) -> np.ndarray:
        return np.diff(np.concatenate([[self.initial_value], self.jump_values]))

    @property
    def final_value(self) -> float:
        return float(self.jump_values[-1]) if self.n_jumps else self.initial_value

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < self.t_start) | (t >= self.t_end)):
            raise ValueError(f"t outside [{self.t_start}, {self.t_end})")
        return t

    def _lookup(self, idx):
        values = np.concatenate([[self.initial_value], self.jump_values])
        return values[idx]

    def __call__(self, t):
        t = self._check_range(t)
        out = self._lookup(np.searchsorted(self.jump_times, t, side="right"))
        return out.item() if out.ndim == 0 else out

    def left_limit(self, t):
        """Value just before ``t``; ``p(t_start-)`` is the initial value."""
        t = self._check_range(t)
        out = self._lookup(np.searchsorted(self.jump_times, t, side="left"))
        return out.item() if out.ndim == 0 else out

    def sup_norm(self) -> float:
        return float(np.max(np.abs(np.concatenate([[self.initial_value], self.jump_values]))))

    def shifted(self, offset: float) -> "PathFunction":
        return PathFunction(
            self.t_start, self.t_end, self.initial_value + offset,
            self.jump_times, self.jump_values + offset,
        )

    def to_csv(self, path) -> None:
        """Write ``t,value`` rows: ``t_start`` first, then every jump."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = ["t,value", f"{self.t_start!r},{self.initial_value!r}"]
        lines += [f"{float(t)!r},{float(v)!r}" for t, v in zip(self.jump_times, self.jump_values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, path, t_end: float) -> "PathFunction":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["t", "value"]:
            raise ValueError("expected header 't,value'")
        data = [(float(t), float(v)) for t, v in rows[1:]]
        if not data:
            raise ValueError("path CSV has no data rows")
        (t0, v0), rest = data[0], data[1:]
        return cls(t0, t_end, v0, [r[0] for r in rest], [r[1] for r in rest])


def evaluate_path(p: PathFunction, t, left: bool = False):
    """Evaluate ``p`` at ``t`` (right-continuous), or its left limit if ``left``."""
    return p.left_limit(t) if left else p(t)


def sup_distance(p: PathFunction, q: PathFunction) -> float:
    """Exact ``sup |p - q|`` over the common interval, via the merged jump grid."""
    if p.t_start != q.t_start or p.t_end != q.t_end:
        raise ValueError("paths are defined on different intervals")
    grid = np.union1d(p.jump_times, q.jump_times)
    diff = abs(p.initial_value - q.initial_value)
    if grid.size:
        diff = max(diff, float(np.max(np.abs(p(grid) - q(grid)))))
    return float(diff)


@dataclass(frozen=True)
class ProcessConfig:
    """Interval, start value, truncation window and seed of one construction."""

    t0: float = 0.0
    t1: float = 1.0
    a0: float = 0.0
    n: float = 1024.0
    y0: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ValueError(f"need t0 < t1, got ({self.t0}, {self.t1})")
        if not self.y0 >= 0:
            raise ValueError(f"need y0 >= 0, got {self.y0}")
        if not self.n >= self.y0:
            raise ValueError(f"need n >= y0, got n={self.n}, y0={self.y0}")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    @property
    def length(self) -> float:
        return self.t1 - self.t0
