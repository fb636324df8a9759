"""Command-line front end.

Exit codes: 0 success / all verdicts pass, 1 a verdict failed, 2 usage or
configuration error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import diagnostics as diag
from .construction import build_limit, build_truncated
from .core import ALPHA_FAMILIES, AlphaFunction, ProcessConfig, alpha_from_dict, parse_alpha
from .points import SignedPointSet, TruncationSchedule, sample_half_plane

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SCHEMA_VERSION = 1
THREADS_ENV = "SELFSTAB_THREADS"

DEFAULTS = {
    "t0": 0.0,
    "t1": 1.0,
    "a0": 0.0,
    "alpha": {"name": "tanh", "params": [1.2, 0.4]},
    "n": 1024.0,
    "n_levels": None,
    "y0": 0.0,
    "seed": 0,
    "intensity": 2.0,
}


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def load_config(path) -> dict:
    """Read a JSON config document (keys as written by :func:`config_document`)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config document must be a JSON object")
    return data


def config_document(cfg: ProcessConfig, alpha: AlphaFunction, levels=None, **extra) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "t0": cfg.t0,
        "t1": cfg.t1,
        "a0": cfg.a0,
        "alpha": alpha.to_dict(),
        "n": cfg.n,
        "n_levels": list(levels) if levels is not None else None,
        "y0": cfg.y0,
        "seed": int(cfg.rng_seed),
    }
    doc.update(extra)
    return doc


def _effective(args, keys) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    eff = {k: DEFAULTS.get(k) for k in keys}
    if getattr(args, "config", None):
        data = load_config(args.config)
        for k in keys:
            if k in data:
                eff[k] = data[k]
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            eff[k] = v
    return eff


def _alpha(value) -> AlphaFunction:
    try:
        if isinstance(value, str):
            return parse_alpha(value)
        if isinstance(value, dict):
            return alpha_from_dict(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"bad alpha specification {value!r}; built-ins: {', '.join(sorted(ALPHA_FAMILIES))}")


def _cfg(eff) -> ProcessConfig:
    try:
        return ProcessConfig(
            float(eff["t0"]), float(eff["t1"]), float(eff["a0"]),
            float(eff["n"]), float(eff["y0"]), int(eff["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer")


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def _emit(doc, out):
    _write_text(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------


def _simulate_one(cfg, alpha, levels, intensity):
    if levels:
        path, _ = build_limit(alpha, replace(cfg, n=levels[-1]), TruncationSchedule(levels),
                              intensity=intensity)
        return path
    ps = sample_half_plane(cfg.t0, cfg.t1, cfg.y0, cfg.n, intensity, cfg.rng_seed)
    return build_truncated(ps, alpha, cfg)


def cmd_simulate(args) -> int:
    eff = _effective(args, ["t0", "t1", "a0", "alpha", "n", "n_levels", "y0", "seed", "intensity"])
    alpha = _alpha(eff["alpha"])
    cfg = _cfg(eff)
    levels = eff["n_levels"]
    if levels:
        try:
            levels = list(TruncationSchedule(levels).levels)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    doc = config_document(cfg, alpha, levels, intensity=float(eff["intensity"]))
    out = Path(args.out)
    if args.replicas and args.replicas > 1:
        out.mkdir(parents=True, exist_ok=True)
        width = len(str(args.replicas - 1))
        summaries = []
        for i in range(args.replicas):
            seed = int(np.random.SeedSequence(cfg.rng_seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])
            path = _simulate_one(replace(cfg, rng_seed=seed), alpha, levels, doc["intensity"])
            path.to_csv(out / f"path_{i:0{width}d}.csv")
            summaries.append(path)
        (out / "config.json").write_text(json.dumps(dict(doc, replicas=args.replicas), indent=2,
                                                    sort_keys=True) + "\n", encoding="utf-8")
        jumps = [p.n_jumps for p in summaries]
        print(f"replicas={args.replicas} mean_jumps={np.mean(jumps):g} out={out}")
        return EXIT_OK
    path = _simulate_one(cfg, alpha, levels, doc["intensity"])
    path.to_csv(out)
    Path(str(out) + ".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"jumps={path.n_jumps} sup={path.sup_norm()!r} final={path.final_value!r}")
    return EXIT_OK


def _report_exit(rep, args, eff_doc):
    doc = rep.to_dict()
    doc["config"] = eff_doc
    _emit(doc, args.out)
    if getattr(args, "raw", None):
        rep.raw_to_csv(args.raw)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_converge(args) -> int:
    eff = _effective(args, ["t0", "t1", "a0", "alpha", "y0", "seed", "intensity", "n_levels"])
    if args.y0 is None and not (args.config and "y0" in load_config(args.config)):
        eff["y0"] = 0.5
    levels = eff["n_levels"] or [4, 8, 16, 32, 64, 128, 256, 1024]
    alpha = _alpha(eff["alpha"])
    try:
        schedule = TruncationSchedule(levels)
        cfg = ProcessConfig(float(eff["t0"]), float(eff["t1"]), float(eff["a0"]), schedule.terminal,
                            float(eff["y0"]), int(eff["seed"]))
        rep = diag.check_convergence_rate(cfg, alpha, schedule, replicas=args.replicas,
                                          threads=_threads(args), intensity=float(eff["intensity"]),
                                          slope_tolerance=args.slope_tolerance)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _report_exit(rep, args, config_document(cfg, alpha, schedule.levels,
                                                   intensity=float(eff["intensity"]),
                                                   replicas=args.replicas))


def cmd_holder(args) -> int:
    eff = _effective(args, ["t0", "t1", "a0", "alpha", "n", "y0", "seed", "intensity"])
    if args.n is None and not (args.config and "n" in load_config(args.config)):
        eff["n"] = 2.0**16
    alpha = _alpha(eff["alpha"])
    cfg = _cfg(eff)
    h_grid = args.h_grid or [2.0**-k for k in range(3, 11)]
    try:
        rep = diag.check_holder(args.t, cfg, alpha, replicas=args.replicas, h_grid=h_grid,
                                threads=_threads(args), intensity=float(eff["intensity"]),
                                statistic=args.statistic, epsilon=args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _report_exit(rep, args, config_document(cfg, alpha, None, intensity=float(eff["intensity"]),
                                                   replicas=args.replicas, t=args.t, h_grid=h_grid))


def cmd_localize(args) -> int:
    eff = _effective(args, ["t0", "t1", "a0", "alpha", "n", "y0", "seed", "intensity"])
    if args.n is None and not (args.config and "n" in load_config(args.config)):
        eff["n"] = 2.0**14
    alpha = _alpha(eff["alpha"])
    cfg = _cfg(eff)
    try:
        rep = diag.check_local_form(args.t, cfg, alpha, replicas=args.replicas, r_grid=args.r_grid,
                                    u_grid=args.u_grid, oracle_count=args.oracle_count,
                                    threads=_threads(args), intensity=float(eff["intensity"]),
                                    window_points=args.window_points, level=args.level)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _report_exit(rep, args, config_document(
        cfg, alpha, None, intensity=float(eff["intensity"]), replicas=args.replicas, t=args.t,
        r_grid=args.r_grid, u_grid=args.u_grid, window_points=args.window_points))


def cmd_bounds(args) -> int:
    kind = args.kind
    alpha = _alpha(args.alpha) if args.alpha else None
    a = args.a if args.a is not None else (alpha.a if alpha else None)
    b = args.b if args.b is not None else (alpha.b if alpha else None)
    M = args.M if args.M is not None else (alpha.M if alpha else None)
    try:
        if kind == "rate":
            if None in (a, b, M, args.y0, args.n):
                raise UsageError("rate bound needs --a --b --M (or --alpha), --y0 and --n")
            rep = bnd.rate_bound(args.t0, args.t1, a, b, M, args.y0, args.n)
        elif kind == "tail-sum":
            if None in (b, args.n):
                raise UsageError("tail-sum needs --b (or --alpha) and --n")
            value = bnd.tail_sum_expectation(args.t0, args.t1, args.intensity, b, args.n)
            rep = bnd.BoundReport("tail_sum_expectation",
                                  {"t0": args.t0, "t1": args.t1, "intensity": args.intensity,
                                   "b": b, "n": args.n}, value, "closed_form")
        elif kind == "norm-constant":
            if args.alpha_value is None:
                raise UsageError("norm-constant needs --alpha-value")
            value = bnd.stable_norm_constant(args.alpha_value)
            rep = bnd.BoundReport(
                "stable_norm_constant", {"alpha": args.alpha_value}, value, "closed_form",
                details={"integral": bnd.stable_integral(args.alpha_value),
                         "integral_quadrature": bnd.stable_integral(args.alpha_value, "quadrature")})
        elif kind in ("cauchy", "limit-tail"):
            if alpha is None or args.points is None or args.n is None:
                raise UsageError(f"{kind} needs --alpha, --points and --n")
            try:
                ps = SignedPointSet.from_csv(args.points)
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_IO
            if kind == "cauchy":
                if args.m is None:
                    raise UsageError("cauchy needs --m")
                rep = bnd.cauchy_bound(ps, alpha, args.n, args.m)
            else:
                rep = bnd.limit_tail_bound(ps, alpha, args.n)
        else:  # pragma: no cover - argparse restricts choices
            raise UsageError(f"unknown kind {kind}")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(rep.to_dict(), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def _common(p, with_n=True):
    p.add_argument("--config", help="JSON config document; flags override its values")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--a0", type=float)
    p.add_argument("--alpha",
                   help=f"index family, e.g. tanh:1.2,0.4 (built-ins: {', '.join(sorted(ALPHA_FAMILIES))})")
    if with_n:
        p.add_argument("--n", type=float, help="truncation level")
    p.add_argument("--y0", type=float, help="lower cutoff on y")
    p.add_argument("--seed", type=int)
    p.add_argument("--intensity", type=float, help="half-plane intensity (default 2)")


def _threads_arg(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or 1); results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a truncated self-stabilizing path to CSV")
    _common(p)
    p.add_argument("--levels", dest="n_levels", type=_floats,
                   help="truncation schedule; the terminal level is written")
    p.add_argument("--replicas", type=int, default=1, help="write an ensemble directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converge", help="convergence-rate experiment (needs y0 > 0)")
    _common(p, with_n=False)
    p.add_argument("--levels", dest="n_levels", type=_floats,
                   help="tested levels followed by the terminal level")
    p.add_argument("--replicas", type=int, default=500)
    p.add_argument("--slope-tolerance", type=float, default=0.2)
    _threads_arg(p)
    p.add_argument("--out")
    p.add_argument("--raw", help="optional CSV of per-replica statistics")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("holder", help="right Hoelder exponent at a frozen prefix")
    _common(p)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--h-grid", type=_floats)
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--statistic", choices=["median", "mean"], default="median")
    p.add_argument("--epsilon", type=float, default=0.3)
    _threads_arg(p)
    p.add_argument("--out")
    p.add_argument("--raw")
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("localize", help="local-form (self-stabilization) experiment")
    _common(p)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--r-grid", type=_floats, default=[1e-2, 1e-3])
    p.add_argument("--u-grid", type=_floats, default=[0.25, 0.5, 1.0])
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--oracle-count", type=int)
    p.add_argument("--window-points", type=float, default=2e4)
    p.add_argument("--level", type=float, default=0.01)
    _threads_arg(p)
    p.add_argument("--out")
    p.add_argument("--raw")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("bounds", help="evaluate a bound")
    p.add_argument("--kind", required=True, choices=["rate", "tail-sum", "norm-constant", "cauchy", "limit-tail"])
    p.add_argument("--alpha", help="index family (supplies a, b, M)")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--y0", type=float)
    p.add_argument("--n", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--intensity", type=float, default=2.0)
    p.add_argument("--alpha-value", type=float)
    p.add_argument("--points", help="point-set CSV (x,y,s) for point-sum bounds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
