"""``renyigof`` command line.

Exit codes: 0 success, 2 input error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .censoring import CensoringScheme, ProgressiveSample, parse_scheme, scheme_coefficients
from .distributions import Exponential, parse_distribution
from .entropy import renyi_entropy_estimate, shannon_entropy_estimate
from .gof import StatisticKind, renyi_test_statistic, shannon_test_statistic
from .mc import (
    QUANTILE_RULE,
    CriticalValueCache,
    McConfig,
    PowerCell,
    critical_values,
    p_value,
    power_study,
    select_window,
)
from .tables import ALTERNATIVES, TABLES

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

CACHE_ENV = "RENYIGOF_CACHE_DIR"


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# input parsing


def read_observations(path: str | os.PathLike) -> tuple[list[float], bytes]:
    """Read a one-column CSV (optional header ``x``); returns values and raw bytes."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read data file {str(path)!r}: {exc.strerror}") from exc
    values: list[float] = []
    last = None
    for lineno, line in enumerate(raw.decode("utf-8-sig").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if not values and text.lower() == "x":
            continue
        try:
            value = float(text)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None
        if not value > 0 or value == float("inf"):
            raise InputError(f"{path}:{lineno}: observations must be positive and finite, got {text}")
        if last is not None and value <= last:
            raise InputError(
                f"{path}:{lineno}: observations must be strictly increasing ({text} after {last:g})"
            )
        values.append(value)
        last = value
    if not values:
        raise InputError(f"{path}: no observations found")
    return values, raw


def resolve_scheme(literal: str | None, data_path: str | None = None) -> CensoringScheme:
    """Scheme from ``--scheme`` or from the ``.scheme`` sidecar next to the data."""
    source = "--scheme"
    if literal is None:
        if data_path is None:
            raise InputError("a scheme is required: pass --scheme 'n=.. m=.. R=..'")
        sidecar = Path(data_path).with_suffix(".scheme")
        if not sidecar.exists():
            raise InputError(f"no --scheme given and no sidecar file {str(sidecar)!r}")
        literal = sidecar.read_text().strip()
        source = str(sidecar)
    try:
        return parse_scheme(literal)
    except ValueError as exc:
        raise InputError(f"invalid scheme ({source}): {exc}") from None


def _parse_levels(text: str) -> list[float]:
    try:
        levels = sorted({float(v) for v in text.split(",") if v.strip()})
    except ValueError:
        raise InputError(f"bad --levels {text!r}") from None
    if not levels or any(not 0 < v < 1 for v in levels):
        raise InputError(f"levels must lie in (0, 1), got {text!r}")
    return levels


def _parse_window(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        w = int(text)
    except ValueError:
        raise InputError(f"--w must be a positive integer or 'auto', got {text!r}") from None
    if w < 1:
        raise InputError(f"--w must be >= 1, got {w}")
    return w


def _kinds(stat: str) -> list[StatisticKind]:
    return [StatisticKind.RENYI, StatisticKind.SHANNON] if stat == "both" else [StatisticKind.parse(stat)]


def _config(args, level: float | None = None) -> McConfig:
    try:
        return McConfig(
            reps=args.reps,
            seed=args.seed,
            level=args.level if level is None else level,
            workers=args.workers,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _cache(args) -> CriticalValueCache | None:
    if args.no_cache:
        return None
    directory = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "renyigof"
    return CriticalValueCache(directory)


def _level_key(level: float) -> str:
    return f"{level:g}"


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _resolve_window(scheme, kind, alpha, w, cfg, cache) -> tuple[int, bool]:
    if w is not None:
        if not 1 <= w <= scheme.m - 1:
            raise InputError(f"--w must lie in [1, {scheme.m - 1}] for m = {scheme.m}, got {w}")
        return w, False
    return select_window(scheme, alpha, cfg, None, kind, cache), True


# ---------------------------------------------------------------------------
# subcommands


def cmd_test(args) -> int:
    values, raw = read_observations(args.data)
    scheme = resolve_scheme(args.scheme, args.data)
    if len(values) != scheme.m:
        raise InputError(f"{args.data}: found {len(values)} observations but scheme has m = {scheme.m}")
    sample = ProgressiveSample(scheme, values)
    levels = sorted(set(_parse_levels(args.levels)) | {args.level})
    cfg = _config(args)
    cache = _cache(args)
    w_req = _parse_window(args.w)

    blocks = []
    for kind in _kinds(args.stat):
        alpha = args.alpha if kind is StatisticKind.RENYI else None
        w, auto = _resolve_window(scheme, kind, alpha, w_req, cfg, cache)
        if kind is StatisticKind.RENYI:
            stat = renyi_test_statistic(sample, alpha, w)
        else:
            stat = shannon_test_statistic(sample, w)
        cvs = critical_values(scheme, kind, alpha, w, cfg, levels, cache)
        pv = p_value(stat.value, scheme, kind, alpha, w, cfg)
        blocks.append(
            {
                "kind": kind.value,
                "value": stat.value,
                "alpha": alpha,
                "w": w,
                "w_auto": auto,
                "theta_hat": stat.theta_hat,
                "critical_values": {_level_key(lv): cvs[lv][0] for lv in levels},
                "reject": {_level_key(lv): bool(stat.value > cvs[lv][0]) for lv in levels},
                "p_value": pv,
            }
        )

    report = {
        "tool": "renyigof",
        "version": __version__,
        "data": {
            "path": str(args.data),
            "sha256": hashlib.sha256(raw).hexdigest(),
            "m": len(values),
        },
        "scheme": scheme.literal(),
        "n": scheme.n,
        "m": scheme.m,
        "R": list(scheme.R),
        "reps": cfg.reps,
        "seed": cfg.seed,
        "level": cfg.level,
        "levels": levels,
        "quantile_rule": QUANTILE_RULE,
        "statistics": blocks,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    sys.stdout.write(_dump(report))
    for b in blocks:
        name = "T^alpha" if b["kind"] == "renyi" else "T"
        extra = f", alpha={b['alpha']:g}" if b["alpha"] is not None else ""
        decision = "reject" if b["reject"][_level_key(cfg.level)] else "do not reject"
        print(
            f"{name}(w={b['w']}{' auto' if b['w_auto'] else ''}{extra}) = {b['value']:.4f}; "
            f"theta_hat = {b['theta_hat']:.4f}; p-value = {b['p_value']:.4f} "
            f"({cfg.reps} reps, seed {cfg.seed}); {decision} exponentiality at "
            f"{100 * cfg.level:g}%",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_critvals(args) -> int:
    scheme = resolve_scheme(args.scheme)
    levels = _parse_levels(args.levels)
    cfg = _config(args, level=levels[0])
    cache = _cache(args)
    w_req = _parse_window(args.w)
    tables = []
    hits = total = 0
    for kind in _kinds(args.stat):
        alpha = args.alpha if kind is StatisticKind.RENYI else None
        w, auto = _resolve_window(scheme, kind, alpha, w_req, cfg, cache)
        cvs = critical_values(scheme, kind, alpha, w, cfg, levels, cache)
        hits += sum(cached for _, cached in cvs.values())
        total += len(cvs)
        tables.append(
            {
                "kind": kind.value,
                "alpha": alpha,
                "w": w,
                "w_auto": auto,
                "critical_values": [{"level": lv, "value": cvs[lv][0]} for lv in levels],
            }
        )
    doc = {
        "scheme": scheme.literal(),
        "reps": cfg.reps,
        "seed": cfg.seed,
        "quantile_rule": QUANTILE_RULE,
        "tables": tables,
    }
    sys.stdout.write(_dump(doc))
    where = "disabled" if cache is None else str(cache.directory)
    print(f"critical values: {hits}/{total} from cache ({where})", file=sys.stderr)
    return EXIT_OK


def _power_cells(args) -> list[PowerCell]:
    w = _parse_window(args.w)
    kinds = _kinds(args.stat)
    if args.table is not None:
        if args.scheme or args.alternative:
            raise InputError("--table cannot be combined with --scheme/--alternative")
        schemes = list(TABLES[args.table].schemes)
        alternatives = list(ALTERNATIVES)
    else:
        if not args.scheme or not args.alternative:
            raise InputError("power needs --table N or both --scheme and --alternative")
        schemes = [resolve_scheme(s) for s in args.scheme]
        try:
            alternatives = [parse_distribution(a) for a in args.alternative]
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if args.include_null:
        alternatives.append(Exponential())
    cells = []
    for scheme in schemes:
        if w is not None and not 1 <= w <= scheme.m - 1:
            raise InputError(f"--w must lie in [1, {scheme.m - 1}] for {scheme}, got {w}")
        for alt in alternatives:
            for kind in kinds:
                cells.append(PowerCell(scheme, alt, kind, args.alpha, w))
    return cells


def cmd_power(args) -> int:
    cells = _power_cells(args)
    cfg = _config(args)
    table = power_study(cells, cfg, _cache(args))
    text = table.to_csv()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    failed = sum(1 for r in table.rows if r.error)
    print(f"{len(table.rows)} cells, {failed} failed; reps={cfg.reps} seed={cfg.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_coeffs(args) -> int:
    scheme = resolve_scheme(args.scheme)
    coeffs = scheme_coefficients(scheme).to_dict()
    doc = {"scheme": scheme.literal()}
    doc.update({k: coeffs[k] for k in ("gamma", "log_c", "p", "a")})
    sys.stdout.write(_dump(doc))
    return EXIT_OK


def cmd_entropy(args) -> int:
    values, _ = read_observations(args.data)
    scheme = resolve_scheme(args.scheme, args.data)
    if len(values) != scheme.m:
        raise InputError(f"{args.data}: found {len(values)} observations but scheme has m = {scheme.m}")
    w = _parse_window(args.w) or 1
    sample = ProgressiveSample(scheme, values)
    est = renyi_entropy_estimate(sample, args.alpha, w)
    doc = {
        "scheme": scheme.literal(),
        "renyi": est.to_dict(),
        "shannon": {"value": shannon_entropy_estimate(sample, w), "w": w},
    }
    sys.stdout.write(_dump(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser


def _add_mc(p: argparse.ArgumentParser, seed_required: bool = False) -> None:
    p.add_argument("--reps", type=int, default=10000, help="Monte Carlo replicates (default 10000)")
    if seed_required:
        p.add_argument("--seed", type=int, required=True, help="random seed (required)")
    else:
        p.add_argument("--seed", type=int, default=McConfig.seed, help="random seed")
    p.add_argument("--level", type=float, default=0.10, help="significance level (default 0.10)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--no-cache", action="store_true", help="do not read or write the critical-value cache")


def _add_stat(p: argparse.ArgumentParser, w_default: str = "3") -> None:
    p.add_argument("--alpha", type=float, default=0.4, help="Renyi order (default 0.4)")
    p.add_argument("--w", default=w_default, help="window size or 'auto'")
    p.add_argument("--stat", choices=["renyi", "shannon", "both"], default="renyi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renyigof",
        description="Renyi-KL goodness-of-fit test for exponentiality under progressive Type-II censoring.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a data file for exponentiality")
    p.add_argument("data", help="CSV file, one observation per line, optional header 'x'")
    p.add_argument("--scheme", help="scheme literal; default: sidecar DATA.scheme")
    _add_stat(p)
    p.add_argument("--levels", default="0.01,0.05,0.10", help="levels to report critical values at")
    _add_mc(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("critvals", help="tabulate critical values")
    p.add_argument("--scheme", required=True)
    _add_stat(p)
    p.add_argument("--levels", default="0.01,0.05,0.10")
    _add_mc(p)
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("power", help="power study; CSV to stdout")
    p.add_argument("--table", type=int, choices=sorted(TABLES), help="reproduce a whole power table")
    p.add_argument("--scheme", action="append", help="scheme literal (repeatable)")
    p.add_argument("--alternative", action="append", help="e.g. weibull:2 (repeatable)")
    p.add_argument("--include-null", action="store_true", help="add an exp:1 size-check row")
    p.add_argument("--output", help="write CSV here instead of stdout")
    _add_stat(p, w_default="auto")
    _add_mc(p, seed_required=True)
    p.set_defaults(func=cmd_power, stat="both")

    p = sub.add_parser("coeffs", help="dump scheme coefficients as JSON")
    p.add_argument("--scheme", required=True)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("entropy", help="entropy estimates with per-term breakdown")
    p.add_argument("data")
    p.add_argument("--scheme")
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--w", default="3")
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"renyigof: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"renyigof: numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"renyigof: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
