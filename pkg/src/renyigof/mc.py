"""Monte Carlo critical values, p-values, window selection and power studies.

Every replicate draws from its own counter-derived stream, so any result
is a function of ``(seed, reps)`` and the experiment alone: chunking the
replicates across processes cannot change a single bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from collections.abc import Iterable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .censoring import CensoringScheme, generate_uniform_survivals
from .distributions import Distribution, Exponential
from .gof import StatisticKind, statistic_batch

__all__ = [
    "CriticalValueCache",
    "McConfig",
    "PowerCell",
    "PowerRow",
    "PowerTable",
    "QUANTILE_RULE",
    "ReplicateFailure",
    "clear_memo",
    "critical_value",
    "critical_values",
    "null_statistics",
    "p_value",
    "power_study",
    "select_window",
    "simulate_statistics",
    "split_stream",
    "window_critical_values",
]

TAG_NULL = 0
TAG_ALTERNATIVE = 1
TAG_FRESH_NULL = 2

QUANTILE_RULE = "order statistic ceil((1 - level) * reps)"

_CHUNK = 500


class ReplicateFailure(ArithmeticError):
    """Some replicates produced a non-finite statistic."""

    def __init__(self, count: int, reps: int):
        self.count = count
        self.reps = reps
        super().__init__(f"{count} of {reps} replicates gave a non-finite statistic")


@dataclass(frozen=True)
class McConfig:
    """Simulation settings.

    ``workers`` affects wall time only; results depend on ``reps`` and
    ``seed``.
    """

    reps: int = 10000
    seed: int = 20240601
    level: float = 0.10
    workers: int = 1

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be a positive integer, got {self.reps!r}")
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0, 1), got {self.level!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be a positive integer, got {self.workers!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")


def split_stream(seed: int, index: int, tag: int = TAG_NULL) -> np.random.Generator:
    """Independent generator for replicate ``index`` of experiment ``tag``.

    The stream is derived by SeedSequence hashing of ``(seed, tag, index)``,
    so it can be rebuilt anywhere without reference to other replicates.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def _uniform_block(m: int, seed: int, tag: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, m))
    for row, index in enumerate(range(start, stop)):
        out[row] = split_stream(seed, index, tag).random(m)
    # rng.random() can return exactly 0.0
    return np.where(out == 0.0, np.nextafter(0.0, 1.0), out)


def _sample_block(scheme, source: Distribution, seed: int, tag: int, start: int, stop: int):
    survival = generate_uniform_survivals(scheme, _uniform_block(scheme.m, seed, tag, start, stop))
    return np.asarray(source.isf(survival), dtype=float).reshape(survival.shape)


def _chunk_task(args) -> np.ndarray:
    scheme, source, kind, alpha, w, seed, tag, start, stop = args
    x = _sample_block(scheme, source, seed, tag, start, stop)
    with np.errstate(all="ignore"):
        return statistic_batch(x, scheme, kind, w, alpha)


@contextmanager
def _pool(workers: int):
    if workers <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield ex


def simulate_statistics(
    scheme: CensoringScheme,
    source: Distribution,
    kind: StatisticKind | str,
    alpha: float | None,
    w: int,
    reps: int,
    seed: int,
    tag: int,
    executor: Executor | None = None,
) -> np.ndarray:
    """Statistic values for replicates ``0..reps-1`` of ``source`` under ``scheme``.

    Returned in replicate order; chunk boundaries never depend on the
    number of workers.
    """
    kind = StatisticKind.parse(kind)
    if kind is StatisticKind.SHANNON:
        alpha = None
    tasks = [
        (scheme, source, kind, alpha, w, seed, tag, a, min(a + _CHUNK, reps))
        for a in range(0, reps, _CHUNK)
    ]
    if executor is None:
        parts = [_chunk_task(t) for t in tasks]
    else:
        parts = list(executor.map(_chunk_task, tasks))
    return np.concatenate(parts)


def _checked(values: np.ndarray) -> np.ndarray:
    bad = int(np.count_nonzero(~np.isfinite(values)))
    if bad:
        raise ReplicateFailure(bad, values.size)
    return values


_MEMO: dict[tuple, np.ndarray] = {}
_MEMO_SIZE = 32


def null_statistics(
    scheme: CensoringScheme,
    kind: StatisticKind | str,
    alpha: float | None,
    w: int,
    cfg: McConfig,
    executor: Executor | None = None,
) -> np.ndarray:
    """Sorted null statistic values from Exponential(1) samples.

    Memoized per process on ``(scheme, kind, alpha, w, reps, seed)``.
    """
    kind = StatisticKind.parse(kind)
    alpha = None if kind is StatisticKind.SHANNON else float(alpha)
    key = (scheme, kind, alpha, int(w), int(cfg.reps), int(cfg.seed))
    if key in _MEMO:
        return _MEMO[key]
    with _borrow(executor, cfg.workers) as ex:
        values = simulate_statistics(
            scheme, Exponential(), kind, alpha, w, cfg.reps, cfg.seed, TAG_NULL, ex
        )
    out = np.sort(_checked(values))
    out.setflags(write=False)
    if len(_MEMO) >= _MEMO_SIZE:
        _MEMO.pop(next(iter(_MEMO)))
    _MEMO[key] = out
    return out


def clear_memo() -> None:
    """Drop the in-process null-simulation memo (the disk cache is separate)."""
    _MEMO.clear()


@contextmanager
def _borrow(executor: Executor | None, workers: int):
    if executor is not None:
        yield executor
        return
    with _pool(workers) as ex:
        yield ex


def _order_index(level: float, reps: int) -> int:
    # round first so that e.g. 0.9 * 10000 does not become 9001
    return max(1, math.ceil(round((1.0 - level) * reps, 9)))


class CriticalValueCache:
    """One JSON document per critical-value key under ``directory``."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)

    @staticmethod
    def key(scheme, kind, alpha, w, level, reps, seed) -> dict:
        kind = StatisticKind.parse(kind)
        return {
            "scheme": scheme.literal(),
            "kind": kind.value,
            "alpha": None if kind is StatisticKind.SHANNON else float(alpha),
            "w": int(w),
            "level": float(level),
            "reps": int(reps),
            "seed": int(seed),
        }

    def _path(self, key: dict) -> Path:
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
        return self.directory / f"cv-{digest}.json"

    def get(self, key: dict) -> float | None:
        path = self._path(key)
        try:
            doc = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        if any(doc.get(k) != v for k, v in key.items()):
            return None
        return float(doc["value"])

    def put(self, key: dict, value: float) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = dict(key, value=float(value), quantile_rule=QUANTILE_RULE)
        path = self._path(key)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        tmp.replace(path)


def critical_values(
    scheme: CensoringScheme,
    kind: StatisticKind | str,
    alpha: float | None,
    w: int,
    cfg: McConfig,
    levels: Iterable[float],
    cache: CriticalValueCache | None = None,
    executor: Executor | None = None,
) -> dict[float, tuple[float, bool]]:
    """Critical values at several levels from one null simulation.

    Returns ``{level: (value, from_cache)}``.
    """
    out: dict[float, tuple[float, bool]] = {}
    missing = []
    for level in levels:
        McConfig(cfg.reps, cfg.seed, level, cfg.workers)
        key = CriticalValueCache.key(scheme, kind, alpha, w, level, cfg.reps, cfg.seed)
        hit = cache.get(key) if cache is not None else None
        if hit is None:
            missing.append((level, key))
        else:
            out[level] = (hit, True)
    if missing:
        null = null_statistics(scheme, kind, alpha, w, cfg, executor)
        for level, key in missing:
            value = float(null[_order_index(level, cfg.reps) - 1])
            if cache is not None:
                cache.put(key, value)
            out[level] = (value, False)
    return out


def critical_value(
    scheme: CensoringScheme,
    kind: StatisticKind | str,
    alpha: float | None,
    w: int,
    cfg: McConfig,
    cache: CriticalValueCache | None = None,
    executor: Executor | None = None,
) -> float:
    """Upper ``cfg.level`` percentage point of the null statistic.

    The ``ceil((1 - level) * reps)``-th order statistic of ``cfg.reps``
    Exponential(1) replicates; reject when the statistic exceeds it.
    """
    return critical_values(scheme, kind, alpha, w, cfg, [cfg.level], cache, executor)[cfg.level][0]


def p_value(
    observed: float,
    scheme: CensoringScheme,
    kind: StatisticKind | str,
    alpha: float | None,
    w: int,
    cfg: McConfig,
    executor: Executor | None = None,
) -> float:
    """Fraction of null replicates whose statistic exceeds ``observed``."""
    null = null_statistics(scheme, kind, alpha, w, cfg, executor)
    above = null.size - np.searchsorted(null, observed, side="right")
    return float(above / null.size)


def window_critical_values(
    scheme: CensoringScheme,
    alpha: float | None,
    cfg: McConfig,
    w_candidates: Iterable[int] | None = None,
    kind: StatisticKind | str = StatisticKind.RENYI,
    cache: CriticalValueCache | None = None,
    executor: Executor | None = None,
) -> dict[int, float]:
    candidates = sorted(set(range(1, scheme.m) if w_candidates is None else w_candidates))
    if not candidates:
        raise ValueError("select_window needs at least one candidate window")
    bad = [w for w in candidates if not 1 <= w <= scheme.m - 1]
    if bad:
        raise ValueError(f"window candidates must lie in [1, {scheme.m - 1}], got {bad}")
    with _borrow(executor, cfg.workers) as ex:
        return {w: critical_value(scheme, kind, alpha, w, cfg, cache, ex) for w in candidates}


def select_window(
    scheme: CensoringScheme,
    alpha: float | None,
    cfg: McConfig,
    w_candidates: Iterable[int] | None = None,
    kind: StatisticKind | str = StatisticKind.RENYI,
    cache: CriticalValueCache | None = None,
    executor: Executor | None = None,
) -> int:
    """Window with the smallest critical value; ties go to the smaller window.

    Candidates default to ``1..m-1``.
    """
    cvs = window_critical_values(scheme, alpha, cfg, w_candidates, kind, cache, executor)
    best = min(cvs.values())
    return min(w for w, v in cvs.items() if v == best)


@dataclass(frozen=True)
class PowerCell:
    """One power-study cell; ``w=None`` selects the window by critical value."""

    scheme: CensoringScheme
    alternative: Distribution
    kind: StatisticKind
    alpha: float | None = 0.4
    w: int | None = None

    def __post_init__(self):
        kind = StatisticKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is StatisticKind.SHANNON:
            object.__setattr__(self, "alpha", None)


@dataclass(frozen=True)
class PowerRow:
    n: int
    m: int
    scheme: str
    alternative: str
    statistic: str
    alpha: float | None
    w: int | None
    power: float
    se: float
    critical_value: float
    error: str = ""


FIELDS = [
    "n", "m", "scheme", "alternative", "statistic", "alpha", "w",
    "power", "se", "critical_value", "error",
]


@dataclass
class PowerTable:
    reps: int
    seed: int
    level: float
    rows: list[PowerRow] = field(default_factory=list)

    def lookup(self, R: Sequence[int], alternative: str, statistic: str) -> PowerRow:
        label = ",".join(map(str, R))
        for row in self.rows:
            if row.scheme == label and row.alternative == alternative and row.statistic == statistic:
                return row
        raise KeyError((label, alternative, statistic))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            rec = asdict(row)
            for k in ("power", "se", "critical_value"):
                rec[k] = "" if math.isnan(rec[k]) else f"{rec[k]:.6g}"
            rec["alpha"] = "" if rec["alpha"] is None else f"{rec['alpha']:g}"
            rec["w"] = "" if rec["w"] is None else rec["w"]
            writer.writerow(rec)
        return buf.getvalue()


def _run_cell(cell: PowerCell, cfg: McConfig, cache, executor) -> PowerRow:
    scheme = cell.scheme
    base = dict(
        n=scheme.n,
        m=scheme.m,
        scheme=",".join(map(str, scheme.R)),
        alternative=cell.alternative.spec(),
        statistic=cell.kind.value,
        alpha=cell.alpha,
    )
    w = cell.w
    try:
        if w is None:
            w = select_window(scheme, cell.alpha, cfg, None, cell.kind, cache, executor)
        cv = critical_value(scheme, cell.kind, cell.alpha, w, cfg, cache, executor)
        stats = simulate_statistics(
            scheme, cell.alternative, cell.kind, cell.alpha, w,
            cfg.reps, cfg.seed, TAG_ALTERNATIVE, executor,
        )
        # a NaN statistic is a numeric failure; +inf (a zero spacing) rejects
        nan = int(np.count_nonzero(np.isnan(stats)))
        if nan:
            raise ReplicateFailure(nan, stats.size)
    except (ArithmeticError, ValueError) as exc:
        return PowerRow(**base, w=w, power=math.nan, se=math.nan, critical_value=math.nan,
                        error=f"{type(exc).__name__}: {exc}")
    rate = float(np.count_nonzero(stats > cv) / stats.size)
    se = math.sqrt(rate * (1.0 - rate) / stats.size)
    return PowerRow(**base, w=w, power=rate, se=se, critical_value=cv)


def power_study(
    cells: Iterable[PowerCell],
    cfg: McConfig,
    cache: CriticalValueCache | None = None,
) -> PowerTable:
    """Rejection rates of each cell's alternative at the simulated critical value.

    A failing cell is recorded with its error message; the rest of the
    table is still computed.
    """
    table = PowerTable(reps=cfg.reps, seed=cfg.seed, level=cfg.level)
    with _pool(cfg.workers) as ex:
        for cell in cells:
            table.rows.append(_run_cell(cell, cfg, cache, ex))
    return table
