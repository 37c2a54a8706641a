"""Transformation-overhead benchmark.

Times view generation only (no model work) for each strategy over the same
batch sequence, seeds and base pipeline. The dataset is fully in memory
before any timer starts. Each repeat runs all strategies back to back so slow
drift on the machine hits every strategy alike.

Delimited report format (CSV, one header line, one row per strategy)::

    strategy,resolution,batch_size,steps,repeats,threads,backend,
    total_seconds,total_seconds_std,seconds_per_step_mean,seconds_per_step_std,
    images_per_second,relative_overhead,base_view_digest,invocation_counts

``relative_overhead`` is empty when no baseline row was run.
``invocation_counts`` is ``kind=count`` pairs joined by ``;``.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from viewmix import kernels
from viewmix.errors import ParameterError
from viewmix.image import Dataset
from viewmix.multiview import STRATEGIES, InvocationCounter, MultiViewConfig, generate_batch
from viewmix.transforms import default_pipeline

__all__ = [
    "DEFAULT_STEPS",
    "BenchConfig",
    "StrategyResult",
    "BenchReport",
    "run_benchmark",
    "emit_report",
    "parse_delimited",
    "COLUMNS",
]

# reference protocol: batch 128, 1000 steps at 32x32, 200 steps at 224x224
DEFAULT_STEPS = {32: 1000, 224: 200}

COLUMNS = (
    "strategy",
    "resolution",
    "batch_size",
    "steps",
    "repeats",
    "threads",
    "backend",
    "total_seconds",
    "total_seconds_std",
    "seconds_per_step_mean",
    "seconds_per_step_std",
    "images_per_second",
    "relative_overhead",
    "base_view_digest",
    "invocation_counts",
)


@dataclass(frozen=True)
class BenchConfig:
    resolution: int = 32
    batch_size: int = 128
    steps: Optional[int] = None
    strategies: tuple[str, ...] = STRATEGIES
    warmup_steps: int = 1
    repeats: int = 3
    threads: int = 1

    def __post_init__(self):
        steps = self.steps
        if steps is None:
            steps = DEFAULT_STEPS.get(self.resolution)
            if steps is None:
                raise ParameterError(f"no default step count for resolution {self.resolution}; set steps")
        object.__setattr__(self, "steps", int(steps))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.steps < 1:
            raise ParameterError(f"steps must be >= 1, got {self.steps}")
        if self.repeats < 1:
            raise ParameterError(f"repeats must be >= 1, got {self.repeats}")
        if self.batch_size < 1 or self.resolution < 1 or self.threads < 1 or self.warmup_steps < 0:
            raise ParameterError("batch_size, resolution and threads must be >= 1, warmup_steps >= 0")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ParameterError(f"unknown strategy {s!r}; expected a subset of {STRATEGIES}")


@dataclass
class StrategyResult:
    strategy: str
    repeat_totals: list[float]
    steps: int
    batch_size: int
    num_views: int
    invocation_counts: dict[str, int] = field(default_factory=dict)
    relative_overhead: Optional[float] = None
    base_view_digest: str = ""

    @property
    def total_seconds(self) -> float:
        return statistics.fmean(self.repeat_totals)

    @property
    def total_seconds_std(self) -> float:
        return statistics.stdev(self.repeat_totals) if len(self.repeat_totals) > 1 else 0.0

    @property
    def seconds_per_step_mean(self) -> float:
        return self.total_seconds / self.steps

    @property
    def seconds_per_step_std(self) -> float:
        return self.total_seconds_std / self.steps

    @property
    def images_per_second(self) -> float:
        return self.steps * self.batch_size / self.total_seconds if self.total_seconds > 0 else float("inf")


@dataclass
class BenchReport:
    config: BenchConfig
    backend: str
    results: list[StrategyResult]

    def result(self, strategy: str) -> StrategyResult:
        for r in self.results:
            if r.strategy == strategy:
                return r
        raise KeyError(strategy)


def _batch_indices(step: int, batch_size: int, n_blocks: int) -> range:
    block = step % n_blocks
    return range(block * batch_size, (block + 1) * batch_size)


def _digest(batches) -> str:
    h = hashlib.sha256()
    for b in batches:
        for v in b.base_views:
            h.update(v.data.tobytes())
    return h.hexdigest()[:16]


def run_benchmark(cfg: BenchConfig, dataset: Dataset, seed: int,
                  multiview: Optional[MultiViewConfig] = None, progress=None) -> BenchReport:
    """Time ``cfg.steps`` batches of view generation per strategy and repeat.

    ``multiview`` provides the shared base pipeline and strategy parameters;
    its ``strategy`` field is replaced per row. Invocation counts come from
    the first repeat. ``progress`` is an optional ``callable(str)``.
    """
    if len(dataset) < cfg.batch_size:
        raise ParameterError(
            f"dataset has {len(dataset)} images, fewer than batch_size={cfg.batch_size}"
        )
    if multiview is None:
        multiview = MultiViewConfig(base_pipeline=default_pipeline(cfg.resolution))
    n_blocks = len(dataset) // cfg.batch_size
    configs = {s: multiview.with_strategy(s) for s in cfg.strategies}
    totals = {s: [] for s in cfg.strategies}
    counts: dict[str, dict[str, int]] = {}

    for s in cfg.strategies:
        for w in range(cfg.warmup_steps):
            generate_batch(dataset, _batch_indices(w, cfg.batch_size, n_blocks), configs[s],
                           seed, -1 - w, threads=cfg.threads)

    for r in range(cfg.repeats):
        for s in cfg.strategies:
            counter = InvocationCounter() if r == 0 else None
            mv = configs[s]
            start = time.perf_counter()
            for t in range(cfg.steps):
                generate_batch(dataset, _batch_indices(t, cfg.batch_size, n_blocks), mv,
                               seed, t, threads=cfg.threads, counter=counter)
            elapsed = time.perf_counter() - start
            totals[s].append(elapsed)
            if counter is not None:
                counts[s] = counter.counts
            if progress is not None:
                progress(f"repeat {r + 1}/{cfg.repeats} {s}: {elapsed:.3f} s")

    results = []
    for s in cfg.strategies:
        # untimed check: first batch's base views must not depend on the strategy
        first = generate_batch(dataset, _batch_indices(0, cfg.batch_size, n_blocks), configs[s],
                               seed, 0, threads=cfg.threads)
        results.append(StrategyResult(s, totals[s], cfg.steps, cfg.batch_size, multiview.num_views,
                                      dict(sorted(counts[s].items())), None, _digest(first)))
    if "baseline" in cfg.strategies:
        base_total = next(r for r in results if r.strategy == "baseline").total_seconds
        for res in results:
            res.relative_overhead = res.total_seconds / base_total - 1.0
    return BenchReport(cfg, kernels.BACKEND, results)


def _fmt_counts(counts: dict[str, int]) -> str:
    return ";".join(f"{k}={v}" for k, v in counts.items())


def _row(report: BenchReport, r: StrategyResult) -> dict:
    c = report.config
    return {
        "strategy": r.strategy,
        "resolution": c.resolution,
        "batch_size": c.batch_size,
        "steps": c.steps,
        "repeats": c.repeats,
        "threads": c.threads,
        "backend": report.backend,
        "total_seconds": f"{r.total_seconds:.6f}",
        "total_seconds_std": f"{r.total_seconds_std:.6f}",
        "seconds_per_step_mean": f"{r.seconds_per_step_mean:.9f}",
        "seconds_per_step_std": f"{r.seconds_per_step_std:.9f}",
        "images_per_second": f"{r.images_per_second:.3f}",
        "relative_overhead": "" if r.relative_overhead is None else f"{r.relative_overhead:.6f}",
        "base_view_digest": r.base_view_digest,
        "invocation_counts": _fmt_counts(r.invocation_counts),
    }


def emit_report(report: BenchReport, fmt: str = "human") -> str:
    if fmt == "delimited":
        buf = _io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in report.results:
            writer.writerow(_row(report, r))
        return buf.getvalue()
    if fmt != "human":
        raise ParameterError(f"report format must be 'human' or 'delimited', got {fmt!r}")
    c = report.config
    lines = [
        f"transformation benchmark: {c.resolution}x{c.resolution}, batch {c.batch_size}, "
        f"{c.steps} steps, {c.repeats} repeat(s), {c.threads} thread(s), backend={report.backend}",
        f"{'strategy':<10} {'total s':>10} {'± std':>8} {'s/step':>10} {'img/s':>10} {'overhead':>9}",
    ]
    for r in report.results:
        overhead = "" if r.relative_overhead is None else f"{100 * r.relative_overhead:+.1f}%"
        lines.append(
            f"{r.strategy:<10} {r.total_seconds:>10.3f} {r.total_seconds_std:>8.3f} "
            f"{r.seconds_per_step_mean:>10.5f} {r.images_per_second:>10.1f} {overhead:>9}"
        )
    for r in report.results:
        lines.append(f"  {r.strategy} invocations: {_fmt_counts(r.invocation_counts)}")
    return "\n".join(lines) + "\n"


_INT_COLS = {"resolution", "batch_size", "steps", "repeats", "threads"}
_FLOAT_COLS = {"total_seconds", "total_seconds_std", "seconds_per_step_mean",
               "seconds_per_step_std", "images_per_second", "relative_overhead"}


def parse_delimited(text: str) -> list[dict]:
    """Parse :func:`emit_report` delimited output back into typed rows."""
    rows = []
    for raw in csv.DictReader(_io.StringIO(text)):
        row: dict = {}
        for key, value in raw.items():
            if key in _INT_COLS:
                row[key] = int(value)
            elif key in _FLOAT_COLS:
                row[key] = None if value == "" else float(value)
            elif key == "invocation_counts":
                row[key] = {k: int(v) for k, v in (p.split("=") for p in value.split(";") if p)}
            else:
                row[key] = value
        rows.append(row)
    return rows
