"""Empirical statistics of a multi-view configuration.

Runs the generator for a number of source images and compares what happened
with what the configuration promises: gate firing rates against exact
binomial intervals, the sampled box fractions, the replaced-area fraction
against a Monte-Carlo estimate, and the donor choices.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats as sps

from viewmix.errors import ParameterError
from viewmix.image import Dataset
from viewmix.multiview import InvocationCounter, MultiViewConfig, generate_batch
from viewmix.transforms import KINDS

__all__ = [
    "RateCheck",
    "Histogram",
    "StatsReport",
    "rate_interval",
    "monte_carlo_area_fraction",
    "collect_stats",
    "format_stats",
]


@dataclass(frozen=True)
class RateCheck:
    name: str
    successes: int
    trials: int
    expected: float
    low: int
    high: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def ok(self) -> bool:
        return self.low <= self.successes <= self.high

    def to_dict(self) -> dict:
        return {"name": self.name, "successes": self.successes, "trials": self.trials,
                "rate": self.rate, "expected": self.expected, "low": self.low,
                "high": self.high, "ok": self.ok}


def rate_interval(trials: list[int], probs: list[float], confidence: float = 0.999) -> tuple[int, int]:
    """Central ``confidence`` interval of a sum of independent binomials.

    ``trials[i]`` draws succeed with ``probs[i]``. Equal-probability groups
    reduce to one binomial; otherwise the pmfs are convolved exactly.
    """
    if not 0.0 < confidence < 1.0:
        raise ParameterError(f"confidence must lie in (0, 1), got {confidence}")
    groups: dict[float, int] = {}
    for n, p in zip(trials, probs):
        groups[p] = groups.get(p, 0) + n
    tail = (1.0 - confidence) / 2.0
    if len(groups) == 1:
        (p, n), = groups.items()
        lo, hi = sps.binom.interval(confidence, n, p)
        return int(lo), int(hi)
    pmf = np.ones(1)
    for p, n in groups.items():
        pmf = np.convolve(pmf, sps.binom.pmf(np.arange(n + 1), n, p))
    cdf = np.cumsum(pmf)
    lo = int(np.searchsorted(cdf, tail))
    hi = int(np.searchsorted(cdf, 1.0 - tail))
    return lo, min(hi, len(pmf) - 1)


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    counts: tuple[int, ...]

    @classmethod
    def of(cls, values, low: float, high: float, bins: int = 10) -> Histogram:
        if high <= low:
            # degenerate range: one bin holding everything at that value
            return cls((low, high), (len(values),))
        counts, edges = np.histogram(np.asarray(values, dtype=np.float64), bins=bins, range=(low, high))
        return cls(tuple(float(e) for e in edges), tuple(int(c) for c in counts))

    def to_dict(self) -> dict:
        return {"edges": list(self.edges), "counts": list(self.counts)}


@dataclass
class StatsReport:
    samples: int
    num_views: int
    strategy: str
    rates: list[RateCheck]
    lambdas: Histogram
    areas: Histogram
    lambda_min: Optional[float]
    lambda_max: Optional[float]
    mean_area_fraction: Optional[float]
    oracle_area_fraction: Optional[float]
    donors: dict[str, int] = field(default_factory=dict)
    threads: int = 1

    @property
    def flagged(self) -> list[RateCheck]:
        return [r for r in self.rates if not r.ok]

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "num_views": self.num_views,
            "strategy": self.strategy,
            "threads": self.threads,
            "rates": [r.to_dict() for r in self.rates],
            "lambda_histogram": self.lambdas.to_dict(),
            "area_histogram": self.areas.to_dict(),
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "mean_area_fraction": self.mean_area_fraction,
            "oracle_area_fraction": self.oracle_area_fraction,
            "donors": self.donors,
        }


def _member_counts(start: np.ndarray, size: np.ndarray, extent: int) -> np.ndarray:
    # count pixel indices 0..extent-1 inside [start, start + size); an empty
    # result keeps one edge pixel
    idx = np.arange(extent)[None, :]
    inside = (idx >= start[:, None]) & (idx < (start + size)[:, None])
    return np.maximum(inside.sum(axis=1), 1)


def monte_carlo_area_fraction(width: int, height: int, r_min: float, r_max: float,
                              samples: int = 100_000, seed: int = 0,
                              lambda_mode: str = "linear", chunk: int = 20_000) -> float:
    """Mean replaced fraction of the image, estimated by counting member pixels.

    Uses its own generator (numpy PCG64), not the engine's streams.
    """
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        cx = rng.uniform(0.0, width, m)
        cy = rng.uniform(0.0, height, m)
        lam = rng.uniform(r_min, r_max, m)
        if lambda_mode == "area":
            lam = np.sqrt(lam)
        w = np.maximum(np.floor(lam * width + 0.5), 1).astype(np.int64)
        h = np.maximum(np.floor(lam * height + 0.5), 1).astype(np.int64)
        x0 = np.floor(cx - w / 2 + 0.5).astype(np.int64)
        y0 = np.floor(cy - h / 2 + 0.5).astype(np.int64)
        area = _member_counts(x0, w, width) * _member_counts(y0, h, height)
        total += float(area.sum())
        done += m
    return total / (samples * width * height)


def _batch_sizes(samples: int, batch_size: int) -> list[int]:
    nb = math.ceil(samples / batch_size)
    return [samples // nb + (i < samples % nb) for i in range(nb)]


def collect_stats(dataset: Dataset, cfg: MultiViewConfig, samples: int, seed: int,
                  threads: int = 1, batch_size: int = 128, confidence: float = 0.999,
                  oracle_samples: int = 100_000) -> StatsReport:
    """Generate views for ``samples`` source images and summarize them.

    Images are taken from ``dataset`` in order, cycling when needed; batch
    ``t`` uses step ``t``. Batches never hold an image twice, since a repeated
    (step, index) pair would repeat its random stream and bias the counts.
    """
    if samples < 1:
        raise ParameterError(f"samples must be >= 1, got {samples}")
    batch_size = min(batch_size, len(dataset))
    counter = InvocationCounter()
    n = cfg.num_views
    applied = 0
    lambdas: list[float] = []
    areas: list[float] = []
    donors: Counter = Counter()
    start = 0
    out_size = None
    for step, size in enumerate(_batch_sizes(samples, batch_size)):
        indices = [(start + k) % len(dataset) for k in range(size)]
        start += size
        for b in generate_batch(dataset, indices, cfg, seed, step, threads=threads, counter=counter):
            out_size = b.views[0].width, b.views[0].height
            for p in b.provenance:
                if not p.applied:
                    continue
                applied += 1
                lambdas.append(p.bbox.lam)
                areas.append(p.bbox.area_fraction)
                if p.donor_image is not None:
                    donors["other image" if p.donor_image != b.source_index else "same image"] += 1
                elif p.donor_view is not None:
                    donors[f"view {p.view} <- view {p.donor_view}"] += 1

    counts = counter.counts
    rates = []
    for kind in KINDS:
        probs = [_step_probability(cfg, v, kind) for v in range(n)]
        if all(p is None for p in probs):
            continue
        used = [(samples, p) for p in probs if p is not None]
        lo, hi = rate_interval([u[0] for u in used], [u[1] for u in used], confidence)
        total = sum(u[0] for u in used)
        expected = sum(u[1] for u in used) / len(used)
        rates.append(RateCheck(kind, counts.get(kind, 0), total, expected, lo, hi))
    if cfg.strategy != "baseline":
        p = cfg.strategy_probability
        if cfg.gate_scope == "per_pair":
            trials, hits = samples * (n // 2), applied // 2
        else:
            trials, hits = samples * n, applied
        lo, hi = rate_interval([trials], [p], confidence)
        rates.append(RateCheck(f"strategy:{cfg.strategy}", hits, trials, p, lo, hi))

    lam_lo, lam_hi = cfg.r_min, cfg.r_max
    if cfg.lambda_mode == "area":
        lam_lo, lam_hi = math.sqrt(lam_lo), math.sqrt(lam_hi)
    oracle = None
    if cfg.strategy != "baseline" and out_size is not None:
        oracle = monte_carlo_area_fraction(out_size[0], out_size[1], cfg.r_min, cfg.r_max,
                                           oracle_samples, seed=seed, lambda_mode=cfg.lambda_mode)
    return StatsReport(
        samples=samples,
        num_views=n,
        strategy=cfg.strategy,
        rates=rates,
        lambdas=Histogram.of(lambdas, lam_lo, lam_hi),
        areas=Histogram.of(areas, 0.0, 1.0, bins=20),
        lambda_min=min(lambdas) if lambdas else None,
        lambda_max=max(lambdas) if lambdas else None,
        mean_area_fraction=float(np.mean(areas)) if areas else None,
        oracle_area_fraction=oracle,
        donors=dict(sorted(donors.items())),
        threads=threads,
    )


def _step_probability(cfg: MultiViewConfig, view: int, kind: str) -> Optional[float]:
    for s in cfg.pipeline_for(view).steps:
        if s.kind == kind:
            return s.probability
    return None


def _fmt_hist(h: Histogram, width: int = 40) -> list[str]:
    peak = max(h.counts) if h.counts and max(h.counts) else 1
    lines = []
    for i, c in enumerate(h.counts):
        bar = "#" * round(width * c / peak)
        lines.append(f"  [{h.edges[i]:.3f}, {h.edges[i + 1]:.3f})  {c:>8}  {bar}")
    return lines


def format_stats(report: StatsReport) -> str:
    lines = [
        f"stats: {report.samples} source images x {report.num_views} views, "
        f"strategy={report.strategy}, threads={report.threads}",
        f"{'gate':<22} {'fired':>8} {'trials':>8} {'rate':>8} {'expected':>9} {'99.9% range':>17}  ok",
    ]
    for r in report.rates:
        rng = f"[{r.low}, {r.high}]"
        lines.append(
            f"{r.name:<22} {r.successes:>8} {r.trials:>8} {r.rate:>8.4f} {r.expected:>9.4f} "
            f"{rng:>17}  {'yes' if r.ok else 'FLAG'}"
        )
    if report.lambda_min is not None:
        lines.append(f"lambda: min {report.lambda_min:.4f}, max {report.lambda_max:.4f}")
        lines.extend(_fmt_hist(report.lambdas))
        lines.append(f"replaced area fraction: mean {report.mean_area_fraction:.5f}"
                     + (f", Monte-Carlo estimate {report.oracle_area_fraction:.5f}"
                        if report.oracle_area_fraction is not None else ""))
        lines.extend(_fmt_hist(report.areas))
    if report.donors:
        lines.append("donors:")
        lines.extend(f"  {k}: {v}" for k, v in report.donors.items())
    flagged = report.flagged
    lines.append("all rates inside their intervals" if not flagged
                 else "outside interval: " + ", ".join(r.name for r in flagged))
    return "\n".join(lines) + "\n"
