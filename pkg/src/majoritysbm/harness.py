"""Monte Carlo experiment runner, table reproduction, scans, and output.

Replicate r of an experiment draws from the Philox stream keyed by the
experiment's master seed at counter block ``r << 128`` (see
:mod:`majoritysbm.rng`), and aggregation sums integers only, so a report
is bit-identical however the replicates are scheduled across workers.
Multi-column tables derive per-column seeds as
``splitmix64(master_seed ^ (column_index + 1))``.
"""

from __future__ import annotations

import json
import math
import sys
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import IO, Iterable, Sequence

from .analytics import ThresholdRegime, threshold_delta
from .dynamics import ModelVariant, OutcomeKind, run_summary
from .graph import BlockParams
from .rng import RngStream, splitmix64

_WILSON_Z = 1.959963984540054  # two-sided 95%

CSV_COLUMNS = [
    "model",
    "n",
    "delta",
    "p",
    "q",
    "L",
    "replicates",
    "master_seed",
    "plus_wins",
    "minus_wins",
    "halts",
    "timeouts",
    "avg_last_day",
    "ci_low",
    "ci_high",
]


class EmitIOError(RuntimeError):
    """Raised when writing a report set fails; carries the destination."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a model configuration plus replication settings."""

    variant: ModelVariant
    n: int
    delta: int
    params: BlockParams
    replicates: int
    max_rounds: int = 100_000
    master_seed: int = 0
    L: float | None = None  # provenance when delta came from the sweep rule

    def __post_init__(self):
        if self.n < 0 or self.n + self.delta < 0 or 2 * self.n + self.delta < 1:
            raise ValueError("need n >= 0, n + delta >= 0 and at least one vertex")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")

    @property
    def plus_start(self) -> int:
        return self.n + self.delta

    @classmethod
    def from_sweep(
        cls,
        variant: ModelVariant,
        n: int,
        L: float,
        params: BlockParams,
        replicates: int,
        max_rounds: int = 100_000,
        master_seed: int = 0,
    ) -> "ExperimentSpec":
        """Spec with delta from the sweep rule ceil(((p-q)/q) n - L sqrt(n ln n))."""
        delta = threshold_delta(
            n, params.p, params.q, ThresholdRegime.EXPERIMENT_GRID, L=L
        )
        return cls(variant, n, delta, params, replicates, max_rounds, master_seed, L)


@dataclass
class ExperimentReport:
    """Aggregated outcome statistics of one experiment."""

    spec: ExperimentSpec
    plus_wins: int
    minus_wins: int
    halts: int
    timeouts: int
    avg_last_day: float | None
    wilson_ci: tuple[float, float]
    day_histograms: dict[str, dict[int, int]]
    plus_to_minus_replicates: int

    @property
    def replicates(self) -> int:
        return self.spec.replicates

    def outcome_counts(self) -> dict[str, int]:
        return {
            "plus_wins": self.plus_wins,
            "minus_wins": self.minus_wins,
            "halts": self.halts,
            "timeouts": self.timeouts,
        }

    def to_row(self) -> dict:
        s = self.spec
        return {
            "model": s.variant.value,
            "n": s.n,
            "delta": s.delta,
            "p": s.params.p,
            "q": s.params.q,
            "L": s.L,
            "replicates": s.replicates,
            "master_seed": s.master_seed,
            "plus_wins": self.plus_wins,
            "minus_wins": self.minus_wins,
            "halts": self.halts,
            "timeouts": self.timeouts,
            "avg_last_day": self.avg_last_day,
            "ci_low": self.wilson_ci[0],
            "ci_high": self.wilson_ci[1],
        }

    def to_json_obj(self) -> dict:
        obj = self.to_row()
        obj["day_histograms"] = {
            kind: dict(sorted(h.items())) for kind, h in self.day_histograms.items()
        }
        obj["plus_to_minus_replicates"] = self.plus_to_minus_replicates
        return obj


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z):
    """Score-based binomial proportion interval."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class _PartialAgg:
    counts: Counter = field(default_factory=Counter)
    last_day_sum: int = 0
    consensus: int = 0
    pm_replicates: int = 0
    histograms: dict = field(default_factory=dict)

    def add(self, kind: OutcomeKind, day: int, had_pm: bool):
        self.counts[kind] += 1
        if kind in (OutcomeKind.PLUS_WINS, OutcomeKind.MINUS_WINS):
            self.last_day_sum += day
            self.consensus += 1
        self.pm_replicates += had_pm
        self.histograms.setdefault(kind.value, Counter())[day] += 1

    def merge(self, other: "_PartialAgg"):
        self.counts += other.counts
        self.last_day_sum += other.last_day_sum
        self.consensus += other.consensus
        self.pm_replicates += other.pm_replicates
        for kind, h in other.histograms.items():
            self.histograms.setdefault(kind, Counter()).update(h)


def _run_range(spec: ExperimentSpec, lo: int, hi: int) -> _PartialAgg:
    agg = _PartialAgg()
    for r in range(lo, hi):
        stream = RngStream.replicate(spec.master_seed, r)
        s = run_summary(
            spec.variant,
            spec.plus_start,
            spec.n,
            spec.params,
            spec.max_rounds,
            stream,
        )
        agg.add(s.outcome.kind, s.outcome.day, s.had_plus_to_minus_flip)
    return agg


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentReport:
    """Run all replicates and aggregate; result independent of ``workers``."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    agg = _PartialAgg()
    if workers == 1 or spec.replicates == 1:
        agg = _run_range(spec, 0, spec.replicates)
    else:
        chunk = max(1, math.ceil(spec.replicates / (workers * 4)))
        ranges = [
            (spec, lo, min(lo + chunk, spec.replicates))
            for lo in range(0, spec.replicates, chunk)
        ]
        with get_context("fork").Pool(workers) as pool:
            for part in pool.starmap(_run_range, ranges):
                agg.merge(part)
    consensus = agg.consensus
    avg = agg.last_day_sum / consensus if consensus else None
    counts = {k: agg.counts.get(k, 0) for k in OutcomeKind}
    dominant = max(counts.values())
    return ExperimentReport(
        spec=spec,
        plus_wins=counts[OutcomeKind.PLUS_WINS],
        minus_wins=counts[OutcomeKind.MINUS_WINS],
        halts=counts[OutcomeKind.HALT],
        timeouts=counts[OutcomeKind.TIMEOUT],
        avg_last_day=avg,
        wilson_ci=wilson_interval(dominant, spec.replicates),
        day_histograms={k: dict(v) for k, v in agg.histograms.items()},
        plus_to_minus_replicates=agg.pm_replicates,
    )


_TABLE_N_GRID = (50, 100, 125, 150, 175, 200, 225, 250)
_L_GRID_FULL_INTRA = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.7, 2.788, 2.8, 3.0, 3.5, 4.0)
_L_GRID_HALF_INTRA = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.582, 2.6, 3.0, 4.0)

TABLE_IDS = ("T1", "T2", "T3", "T4", "T5", "T6")


def _column_seed(master_seed: int, index: int) -> int:
    return splitmix64((master_seed & ((1 << 64) - 1)) ^ (index + 1))


def table_specs(
    table_id: str,
    replicates: int = 1000,
    master_seed: int = 0,
    max_rounds: int = 100_000,
) -> list[ExperimentSpec]:
    """Experiment columns of one of the six benchmark tables.

    T1-T3: full-resample model, p=0.5, q=0.3, n over the standard grid,
    with bias 1, ceil(ln n) and ceil(n/10) respectively.  T4/T5: the
    touched-pair model at p=1, q=0.3, n=500 over the L sweep; T6: the
    same sweep at p=0.5.
    """
    tid = table_id.upper()
    if tid not in TABLE_IDS:
        raise ValueError(f"unknown table id {table_id!r}; expected one of {TABLE_IDS}")
    mk = ModelVariant.MARKOVIAN
    nm = ModelVariant.NON_MARKOVIAN
    specs: list[ExperimentSpec] = []
    if tid in ("T1", "T2", "T3"):
        params = BlockParams(0.5, 0.3)
        for idx, n in enumerate(_TABLE_N_GRID):
            if tid == "T1":
                delta = 1
            elif tid == "T2":
                delta = math.ceil(math.log(n))
            else:
                delta = math.ceil(n / 10)
            specs.append(
                ExperimentSpec(
                    mk, n, delta, params, replicates, max_rounds,
                    _column_seed(master_seed, idx),
                )
            )
        return specs
    if tid in ("T4", "T5"):
        params = BlockParams(1.0, 0.3)
        grid = _L_GRID_FULL_INTRA
    else:
        params = BlockParams(0.5, 0.3)
        grid = _L_GRID_HALF_INTRA
    for idx, L in enumerate(grid):
        specs.append(
            ExperimentSpec.from_sweep(
                nm, 500, L, params, replicates, max_rounds,
                _column_seed(master_seed, idx),
            )
        )
    return specs


def reproduce_table(
    table_id: str,
    replicates: int = 1000,
    master_seed: int = 0,
    max_rounds: int = 100_000,
    workers: int = 1,
) -> list[ExperimentReport]:
    """Run every column of a benchmark table."""
    return [
        run_experiment(spec, workers=workers)
        for spec in table_specs(table_id, replicates, master_seed, max_rounds)
    ]


@dataclass
class ScanResult:
    points: list[tuple[float, int, ExperimentReport]]  # (L, delta, report)
    crossing: tuple[float, float] | None  # L interval where P[plus wins] crosses 1/2

    def reports(self) -> list[ExperimentReport]:
        return [r for _, _, r in self.points]


def scan_phase(
    variant: ModelVariant,
    n: int,
    p: float,
    q: float,
    L_grid: Sequence[float],
    replicates: int,
    max_rounds: int = 100_000,
    master_seed: int = 0,
    workers: int = 1,
) -> ScanResult:
    """One experiment per L of the sweep rule, plus the 1/2-crossing interval."""
    if not L_grid:
        raise ValueError("L grid must be nonempty")
    params = BlockParams(p, q)
    grid = sorted(L_grid)
    points = []
    for idx, L in enumerate(grid):
        spec = ExperimentSpec.from_sweep(
            variant, n, L, params, replicates, max_rounds,
            _column_seed(master_seed, idx),
        )
        points.append((L, spec.delta, run_experiment(spec, workers=workers)))
    crossing = None
    freqs = [rep.plus_wins / rep.replicates for _, _, rep in points]
    for i in range(len(points) - 1):
        lo, hi = freqs[i], freqs[i + 1]
        if (lo - 0.5) * (hi - 0.5) <= 0 and lo != hi:
            crossing = (grid[i], grid[i + 1])
            break
    return ScanResult(points, crossing)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def emit(
    reports: Iterable[ExperimentReport],
    fmt: str = "csv",
    destination: str | IO[str] | None = None,
) -> None:
    """Write a report set as CSV (fixed column order) or JSON.

    ``destination`` may be a path, an open text handle, or None for
    stdout.  I/O failures are raised as :class:`EmitIOError` with the
    destination in the message.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    reports = list(reports)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for rep in reports:
            row = rep.to_row()
            lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
        payload = "\n".join(lines) + "\n"
    else:
        payload = json.dumps([rep.to_json_obj() for rep in reports], indent=2) + "\n"
    if destination is None:
        sys.stdout.write(payload)
        return
    if hasattr(destination, "write"):
        destination.write(payload)
        return
    try:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise EmitIOError(f"cannot write report to {destination!r}: {exc}") from exc
