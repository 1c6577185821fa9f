"""Majority dynamics on dynamic two-block random graphs.

Simulator for the full-resample and touched-pair graph evolution rules,
exact small-scale oracles, binomial tail analytics, and a reproducible
Monte Carlo experiment harness.
"""

from .analytics import (
    ModelConstants,
    ThresholdRegime,
    binom_cdf,
    binom_log_pmf,
    constants,
    delta_prime,
    flip_prob_minus_to_plus,
    flip_prob_plus_to_minus,
    gamblers_ruin,
    hoeffding_upper,
    interval_prob,
    kl_divergence,
    threshold_delta,
)
from .dynamics import (
    ModelVariant,
    Outcome,
    OutcomeKind,
    Trajectory,
    classify_state,
    majority_step,
    run_dynamics,
    run_summary,
)
from .graph import (
    BlockParams,
    GraphState,
    OpinionVector,
    neighbor_tally,
    resample_full,
    resample_touched,
    sample_sbm,
)
from .harness import (
    ExperimentReport,
    ExperimentSpec,
    ScanResult,
    emit,
    reproduce_table,
    run_experiment,
    scan_phase,
    table_specs,
    wilson_interval,
)
from .oracle import (
    AbsorptionResult,
    TransitionKernel,
    build_kernel,
    enumerate_day_kernel_row,
    exact_absorption,
    exact_halt_day1,
    mc_agreement,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AbsorptionResult",
    "BlockParams",
    "ExperimentReport",
    "ExperimentSpec",
    "GraphState",
    "ModelConstants",
    "ModelVariant",
    "OpinionVector",
    "Outcome",
    "OutcomeKind",
    "RngStream",
    "ScanResult",
    "ThresholdRegime",
    "Trajectory",
    "TransitionKernel",
    "binom_cdf",
    "binom_log_pmf",
    "build_kernel",
    "classify_state",
    "constants",
    "delta_prime",
    "emit",
    "enumerate_day_kernel_row",
    "exact_absorption",
    "exact_halt_day1",
    "flip_prob_minus_to_plus",
    "flip_prob_plus_to_minus",
    "gamblers_ruin",
    "hoeffding_upper",
    "interval_prob",
    "kl_divergence",
    "majority_step",
    "mc_agreement",
    "neighbor_tally",
    "reproduce_table",
    "resample_full",
    "resample_touched",
    "run_dynamics",
    "run_experiment",
    "run_summary",
    "sample_sbm",
    "scan_phase",
    "table_specs",
    "threshold_delta",
    "wilson_interval",
]
