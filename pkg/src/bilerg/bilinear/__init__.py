"""Planar cutoff operators, frequency splitting, probes and transference."""

from .cutoffs import CutoffSpec, build_cutoffs, bump, bump_cdf, partition_bump, smooth_indicator
from .experiments import (
    DecayReport,
    assemble_decay_report,
    decay_point,
    ProbeResult,
    band_limited_family,
    delta_decay_experiment,
    excluded_band_family,
    local_estimate_probe,
    sparse_band_function,
)
from .operators import (
    BandSplit,
    DyadicDecomposition,
    ShiftDifference,
    apply_B_delta,
    apply_local_operator,
    band_split,
    dyadic_scale_decomposition,
    rescale_parabolic,
    shift_difference_norm,
)
from .oracles import brute_force_B_delta, brute_force_local_operator
from .transference import NormAccounting, TransferenceResult, transfer_norm_accounting, transference_check
