"""Mixing-time machinery for top to bottom-k card shuffles.

Four pillars: exact dense evolution and spectra at small n
(:mod:`shufflemix.exact`), Monte Carlo couplings and collector statistics at
moderate n (:mod:`shufflemix.coupling`), a complex near-eigenfunction lower
bound for the k = 3 walk (:mod:`shufflemix.wilson`), and Cayley-graph flow
comparison bounds (:mod:`shufflemix.flows`).  :mod:`shufflemix.cli` wraps
each experiment in a manifest-writing command.
"""

__version__ = "0.1.0"

from .coupling import (
    coupling_trials,
    coupon_collector,
    increasing_bottom_statistic,
    lazy_trial_wrapper,
    single_card_lower_bound,
    tail_estimate,
    trial_rng,
)
from .errors import CapacityError, NumericError, UnreachableTargetError
from .exact import (
    beta_min_bound_check,
    distance_profile,
    least_eigenvalue_formula,
    mixing_time,
    spectrum,
    transfer_checks,
)
from .flows import (
    build_flow_general,
    build_flow_large_k,
    build_flow_rudvalis,
    build_odd_flow_tbk,
    comparison_bound_report,
    congestion_A,
    congestion_lower_bound,
    dirichlet_form,
    odd_flow_eigenvalue_bound,
    verify_flow,
)
from .measures import (
    SparseMeasure,
    convolve_measures,
    delta_e,
    lazy,
    random_transposition,
    reversal,
    rudvalis_symmetric,
    symmetrize,
    top_to_bottom_k,
)
from .perms import Permutation, compose, cycle_generator, identity, inverse, rank, transposition, unrank
from .report import FixtureStore, RunManifest, emit_csv, emit_json
from .wilson import compute_params, lazy_transfer, step_bound, wilson_report

__all__ = [
    "CapacityError",
    "NumericError",
    "UnreachableTargetError",
    "SparseMeasure",
    "convolve_measures",
    "delta_e",
    "lazy",
    "random_transposition",
    "reversal",
    "rudvalis_symmetric",
    "symmetrize",
    "top_to_bottom_k",
    "Permutation",
    "compose",
    "cycle_generator",
    "identity",
    "inverse",
    "rank",
    "transposition",
    "unrank",
    "beta_min_bound_check",
    "distance_profile",
    "least_eigenvalue_formula",
    "mixing_time",
    "spectrum",
    "transfer_checks",
    "coupling_trials",
    "coupon_collector",
    "increasing_bottom_statistic",
    "lazy_trial_wrapper",
    "single_card_lower_bound",
    "tail_estimate",
    "trial_rng",
    "compute_params",
    "lazy_transfer",
    "step_bound",
    "wilson_report",
    "build_flow_general",
    "build_flow_large_k",
    "build_flow_rudvalis",
    "build_odd_flow_tbk",
    "comparison_bound_report",
    "congestion_A",
    "congestion_lower_bound",
    "dirichlet_form",
    "odd_flow_eigenvalue_bound",
    "verify_flow",
    "FixtureStore",
    "RunManifest",
    "emit_csv",
    "emit_json",
    "__version__",
]
