"""Tools for studying what privacy architectures can distinguish.

The package builds parity-tilted distribution families over the sign
hypercube, measures how far any bounded test function can separate a family
from its mixture, runs mechanisms in the local, shuffle, and online
(state-observed) trust models with exact distribution propagation and privacy
audits, and wires the reductions that transfer hardness between those models.
A deterministic experiment harness and a CLI sit on top.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import CheckFailedError, GuardError, InsufficientCohortError
from .rng import as_generator, derive_seed, gaussian, laplace, make_generator
from .distributions import (
    FiniteDistribution,
    MixtureSpec,
    ParametricHardDistribution,
    ParityIndex,
    binom_sum,
    densify,
    family_enumerate,
    family_size,
    fourier_coefficient,
    fourier_spectrum,
    from_descriptor,
    member_descriptor,
    pmf_eval,
    sample,
    two_point_mixture,
    uniform_hypercube,
)
from .metrics import (
    JointDistribution,
    NormReport,
    fact_markov_check,
    fact_tv_chain_check,
    hockey_stick,
    infty_to_2_norm_bruteforce,
    kl_divergence,
    mutual_information,
    parity_family_norm_bound_sq,
    pinsker_check,
    tv_distance,
)
from .mechanisms import (
    Analyzer,
    PanPrivateAlgorithm,
    PrivacyBudget,
    Randomizer,
    ShuffleProtocol,
    binary_randomized_response,
    quantization_slack,
    quantized_laplace_counter,
    run_pan,
    run_shuffle,
)
from .exact import (
    AuditCurve,
    HybridReport,
    audit_privacy,
    exact_output_distribution,
    hybrid_tv_certificate,
)
from .reductions import (
    LearnerDistinguisher,
    PlantedLearner,
    PlugInParityLearner,
    ShuffleToPanWrapper,
    ThresholdReport,
    selection_augment,
    shuffle_to_pan,
    threshold_distinguisher,
    wrapper_escape_mass,
)
from .baselines import (
    CalibratedRR,
    ProblemInstance,
    calibrate_rr,
    empirical_means,
    find_selection_threshold,
    pan_mean_vector,
    plug_in_solve,
    random_instance,
    selection_success_fast,
    shuffle_mean_vector,
    solve,
)
from .harness import ExperimentSpec, RunResult, fit_scaling, run_spec

__all__ = [
    "__version__",
    "CheckFailedError",
    "GuardError",
    "InsufficientCohortError",
    "as_generator",
    "derive_seed",
    "gaussian",
    "laplace",
    "make_generator",
    "FiniteDistribution",
    "MixtureSpec",
    "ParametricHardDistribution",
    "ParityIndex",
    "binom_sum",
    "densify",
    "family_enumerate",
    "family_size",
    "fourier_coefficient",
    "fourier_spectrum",
    "from_descriptor",
    "member_descriptor",
    "pmf_eval",
    "sample",
    "two_point_mixture",
    "uniform_hypercube",
    "JointDistribution",
    "NormReport",
    "fact_markov_check",
    "fact_tv_chain_check",
    "hockey_stick",
    "infty_to_2_norm_bruteforce",
    "kl_divergence",
    "mutual_information",
    "parity_family_norm_bound_sq",
    "pinsker_check",
    "tv_distance",
    "Analyzer",
    "PanPrivateAlgorithm",
    "PrivacyBudget",
    "Randomizer",
    "ShuffleProtocol",
    "binary_randomized_response",
    "quantization_slack",
    "quantized_laplace_counter",
    "run_pan",
    "run_shuffle",
    "AuditCurve",
    "HybridReport",
    "audit_privacy",
    "exact_output_distribution",
    "hybrid_tv_certificate",
    "LearnerDistinguisher",
    "PlantedLearner",
    "PlugInParityLearner",
    "ShuffleToPanWrapper",
    "ThresholdReport",
    "selection_augment",
    "shuffle_to_pan",
    "threshold_distinguisher",
    "wrapper_escape_mass",
    "CalibratedRR",
    "ProblemInstance",
    "calibrate_rr",
    "empirical_means",
    "find_selection_threshold",
    "pan_mean_vector",
    "plug_in_solve",
    "random_instance",
    "selection_success_fast",
    "shuffle_mean_vector",
    "solve",
    "ExperimentSpec",
    "RunResult",
    "fit_scaling",
    "run_spec",
]
