"""Finite-universe laboratory for non-hallucinating generative learning.

Distributions over small explicit universes, hallucination measures and
their exact relative forms, version-space learners driven by constrained
information maximization, adversarial lower-bound constructions, and a
seeded Monte Carlo harness for verifying the possibility and impossibility
regimes empirically.
"""

from .measures import (
    Dist,
    EventSet,
    InfoMeasure,
    Sample,
    Universe,
    agnostic_excess,
    binary_entropy,
    entropy_threshold_root,
    hall,
    hall_eps,
    info,
    kl,
    shannon_entropy,
    smoothness_certificate,
    tv,
)
from .concepts import (
    AnchoredConceptClass,
    Concept,
    ConceptClass,
    InformativenessProfile,
    entropy_split_bound,
    neighborhood,
    packing_construct,
    shatters,
    sufficiency_value,
    vc_dimension,
    version_space,
)
from .solvers import FeasibleRegion, SolverReport, feasible, max_entropy, max_info, max_out_of_sample
from .learners import LearnedModel, LearnerSpec, learn, learn_empirical, learn_fixed, learn_improper, learn_proper
from .adversaries import (
    HardInstance,
    InstanceEnsemble,
    appendix_ensemble,
    example1_instance,
    example4_instance,
    example5_instance,
    fano_bound,
    theorem1_coupled_trial,
    theorem1_ensemble,
    theorem3_ensemble,
)
from .harness import (
    ExperimentConfig,
    LearnerConfig,
    RunResult,
    SummaryRow,
    TrialRecord,
    complexity_curve,
    required_n,
    run_trials,
    sample_from,
    wilson_interval,
)

__version__ = "0.1.0"
