"""Learning rules mapping samples to distributions.

Four kinds are implemented:

* ``empirical``          -- relative frequencies of the sample,
* ``improper_max_info``  -- maximize an information functional subject to
                            not violating any concept consistent with the
                            sample (output unconstrained in the simplex),
* ``proper_max_info``    -- the same, but the output must be one of a fixed
                            list of hypothesis distributions,
* ``fixed``              -- a deterministic hash-based pick from the
                            hypothesis list, standing in for an arbitrary
                            proper learner in impossibility experiments.

Constrained learners solve against a hallucination budget shaved to
``eps * (1 - 1e-6)``: "does not violate at level eps" is a strict condition,
and the interior margin keeps the strict comparison decidable in floating
point once the optimum lands on the constraint boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concepts import AnchoredConceptClass, Concept, ConceptClass, version_space
from .measures import CMP_TOL, Dist, InfoMeasure, Sample, hall
from .rng import derive_int
from .solvers import FeasibleRegion, SolverReport, max_info

__all__ = [
    "INTERIOR_MARGIN",
    "LearnerSpec",
    "LearnedModel",
    "learn",
    "learn_empirical",
    "learn_improper",
    "learn_proper",
    "learn_fixed",
]

INTERIOR_MARGIN = 1e-6

_KINDS = ("empirical", "improper_max_info", "proper_max_info", "fixed")


@dataclass(frozen=True)
class LearnerSpec:
    """Declarative description of a learning rule."""

    kind: str
    measure: InfoMeasure | None = None
    eps: float = 0.0
    concept_class: ConceptClass | AnchoredConceptClass | None = None
    hypotheses: tuple[Dist, ...] | None = None
    fixed_choice_seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        if self.kind in ("improper_max_info", "proper_max_info"):
            if self.measure is None:
                raise ValueError(f"{self.kind} needs an information measure")
            if self.concept_class is None:
                raise ValueError(f"{self.kind} needs a concept class")
        if self.kind in ("proper_max_info", "fixed"):
            if not self.hypotheses:
                raise ValueError(f"{self.kind} needs a nonempty hypothesis list")
            object.__setattr__(self, "hypotheses", tuple(self.hypotheses))


@dataclass(frozen=True)
class LearnedModel:
    dist: Dist
    solver_report: SolverReport | None = None
    version_space_size: int = 0
    relaxed: bool = False
    version_space_empty: bool = False
    hypothesis_index: int | None = None


def effective_budget(eps: float) -> float:
    return eps * (1.0 - INTERIOR_MARGIN)


def learn(spec: LearnerSpec, sample: Sample) -> LearnedModel:
    if spec.kind == "empirical":
        return learn_empirical(sample)
    if spec.kind == "improper_max_info":
        return learn_improper(spec, sample)
    if spec.kind == "proper_max_info":
        return learn_proper(spec, sample)
    return learn_fixed(spec, sample)


def learn_empirical(sample: Sample) -> LearnedModel:
    """Relative frequencies of the sample; never hallucinates against any
    facts set containing the sample points."""
    if len(sample) == 0:
        raise ValueError("empirical learner needs a nonempty sample")
    w = np.bincount(np.array(sample.points), minlength=sample.universe.size).astype(float)
    dist = Dist(sample.universe, w / len(sample))
    return LearnedModel(dist)


# ---------------------------------------------------------------------------
# improper learner
# ---------------------------------------------------------------------------

def learn_improper(spec: LearnerSpec, sample: Sample) -> LearnedModel:
    """Maximize information subject to every sample-consistent concept.

    The output never puts more than the budget outside any concept of the
    version space, hence never outside the true facts set when the
    demonstrator is faithful.  An empty version space leaves the whole
    simplex feasible; the model is flagged so such trials stay auditable.
    """
    if spec.kind != "improper_max_info":
        raise ValueError("spec kind must be improper_max_info")
    cls = spec.concept_class
    if isinstance(cls, AnchoredConceptClass):
        return _learn_improper_anchored(spec, cls, sample)
    consistent = version_space(cls, sample)
    budget = effective_budget(spec.eps)
    region = FeasibleRegion(
        sample.universe, [(c, budget) for c in consistent.concepts]
    )
    report = max_info(spec.measure, region, sample)
    return LearnedModel(
        report.argmax,
        solver_report=report,
        version_space_size=len(consistent),
        version_space_empty=len(consistent) == 0,
    )


def _learn_improper_anchored(
    spec: LearnerSpec, cls: AnchoredConceptClass, sample: Sample
) -> LearnedModel:
    budget = effective_budget(spec.eps)
    core = cls.consistent_core(sample.atom_set())
    if core is None:
        region = FeasibleRegion(sample.universe, [])
        report = max_info(spec.measure, region, sample)
        return LearnedModel(report.argmax, solver_report=report,
                            version_space_size=0, version_space_empty=True)
    vs_size = cls.version_space_count(core)
    if spec.measure.kind == "out_of_sample":
        report = _anchored_out_of_sample(cls, core, sample, budget)
        if report is not None:
            return LearnedModel(report.argmax, solver_report=report, version_space_size=vs_size)
    report = _solve_by_constraint_generation(spec.measure, cls, core, sample, budget)
    return LearnedModel(report.argmax, solver_report=report, version_space_size=vs_size)


def _anchored_out_of_sample(
    cls: AnchoredConceptClass, core: frozenset[int], sample: Sample, budget: float
) -> SolverReport | None:
    """Closed-form canonical optimum for the anchored family.

    With core S (sampled atoms plus the anchor), every consistent concept is
    S plus k = member_size - |S| atoms of the remainder R, so the binding
    constraint is that the heaviest |R| - k remainder atoms carry at most
    the budget.  Out-of-sample mass is then maximized by spreading the
    budget uniformly over R; that face is a single point, and the surplus
    sits on the lowest-index core atom.  Returns None for shapes this
    derivation does not cover; the caller falls back to the generic solver.
    """
    n = cls.universe.size
    core_arr = np.fromiter(sorted(core), dtype=int)
    rest = np.setdiff1d(np.arange(n), core_arr)
    m = rest.size
    k = cls.member_size - len(core)
    uncovered = n - cls.member_size  # = m - k, atoms outside every concept
    sampled = sample.atom_set()
    if cls.anchor not in sampled:
        # anchor mass is out-of-sample yet inside every concept, so a point
        # mass there is optimal; it is also canonical when no atom precedes
        # the anchor
        if cls.anchor != 0:
            return None
        w = np.zeros(n)
        w[cls.anchor] = 1.0
        dist = Dist(cls.universe, w)
        return SolverReport(dist, 1.0, "optimal", 0, 0.0)
    if m == 0:
        w = np.zeros(n)
        w[int(core_arr.min())] = 1.0
        return SolverReport(Dist(cls.universe, w), 0.0, "optimal", 0, 0.0)
    if k == 0:
        # single consistent concept: budget pooled on the lowest rest atom
        value = min(1.0, budget)
        w = np.zeros(n)
        w[int(rest.min())] = value
        w[int(core_arr.min())] = 1.0 - value
        dist = Dist(cls.universe, w)
        return SolverReport(dist, value, "optimal", 0, 0.0)
    if uncovered <= 0:
        return None
    value = budget * m / uncovered
    if value >= 1.0 - 1e-12:
        return None
    w = np.zeros(n)
    w[rest] = budget / uncovered
    w[int(core_arr.min())] = 1.0 - value
    dist = Dist(cls.universe, w)
    residual = max(0.0, cls.worst_outside_mass(dist, core) - budget)
    return SolverReport(dist, value, "optimal", 0, residual)


def _solve_by_constraint_generation(
    measure: InfoMeasure,
    cls: AnchoredConceptClass,
    core: frozenset[int],
    sample: Sample,
    budget: float,
    max_rounds: int = 500,
) -> SolverReport:
    """Cutting-plane loop over the implicit concept family.

    Solves against a growing explicit subset of constraints; after each
    solve the family's worst-violated concept is added until the solution
    satisfies every concept.  Terminates because each round cuts off the
    returned optimum.
    """
    active: list[tuple[Concept, float]] = []
    seen: set[frozenset[int]] = set()
    for _ in range(max_rounds):
        region = FeasibleRegion(sample.universe, active)
        report = max_info(measure, region, sample)
        worst_concept, worst_mass = cls.worst_concept(report.argmax, core)
        if worst_mass <= budget + CMP_TOL:
            return report
        if worst_concept.members in seen:
            # the same cut repeating means we are at the boundary within
            # solver tolerance; accept with the honest residual
            return SolverReport(
                report.argmax, report.value, "tolerance_reached",
                report.iterations, max(report.residual, worst_mass - budget),
            )
        seen.add(worst_concept.members)
        active.append((worst_concept, budget))
    raise ArithmeticError("constraint generation failed to converge")


# ---------------------------------------------------------------------------
# proper and fixed learners
# ---------------------------------------------------------------------------

def _worst_hall(p: Dist, cls, core, concepts) -> float:
    if isinstance(cls, AnchoredConceptClass):
        return cls.worst_outside_mass(p, core) if core is not None else 0.0
    if not concepts:
        return 0.0
    return max(hall(p, c) for c in concepts)


def learn_proper(spec: LearnerSpec, sample: Sample) -> LearnedModel:
    """Best-information hypothesis among those respecting the version space.

    Ties break by hypothesis order.  When no hypothesis fits the budget the
    learner falls back to the hypothesis minimizing its worst-case
    hallucination over the version space and flags the model as relaxed.
    """
    if spec.kind != "proper_max_info":
        raise ValueError("spec kind must be proper_max_info")
    cls = spec.concept_class
    budget = effective_budget(spec.eps)
    if isinstance(cls, AnchoredConceptClass):
        core = cls.consistent_core(sample.atom_set())
        concepts = None
        vs_size = 0 if core is None else cls.version_space_count(core)
        empty = core is None
    else:
        consistent = version_space(cls, sample)
        core = None
        concepts = consistent.concepts
        vs_size = len(consistent)
        empty = vs_size == 0
    worst = [_worst_hall(p, cls, core, concepts) for p in spec.hypotheses]
    feasible_idx = [i for i, wv in enumerate(worst) if wv <= budget + CMP_TOL]
    if feasible_idx:
        scores = [
            (i, -(0.0 if spec.measure is None else _score(spec.measure, spec.hypotheses[i], sample)))
            for i in feasible_idx
        ]
        best = min(scores, key=lambda t: (t[1], t[0]))[0]
        return LearnedModel(
            spec.hypotheses[best], version_space_size=vs_size,
            version_space_empty=empty, hypothesis_index=best,
        )
    best = int(np.argmin(worst))  # first index among ties
    return LearnedModel(
        spec.hypotheses[best], version_space_size=vs_size,
        version_space_empty=empty, relaxed=True, hypothesis_index=best,
    )


def _score(measure: InfoMeasure, p: Dist, sample: Sample) -> float:
    from .measures import info

    return info(measure, p, sample)


def learn_fixed(spec: LearnerSpec, sample: Sample) -> LearnedModel:
    """Deterministic hash-based pick from the hypothesis list.

    The choice depends only on the multiset of sample points and the
    configured seed, which lets adversarial constructions be evaluated
    against a fully reproducible "arbitrary" learner.
    """
    if spec.kind != "fixed":
        raise ValueError("spec kind must be fixed")
    payload = b",".join(str(a).encode() for a in sorted(sample.points))
    index = derive_int(spec.fixed_choice_seed, payload) % len(spec.hypotheses)
    return LearnedModel(spec.hypotheses[index], hypothesis_index=index)
