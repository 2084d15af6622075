"""Seeded hard-instance generators and the bound calculators behind them.

Each construction produces a faithful demonstrator / facts-set pair (the
faithfulness is asserted at build time) together with whatever hypothesis or
concept class the corresponding experiment needs.  Constructions are
addressable by name for the experiment harness and the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .concepts import AnchoredConceptClass, Concept, ConceptClass
from .measures import Dist, Sample, Universe, hall
from .rng import generator

__all__ = [
    "HardInstance",
    "InstanceEnsemble",
    "example1_instance",
    "theorem1_ensemble",
    "theorem1_coupled_trial",
    "example4_instance",
    "theorem3_ensemble",
    "example5_instance",
    "appendix_ensemble",
    "fano_bound",
    "CONSTRUCTION_NAMES",
]

CONSTRUCTION_NAMES = ("example1", "theorem1", "example4", "theorem3", "example5", "appendix")


@dataclass(frozen=True)
class HardInstance:
    """One faithful (demonstrator, facts set) pair with provenance."""

    q: Dist
    facts: Concept
    meta: dict

    def __post_init__(self):
        leak = hall(self.q, self.facts)
        if leak != 0.0:
            raise ValueError(f"demonstrator leaks {leak!r} mass outside the facts set")


@dataclass(frozen=True)
class InstanceEnsemble:
    """Seeded family of hard instances; identical seed, identical instance."""

    name: str
    params: dict
    _draw: Callable[[int], HardInstance]

    def draw(self, seed: int) -> HardInstance:
        return self._draw(seed)


# ---------------------------------------------------------------------------
# two-hypothesis impossibility constructions
# ---------------------------------------------------------------------------

def example1_instance(
    sizes: tuple[int, int, int] = (4, 4, 4), learner_output_index: int = 1
) -> dict:
    """Disjoint-support construction defeating any proper learner.

    Three disjoint blocks A, A1, A2; the demonstrator is uniform on A, the
    hypotheses are uniform on A1 and A2, and the facts set adversarially
    excludes whichever hypothesis the learner produced.
    """
    a, a1, a2 = sizes
    if min(a, a1, a2) < 1:
        raise ValueError("all three blocks need at least one atom")
    if learner_output_index not in (1, 2):
        raise ValueError("learner output index must be 1 or 2")
    universe = Universe(a + a1 + a2)
    block_a = range(0, a)
    block_1 = range(a, a + a1)
    block_2 = range(a + a1, a + a1 + a2)
    q = Dist.uniform(universe, block_a)
    p1 = Dist.uniform(universe, block_1)
    p2 = Dist.uniform(universe, block_2)
    spared = block_2 if learner_output_index == 1 else block_1
    facts = Concept.of(universe, set(block_a) | set(spared))
    instance = HardInstance(
        q, facts,
        meta={
            "construction": "example1",
            "sizes": list(sizes),
            "learner_output_index": learner_output_index,
        },
    )

    def adversarial_facts(output_index: int) -> Concept:
        spared_ = block_2 if output_index == 1 else block_1
        return Concept.of(universe, set(block_a) | set(spared_))

    return {
        "instance": instance,
        "hypotheses": (p1, p2),
        "adversarial_facts": adversarial_facts,
        "universe": universe,
    }


def _theorem1_statics(big_m: int):
    universe = Universe(2 * big_m)
    sides = (np.arange(0, big_m), np.arange(big_m, 2 * big_m))
    p1 = Dist.uniform(universe, sides[0])
    p2 = Dist.uniform(universe, sides[1])
    return universe, sides, p1, p2


_THEOREM1_CACHE: dict[int, tuple] = {}


def theorem1_ensemble(
    n: int, atoms_per_side: int, tilde_size: int, branch: int, seed: int
) -> dict:
    """Discretized two-interval construction with a planted sparse side.

    Side blocks A1, A2 of M atoms each; on branch i the facts set is all of
    A_i plus a random m-subset of the far side, and the demonstrator splits
    its mass evenly between A_i and that subset.  m >= 2 n^2 keeps samples
    collision-free with probability at least 3/4 (birthday bound), and
    M >= 100 m caps the discretization gap m/M at 1%.
    """
    m, big_m = tilde_size, atoms_per_side
    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    if m < 2 * n * n:
        raise ValueError("tilde block must have at least 2 n^2 atoms")
    if big_m < 100 * m:
        raise ValueError("side blocks must dominate the tilde block 100-fold")
    if big_m not in _THEOREM1_CACHE:
        _THEOREM1_CACHE[big_m] = _theorem1_statics(big_m)
    universe, sides, p1, p2 = _THEOREM1_CACHE[big_m]
    own = sides[branch - 1]
    other = sides[2 - branch]
    rng = generator(seed, 1, branch, n)
    tilde = np.sort(rng.choice(other, size=m, replace=False))
    weights = np.zeros(universe.size)
    weights[own] = 0.5 / big_m
    weights[tilde] = 0.5 / m
    q = Dist(universe, weights)
    facts = Concept(universe, frozenset(np.concatenate([own, tilde]).tolist()))
    instance = HardInstance(
        q, facts,
        meta={
            "construction": "theorem1",
            "n": n,
            "atoms_per_side": big_m,
            "tilde_size": m,
            "branch": branch,
            "seed": seed,
            "discretization_gap": m / big_m,
            "tilde_atoms": tilde.tolist(),
        },
    )
    return {"instance": instance, "hypotheses": (p1, p2), "universe": universe}


def theorem1_coupled_trial(
    n: int, atoms_per_side: int, tilde_size: int, seed: int
) -> dict:
    """One adversarial round where the sample is valid under both branches.

    Points are drawn from the planted sparse subsets of both sides, so the
    observed sample has positive likelihood under either branch's
    demonstrator.  Whatever hypothesis a learner picks, the branch on which
    that hypothesis leaks all but m/M of its mass is a consistent world.
    """
    b1 = theorem1_ensemble(n, atoms_per_side, tilde_size, 1, seed)
    b2 = theorem1_ensemble(n, atoms_per_side, tilde_size, 2, seed)
    rng = generator(seed, 2, n)
    tilde2 = b1["instance"].meta["tilde_atoms"]
    tilde1 = b2["instance"].meta["tilde_atoms"]
    points = []
    for _ in range(n):
        if rng.random() < 0.5:
            points.append(int(tilde1[rng.integers(len(tilde1))]))
        else:
            points.append(int(tilde2[rng.integers(len(tilde2))]))
    sample = Sample(b1["universe"], tuple(points), seed=seed)
    return {
        "branches": (b1, b2),
        "sample": sample,
        "hypotheses": b1["hypotheses"],
        "universe": b1["universe"],
    }


def example4_instance() -> dict:
    """Two 100-atom concepts sharing one atom, with a point-mass demonstrator.

    The demonstrator sits on the shared atom and is faithful for both
    concepts, so no sample ever separates them; a proper learner restricted
    to the two uniform hypotheses leaks 99/100 against the concept it did
    not pick.
    """
    universe = Universe(199)
    shared = 0
    a1 = frozenset(range(0, 100))
    a2 = frozenset({shared}) | frozenset(range(100, 199))
    c1, c2 = Concept(universe, a1), Concept(universe, a2)
    p1 = Dist.uniform(universe, a1)
    p2 = Dist.uniform(universe, a2)
    q = Dist.point(universe, shared)
    instance = HardInstance(q, c1, meta={"construction": "example4", "shared_atom": shared})

    def adversarial_facts(output_index: int) -> Concept:
        return c2 if output_index == 1 else c1

    return {
        "instance": instance,
        "concept_class": ConceptClass(universe, [c1, c2], name="example4"),
        "hypotheses": (p1, p2),
        "adversarial_facts": adversarial_facts,
        "universe": universe,
    }


# ---------------------------------------------------------------------------
# anchored fixed-size ensemble and its relatives
# ---------------------------------------------------------------------------

def theorem3_ensemble(d: int, eps_prime: float, seed: int = 0) -> InstanceEnsemble:
    """Random anchored concepts with a demonstrator spiked on the anchor.

    Universe of 2d + 1 atoms with anchor atom 0.  Each draw picks a facts
    set of d + 1 atoms containing the anchor uniformly at random and pairs
    it with q = (1 - eps') point mass on the anchor plus eps' uniform on the
    rest of the facts set.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0.0 < eps_prime < 1.0:
        raise ValueError("eps_prime must lie in (0, 1)")
    universe = Universe(2 * d + 1)
    cls = AnchoredConceptClass(universe, anchor=0, member_size=d + 1)

    def draw(draw_seed: int) -> HardInstance:
        rng = generator(seed, draw_seed)
        facts = cls.draw(rng)
        others = np.array(sorted(facts.members - {0}))
        w = np.zeros(universe.size)
        w[0] = 1.0 - eps_prime
        w[others] = eps_prime / d
        q = Dist(universe, w)
        return HardInstance(
            q, facts,
            meta={"construction": "theorem3", "d": d, "eps_prime": eps_prime,
                  "seed": seed, "draw_seed": draw_seed},
        )

    return InstanceEnsemble(
        name="theorem3",
        params={"d": d, "eps_prime": eps_prime, "seed": seed, "class": cls},
        _draw=draw,
    )


def example5_instance(d: int, a_size: int) -> dict:
    """A large always-included block plus d free atoms.

    The concept class contains every superset of the block, shattering the
    free atoms, yet the uniform-over-block strategy never hallucinates and
    keeps almost all mass out of any small sample.
    """
    if d > 16:
        raise ValueError("free-atom count capped at 16 (explicit class of 2^d concepts)")
    if a_size < 10 * d:
        raise ValueError("block must dominate the free atoms (a_size >= 10 d)")
    universe = Universe(a_size + d)
    block = frozenset(range(a_size))
    free = list(range(a_size, a_size + d))
    concepts = []
    for mask in range(1 << d):
        extra = {free[i] for i in range(d) if mask >> i & 1}
        concepts.append(Concept(universe, block | extra))
    cls = ConceptClass(universe, concepts, name=f"example5(d={d})")
    q = Dist.uniform(universe, block)
    instance = HardInstance(q, concepts[0], meta={"construction": "example5", "d": d, "a_size": a_size})
    return {
        "instance": instance,
        "concept_class": cls,
        "block_uniform": q,
        "free_atoms": tuple(free),
        "universe": universe,
    }


def appendix_ensemble(d: int, seed: int = 0) -> InstanceEnsemble:
    """Uniform demonstrators over a packing of half-size subsets.

    Builds a packing of d/2-subsets of [d] with pairwise intersections at
    most d/4 and draws (uniform over T, T) pairs from it.  Every member sits
    at KL exactly log 2 from the uniform distribution on [d], which feeds
    the identification lower bound.
    """
    from .concepts import packing_construct

    if d < 8 or d % 4 != 0:
        raise ValueError("d must be >= 8 and divisible by 4")
    packing = packing_construct(d, seed=seed)
    cls = packing.concept_class

    def draw(draw_seed: int) -> HardInstance:
        rng = generator(seed, draw_seed, d)
        facts = cls[int(rng.integers(len(cls)))]
        q = Dist.uniform(cls.universe, facts.members)
        return HardInstance(
            q, facts,
            meta={"construction": "appendix", "d": d, "seed": seed,
                  "draw_seed": draw_seed, "packing": packing.provenance},
        )

    return InstanceEnsemble(
        name="appendix",
        params={"d": d, "seed": seed, "class": cls, "packing": packing.provenance},
        _draw=draw,
    )


def fano_bound(n: int, class_size: int, kl_sup: float) -> float:
    """Identification-error lower bound 1 - (n kl_sup + log 2) / log |C|.

    Clamped at zero; natural logarithms throughout.
    """
    if class_size < 2:
        raise ValueError("class size must be at least 2")
    if kl_sup < 0:
        raise ValueError("kl_sup must be nonnegative")
    value = 1.0 - (n * kl_sup + math.log(2.0)) / math.log(class_size)
    return max(0.0, value)
