"""Concept classes, version spaces, VC dimension, and packing constructions.

A concept is a candidate facts set.  Classes come in two flavors: explicit
enumerations (the normal case; every desk-scale construction is finite) and
one structured implicit family, `AnchoredConceptClass`, for the fixed-size
anchored-superset classes whose explicit form is too large to enumerate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .measures import CMP_TOL, Dist, EventSet, Sample, UniverseMismatchError, Universe, hall, shannon_entropy, _sum
from .rng import generator

__all__ = [
    "Concept",
    "ConceptClass",
    "AnchoredConceptClass",
    "InformativenessProfile",
    "VCReport",
    "version_space",
    "shatters",
    "vc_dimension",
    "neighborhood",
    "sufficiency_value",
    "PackingResult",
    "packing_construct",
    "entropy_split_bound",
    "concept_class_to_json",
    "concept_class_from_json",
]

# A concept is structurally an event set; the alias marks intent.
Concept = EventSet


class ConceptClass:
    """Explicit, ordered collection of distinct concepts over one universe."""

    def __init__(self, universe: Universe, concepts: Sequence[Concept], name: str = ""):
        self.universe = universe
        self.name = name
        seen: set[frozenset[int]] = set()
        items: list[Concept] = []
        for c in concepts:
            if c.universe != universe:
                raise UniverseMismatchError("concept universe differs from class universe")
            if c.members in seen:
                raise ValueError("duplicate concept in class")
            seen.add(c.members)
            items.append(c)
        self.concepts: tuple[Concept, ...] = tuple(items)
        self._matrix: np.ndarray | None = None

    def __len__(self):
        return len(self.concepts)

    def __iter__(self):
        return iter(self.concepts)

    def __getitem__(self, i: int) -> Concept:
        return self.concepts[i]

    def matrix(self) -> np.ndarray:
        """Boolean membership matrix, one row per concept."""
        if self._matrix is None:
            m = np.zeros((len(self.concepts), self.universe.size), dtype=bool)
            for i, c in enumerate(self.concepts):
                if c.members:
                    m[i, np.fromiter(c.members, dtype=int)] = True
            m.flags.writeable = False
            self._matrix = m
        return self._matrix

    def restrict(self, keep: np.ndarray, name: str | None = None) -> "ConceptClass":
        sub = [c for c, k in zip(self.concepts, keep) if k]
        out = ConceptClass(self.universe, sub, name if name is not None else self.name)
        if self._matrix is not None:
            m = self._matrix[np.asarray(keep, dtype=bool)]
            m.flags.writeable = False
            out._matrix = m
        return out


@dataclass(frozen=True)
class AnchoredConceptClass:
    """Implicit class of all fixed-size concepts containing an anchor atom.

    Concepts are the sets of exactly ``member_size`` atoms that include
    ``anchor``.  The class is too large to enumerate for moderate universes,
    so version-space reasoning runs on its closed form: the consistent
    concepts after a sample are exactly the supersets of the sampled atoms
    plus the anchor.
    """

    universe: Universe
    anchor: int
    member_size: int

    def __post_init__(self):
        self.universe.validate_atom(self.anchor)
        if not 1 <= self.member_size <= self.universe.size:
            raise ValueError("member size outside universe")

    def __len__(self):
        return math.comb(self.universe.size - 1, self.member_size - 1)

    def contains(self, c: Concept) -> bool:
        return (
            c.universe == self.universe
            and len(c.members) == self.member_size
            and self.anchor in c.members
        )

    def draw(self, rng: np.random.Generator) -> Concept:
        others = [a for a in range(self.universe.size) if a != self.anchor]
        extra = rng.choice(len(others), size=self.member_size - 1, replace=False)
        members = {self.anchor} | {others[i] for i in extra}
        return Concept.of(self.universe, members)

    def consistent_core(self, sample_atoms: Iterable[int]) -> frozenset[int] | None:
        """Atoms every consistent concept must contain; None if none is left."""
        core = frozenset(sample_atoms) | {self.anchor}
        if len(core) > self.member_size:
            return None
        return core

    def version_space_count(self, core: frozenset[int]) -> int:
        free = self.universe.size - len(core)
        slots = self.member_size - len(core)
        return math.comb(free, slots)

    def worst_outside_mass(self, p: Dist, core: frozenset[int]) -> float:
        """max over consistent concepts T of p[X \\ T]."""
        _, value = self.worst_concept(p, core)
        return value

    def worst_concept(self, p: Dist, core: frozenset[int]) -> tuple[Concept, float]:
        """The consistent concept the distribution violates hardest.

        The worst concept keeps the mandatory core and fills its remaining
        slots with the lightest atoms outside it, leaving the heaviest
        remainder uncovered.
        """
        core_idx = np.fromiter(core, dtype=int)
        outside = np.setdiff1d(np.arange(self.universe.size), core_idx)
        slots = self.member_size - len(core)
        order = outside[np.argsort(p.w[outside], kind="stable")]
        chosen = order[:slots]
        concept = Concept.of(self.universe, set(core) | set(int(a) for a in chosen))
        uncovered = order[slots:]
        value = _sum(p.w[uncovered]) if uncovered.size else 0.0
        return concept, value


@dataclass(frozen=True)
class InformativenessProfile:
    """User-supplied table of (epsilon, xi(epsilon)) pairs, sorted by epsilon."""

    table: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.table:
            raise ValueError("profile table must be nonempty")
        rows = tuple((float(e), float(x)) for e, x in self.table)
        for e, x in rows:
            if not (0.0 <= e <= 1.0 and 0.0 <= x <= 1.0):
                raise ValueError("profile entries must lie in [0, 1]")
        if any(rows[i][0] > rows[i + 1][0] for i in range(len(rows) - 1)):
            raise ValueError("profile must be sorted by epsilon")
        object.__setattr__(self, "table", rows)

    def xi_at(self, eps: float) -> float:
        """Step lookup: value of the largest tabulated epsilon <= eps."""
        value = self.table[0][1]
        for e, x in self.table:
            if e <= eps:
                value = x
            else:
                break
        return value


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def version_space(cls: ConceptClass, sample: Sample) -> ConceptClass:
    """Concepts consistent with every sample point, in canonical order."""
    if cls.universe != sample.universe:
        raise UniverseMismatchError("sample universe differs from class universe")
    atoms = sorted(sample.atom_set())
    if not atoms:
        return cls
    keep = cls.matrix()[:, atoms].all(axis=1)
    return cls.restrict(keep, name=cls.name)


def shatters(cls: ConceptClass, points: EventSet) -> bool:
    """True iff every intersection pattern with ``points`` is realized."""
    if cls.universe != points.universe:
        raise UniverseMismatchError("point set universe differs from class universe")
    k = len(points.members)
    if k > 20:
        raise ValueError("shattering check limited to 20 points")
    want = 1 << k
    if len(cls) < want:
        return False
    idx = sorted(points.members)
    sub = cls.matrix()[:, idx]
    digits = sub @ (1 << np.arange(k, dtype=np.int64))
    return len(set(digits.tolist())) == want


@dataclass(frozen=True)
class VCReport:
    """VC search outcome; ``saturated`` means only 'at least this' is known."""

    dimension: int
    saturated: bool
    witness: tuple[int, ...] | None


_VC_ENUM_BUDGET = 5_000_000


def vc_dimension(cls: ConceptClass, cap: int = 20) -> VCReport:
    """Largest size (up to ``cap``) of a shattered atom set.

    Searches sizes ascending and subsets in lexicographic order, stopping at
    the first shattered witness per size; deterministic and reproducible.
    When a witness exists at the cap itself, the true dimension may be
    larger and the report is marked saturated.
    """
    if cap > 20:
        raise ValueError("cap limited to 20")
    best = 0
    best_witness: tuple[int, ...] | None = None
    n = cls.universe.size
    for k in range(1, cap + 1):
        if (1 << k) > len(cls):
            return VCReport(best, False, best_witness)
        if math.comb(n, k) > _VC_ENUM_BUDGET:
            raise ValueError(f"subset enumeration at size {k} infeasible for universe of size {n}")
        found = None
        for subset in itertools.combinations(range(n), k):
            if shatters(cls, EventSet.of(cls.universe, subset)):
                found = subset
                break
        if found is None:
            return VCReport(best, False, best_witness)
        best, best_witness = k, found
    return VCReport(best, True, best_witness)


def neighborhood(cls: ConceptClass, q: Dist, xi: float) -> ConceptClass:
    """Concepts the demonstrator barely violates: hall(q, T) <= xi."""
    if cls.universe != q.universe:
        raise UniverseMismatchError("demonstrator universe differs from class universe")
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    keep = np.array([hall(q, c) <= xi + CMP_TOL for c in cls.concepts])
    return cls.restrict(keep, name=cls.name)


def sufficiency_value(cls: ConceptClass, hypotheses: Sequence[Dist], q: Dist, xi: float) -> float:
    """min over hypotheses of the worst hallucination inside the xi-neighborhood.

    An empty neighborhood yields 0 by the sup-over-empty-set convention.
    """
    if len(hypotheses) == 0:
        raise ValueError("hypothesis class must be nonempty")
    near = neighborhood(cls, q, xi)
    if len(near) == 0:
        return 0.0
    return min(max(hall(p, c) for c in near) for p in hypotheses)


@dataclass(frozen=True)
class PackingResult:
    concept_class: ConceptClass
    provenance: dict


def packing_construct(d: int, seed: int = 0, max_tries: int = 10_000) -> PackingResult:
    """Greedy rejection-sampled packing of d/2-subsets of [d].

    Accepts a uniformly drawn d/2-subset whenever it intersects every
    accepted subset in at most d/4 atoms, and stops after ``max_tries``
    consecutive rejections.  The provenance records the achieved size next
    to the theoretical target sqrt(1/(4d)) * exp(d/16).
    """
    if d < 4 or d % 4 != 0:
        raise ValueError("d must be >= 4 and divisible by 4")
    universe = Universe(d)
    half, quarter = d // 2, d // 4
    rng = generator(seed, d)
    accepted_masks: list[int] = []
    accepted: list[Concept] = []
    tries = 0
    consecutive = 0
    while consecutive < max_tries:
        tries += 1
        atoms = rng.choice(d, size=half, replace=False)
        mask = 0
        for a in atoms:
            mask |= 1 << int(a)
        if all((mask & other).bit_count() <= quarter for other in accepted_masks):
            accepted_masks.append(mask)
            accepted.append(Concept.of(universe, (int(a) for a in atoms)))
            consecutive = 0
        else:
            consecutive += 1
    if not accepted:
        raise RuntimeError("packing construction produced no sets")
    target = math.sqrt(1.0 / (4.0 * d)) * math.exp(d / 16.0)
    cls = ConceptClass(universe, accepted, name=f"packing(d={d})")
    provenance = {
        "seed": seed,
        "tries": tries,
        "achieved_size": len(accepted),
        "target_size": target,
    }
    return PackingResult(cls, provenance)


def entropy_split_bound(p: Dist, a1: EventSet, a2: EventSet, a3: EventSet) -> float:
    """Entropy decomposed across a three-way partition; equals H(p).

    Returns sum_i p[A_i] log(1/p[A_i]) + p[A_i] H(p | A_i) and checks the
    chain-rule identity against the direct entropy to 1e-9.
    """
    for a in (a2, a3):
        if a.universe != a1.universe:
            raise UniverseMismatchError("partition blocks live on different universes")
    if p.universe != a1.universe:
        raise UniverseMismatchError("distribution universe differs from partition")
    m1, m2, m3 = a1.mask(), a2.mask(), a3.mask()
    if np.any(m1 & m2) or np.any(m1 & m3) or np.any(m2 & m3) or not np.all(m1 | m2 | m3):
        raise ValueError("blocks must partition the universe")
    total = 0.0
    for mask in (m1, m2, m3):
        block = p.w[mask]
        block = block[block > 0]
        if block.size == 0:
            continue
        pa = _sum(block)
        cond = block / pa
        h_cond = _sum(-cond * np.log(cond))
        total += -pa * math.log(pa) + pa * h_cond
    direct = shannon_entropy(p)
    if abs(total - direct) > 1e-9:
        raise ArithmeticError(f"chain-rule identity violated: {total!r} vs {direct!r}")
    return total


# ---------------------------------------------------------------------------
# wire formats
# ---------------------------------------------------------------------------

def concept_class_to_json(cls: ConceptClass) -> dict:
    return {
        "name": cls.name,
        "universe_size": cls.universe.size,
        "concepts": [sorted(c.members) for c in cls.concepts],
    }


def concept_class_from_json(obj: dict) -> ConceptClass:
    universe = Universe(int(obj["universe_size"]))
    concepts = [Concept.of(universe, (int(a) for a in atoms)) for atoms in obj["concepts"]]
    return ConceptClass(universe, concepts, name=str(obj.get("name", "")))
