"""Distributions over a finite atom universe and scalar measures on them.

Atoms are identified by indices ``0 .. size-1``.  A generative model and a
demonstrator are both plain distributions (`Dist`); a facts set is an
`EventSet`.  The central quantities are the hallucination rate (mass outside
a facts set), its relative form (worst mass on any event that is rare under
the demonstrator), total variation, KL divergence, and the information
functionals used to score how much a model generalizes.

Weight sums that feed exact assertions use ``math.fsum`` (correctly rounded)
on small supports and pairwise ``np.sum`` on large ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "NORM_TOL",
    "CMP_TOL",
    "UniverseMismatchError",
    "ExactSearchInfeasible",
    "Universe",
    "Dist",
    "EventSet",
    "Sample",
    "InfoMeasure",
    "hall",
    "hall_eps",
    "tv",
    "kl",
    "info",
    "shannon_entropy",
    "binary_entropy",
    "entropy_threshold_root",
    "agnostic_excess",
    "HallPair",
    "smoothness_certificate",
    "dist_to_json",
    "dist_from_json",
    "event_to_json",
    "event_from_json",
]

NORM_TOL = 1e-12   # mass normalization tolerance
CMP_TOL = 1e-9     # comparison / feasibility slack

# fsum is quadratic-ish in Python overhead; above this support size the
# pairwise numpy sum (error ~1e-16 relative) is used instead.
_FSUM_LIMIT = 65536

# hall_eps exact-search strategy thresholds (number of knapsack items).
_ENUM_LIMIT = 22
_MITM_LIMIT = 40
_GROUP_LIMIT = 8
_GROUP_COMBO_LIMIT = 1_000_000


class UniverseMismatchError(ValueError):
    """Operands do not share a universe."""


class ExactSearchInfeasible(ValueError):
    """The exact subset search would exceed its complexity budget."""


def _sum(values: np.ndarray) -> float:
    v = np.asarray(values, dtype=float)
    if v.size <= _FSUM_LIMIT:
        return math.fsum(v.tolist())
    return float(np.sum(v))


@dataclass(frozen=True)
class Universe:
    """Finite instance space of ``size`` atoms, optionally labelled."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("universe must contain at least one atom")
        if self.labels is not None:
            lab = tuple(self.labels)
            if len(lab) != self.size:
                raise ValueError("labels must have exactly one entry per atom")
            object.__setattr__(self, "labels", lab)

    def validate_atom(self, atom: int) -> int:
        a = int(atom)
        if not 0 <= a < self.size:
            raise ValueError(f"atom {a} outside universe of size {self.size}")
        return a


def _require_shared(u1: Universe, u2: Universe) -> None:
    if u1 != u2:
        raise UniverseMismatchError("operands live on different universes")


class Dist:
    """Probability distribution over a universe, stored as a dense vector.

    Weights are nonnegative, sum to one within ``NORM_TOL``, and are frozen
    after construction, so every operation on a `Dist` is pure.
    """

    __slots__ = ("universe", "w")

    def __init__(self, universe: Universe, weights: np.ndarray | Sequence[float]):
        w = np.array(weights, dtype=float)
        if w.shape != (universe.size,):
            raise ValueError("weight vector length must equal universe size")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = _sum(w)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1 within {NORM_TOL}")
        w.flags.writeable = False
        self.universe = universe
        self.w = w

    @classmethod
    def from_mapping(cls, universe: Universe, weights: Mapping[int, float]) -> "Dist":
        w = np.zeros(universe.size)
        for atom, value in weights.items():
            w[universe.validate_atom(atom)] = value
        return cls(universe, w)

    @classmethod
    def uniform(cls, universe: Universe, members: Iterable[int] | None = None) -> "Dist":
        if members is None:
            idx = np.arange(universe.size)
        else:
            idx = np.unique(np.asarray(list(members), dtype=np.int64))
            if idx.size == 0:
                raise ValueError("uniform distribution needs a nonempty support")
            if idx[0] < 0 or idx[-1] >= universe.size:
                raise ValueError("support atom outside universe")
        w = np.zeros(universe.size)
        w[idx] = 1.0 / idx.size
        return cls(universe, w)

    @classmethod
    def point(cls, universe: Universe, atom: int) -> "Dist":
        w = np.zeros(universe.size)
        w[universe.validate_atom(atom)] = 1.0
        return cls(universe, w)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.w > 0)

    def mass(self, atoms: Iterable[int] | np.ndarray) -> float:
        """Total weight of a set of atoms (correctly rounded on small sets)."""
        idx = np.asarray(list(atoms) if not isinstance(atoms, np.ndarray) else atoms, dtype=int)
        if idx.size == 0:
            return 0.0
        return _sum(self.w[idx])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dist)
            and self.universe == other.universe
            and np.array_equal(self.w, other.w)
        )

    def __hash__(self):
        return hash((self.universe, self.w.tobytes()))

    def __repr__(self):
        return f"Dist(universe={self.universe.size}, support={int(np.count_nonzero(self.w))})"


@dataclass(frozen=True)
class EventSet:
    """A subset of the universe; also serves as a candidate facts set."""

    universe: Universe
    members: frozenset[int]

    def __post_init__(self):
        mem = self.members if isinstance(self.members, frozenset) else frozenset(self.members)
        if mem:
            arr = np.fromiter(mem, dtype=np.int64, count=len(mem))
            if int(arr.min()) < 0 or int(arr.max()) >= self.universe.size:
                raise ValueError("event member outside universe")
            mem = frozenset(arr.tolist())
        object.__setattr__(self, "members", mem)
        object.__setattr__(self, "_mask_cache", None)

    @classmethod
    def of(cls, universe: Universe, atoms: Iterable[int]) -> "EventSet":
        return cls(universe, frozenset(atoms))

    def mask(self) -> np.ndarray:
        cached = getattr(self, "_mask_cache", None)
        if cached is None:
            cached = np.zeros(self.universe.size, dtype=bool)
            if self.members:
                cached[np.fromiter(self.members, dtype=np.int64, count=len(self.members))] = True
            cached.flags.writeable = False
            object.__setattr__(self, "_mask_cache", cached)
        return cached

    def complement(self) -> "EventSet":
        return EventSet(self.universe, frozenset(range(self.universe.size)) - self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, atom: int) -> bool:
        return atom in self.members


@dataclass(frozen=True)
class Sample:
    """Ordered list of drawn atoms (duplicates allowed) plus its seed."""

    universe: Universe
    points: tuple[int, ...]
    seed: int = 0

    def __post_init__(self):
        pts = tuple(self.universe.validate_atom(a) for a in self.points)
        object.__setattr__(self, "points", pts)

    def atom_set(self) -> frozenset[int]:
        return frozenset(self.points)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.universe.size, dtype=bool)
        if self.points:
            m[np.fromiter(set(self.points), dtype=int)] = True
        return m

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class InfoMeasure:
    """Named information functional I(p, sample).

    kind is one of ``shannon``, ``renyi`` (with order alpha), or
    ``out_of_sample``.  Shannon and Renyi ignore the sample.
    """

    kind: str
    alpha: float | None = None

    _KINDS = ("shannon", "renyi", "out_of_sample")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown information measure {self.kind!r}")
        if self.kind == "renyi":
            if self.alpha is None or self.alpha <= 0 or abs(self.alpha - 1.0) <= 1e-9:
                raise ValueError("renyi order must be positive and bounded away from 1")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} takes no order parameter")

    @classmethod
    def shannon(cls) -> "InfoMeasure":
        return cls("shannon")

    @classmethod
    def renyi(cls, alpha: float) -> "InfoMeasure":
        return cls("renyi", float(alpha))

    @classmethod
    def out_of_sample(cls) -> "InfoMeasure":
        return cls("out_of_sample")


# ---------------------------------------------------------------------------
# scalar measures
# ---------------------------------------------------------------------------

def hall(p: Dist, facts: EventSet) -> float:
    """Hallucination rate: probability mass of ``p`` outside the facts set."""
    _require_shared(p.universe, facts.universe)
    outside = p.w[~facts.mask()]
    nz = outside[outside > 0]
    if nz.size == 0:
        return 0.0
    return _sum(nz)


def _knapsack_enumerate(pw: np.ndarray, qw: np.ndarray, budget: float) -> float:
    # iterative doubling over all subsets; exact for <= _ENUM_LIMIT items
    psums = np.zeros(1)
    qsums = np.zeros(1)
    for pi, qi in zip(pw, qw):
        psums = np.concatenate([psums, psums + pi])
        qsums = np.concatenate([qsums, qsums + qi])
    ok = qsums <= budget
    return float(np.max(psums[ok]))


def _knapsack_mitm(pw: np.ndarray, qw: np.ndarray, budget: float) -> float:
    # meet in the middle: exact for <= _MITM_LIMIT items
    half = len(pw) // 2

    def subset_sums(ps, qs):
        p = np.zeros(1)
        q = np.zeros(1)
        for pi, qi in zip(ps, qs):
            p = np.concatenate([p, p + pi])
            q = np.concatenate([q, q + qi])
        return p, q

    pl, ql = subset_sums(pw[:half], qw[:half])
    pr, qr = subset_sums(pw[half:], qw[half:])
    order = np.argsort(qr, kind="stable")
    qr = qr[order]
    pr = np.maximum.accumulate(pr[order])
    best = -1.0
    for pi, qi in zip(pl, ql):
        remaining = budget - qi
        if remaining < 0:
            continue
        j = np.searchsorted(qr, remaining, side="right") - 1
        if j >= 0:
            cand = pi + pr[j]
            if cand > best:
                best = cand
    return float(best)


def _knapsack_grouped(pw: np.ndarray, qw: np.ndarray, budget: float) -> float | None:
    """Exact rational knapsack when items collapse into few (p, q) classes.

    Returns None when the structure does not qualify.  Arithmetic runs on
    `Fraction` values of the actual float weights, so the optimum is exact
    for the inputs as stored.
    """
    classes: dict[tuple[float, float], int] = {}
    for pi, qi in zip(pw.tolist(), qw.tolist()):
        classes[(pi, qi)] = classes.get((pi, qi), 0) + 1
    if len(classes) > _GROUP_LIMIT:
        return None
    items = sorted(classes.items(), key=lambda kv: -kv[1])  # largest class last to close form
    closed_p, closed_q = items[0][0]
    closed_n = items[0][1]
    rest = items[1:]
    combos = 1
    for (_, n) in rest:
        combos *= n + 1
        if combos > _GROUP_COMBO_LIMIT:
            return None
    fb = Fraction(budget)
    fcq = Fraction(closed_q)
    fcp = Fraction(closed_p)
    best = Fraction(-1)
    ranges = [range(n + 1) for (_, n) in rest]
    for counts in itertools.product(*ranges):
        used = Fraction(0)
        value = Fraction(0)
        for ((pi, qi), _), k in zip(rest, counts):
            used += k * Fraction(qi)
            value += k * Fraction(pi)
        if used > fb:
            continue
        spare = fb - used
        k0 = closed_n if fcq == 0 else min(closed_n, int(spare / fcq))
        value += k0 * fcp
        if value > best:
            best = value
    return float(best)


def hall_eps(p: Dist, q: Dist, eps: float) -> float:
    """Relative hallucination rate: worst mass of ``p`` on an event rare under ``q``.

    Maximizes p[A] over events A with q[A] <= eps.  Computed exactly: atoms
    carrying p-mass but no q-mass are free, the rest form a 0/1 knapsack
    solved by full enumeration, meet-in-the-middle, or (for inputs that
    collapse into a few identical-weight classes) exact rational counting.
    Raises `ExactSearchInfeasible` rather than approximating.
    """
    _require_shared(p.universe, q.universe)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    free = (q.w == 0.0) & (p.w > 0.0)
    base = _sum(p.w[free]) if np.any(free) else 0.0
    # items: atoms that cost budget and add value; anything with q > eps
    # cannot appear in a feasible event, anything with p == 0 never helps
    cand = (p.w > 0.0) & (q.w > 0.0) & (q.w <= eps)
    if not np.any(cand):
        return base
    pw = p.w[cand]
    qw = q.w[cand]
    n = pw.size
    if n <= _ENUM_LIMIT:
        return base + _knapsack_enumerate(pw, qw, eps)
    if n <= _MITM_LIMIT:
        return base + _knapsack_mitm(pw, qw, eps)
    grouped = _knapsack_grouped(pw, qw, eps)
    if grouped is not None:
        return base + grouped
    raise ExactSearchInfeasible(
        f"exact search infeasible: {n} knapsack atoms exceed the enumeration budget"
    )


def tv(p: Dist, q: Dist) -> float:
    """Total variation distance (1/2) sum |p - q|."""
    _require_shared(p.universe, q.universe)
    return 0.5 * _sum(np.abs(p.w - q.w))


def kl(p: Dist, q: Dist) -> float:
    """KL divergence in nats; +inf when supp(p) is not inside supp(q)."""
    _require_shared(p.universe, q.universe)
    sup = p.w > 0
    if np.any(q.w[sup] == 0.0):
        return math.inf
    ps = p.w[sup]
    qs = q.w[sup]
    return _sum(ps * np.log(ps / qs))


def shannon_entropy(p: Dist) -> float:
    """H(p) in nats, with 0 log(1/0) = 0."""
    w = p.w[p.w > 0]
    if w.size == 0:
        return 0.0
    return _sum(-w * np.log(w))


def info(measure: InfoMeasure, p: Dist, sample: Sample | None = None) -> float:
    """Evaluate an information functional; the sample matters only for
    out-of-sample mass."""
    if measure.kind == "shannon":
        return shannon_entropy(p)
    if measure.kind == "renyi":
        a = measure.alpha
        w = p.w[p.w > 0]
        return (1.0 / (1.0 - a)) * math.log(_sum(w**a))
    # out_of_sample
    if sample is None:
        raise ValueError("out-of-sample mass needs a sample")
    _require_shared(p.universe, sample.universe)
    outside = p.w[~sample.mask()]
    nz = outside[outside > 0]
    return _sum(nz) if nz.size else 0.0


def binary_entropy(x: float, bits: bool = False) -> float:
    """h(x) = -x log x - (1-x) log(1-x); nats by default, base 2 on request."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("binary entropy argument must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    log = math.log2 if bits else math.log
    return -x * log(x) - (1.0 - x) * log(1.0 - x)


def entropy_threshold_root(bits: bool = True, tol: float = 1e-6) -> float:
    """Root of h(2e) + 5e = 1 on (0, 1/4), by bisection.

    The left-hand side is strictly increasing on [0, 1/4], negative at 0 and
    positive at 1/4, so the root is unique in the bracket.  The value is
    base-sensitive: roughly 0.0765 in bits and 0.0999 in nats.
    """
    def f(e: float) -> float:
        return binary_entropy(2.0 * e, bits=bits) + 5.0 * e - 1.0

    lo, hi = 0.0, 0.25
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class HallPair:
    """Hallucination of a learned model next to the best in-class value."""

    learned: float
    best_in_class: float

    def excess(self, alpha: float) -> float:
        return self.learned - alpha * self.best_in_class


def agnostic_excess(
    p_hat: Dist,
    hypotheses: Sequence[Dist],
    target: EventSet | tuple[Dist, float],
) -> HallPair:
    """Pair (hall of p_hat, min hall over the hypothesis class).

    ``target`` is either a facts set (absolute rate) or a ``(q, eps)`` pair
    (relative rate).  The competitive excess at level alpha is
    ``pair.excess(alpha)``.
    """
    if len(hypotheses) == 0:
        raise ValueError("hypothesis class must be nonempty")
    if isinstance(target, EventSet):
        score = lambda d: hall(d, target)
    else:
        q, eps = target
        score = lambda d: hall_eps(d, q, eps)
    return HallPair(score(p_hat), min(score(h) for h in hypotheses))


def smoothness_certificate(p: Dist, q: Dist) -> float:
    """Largest sigma such that p[A] <= q[A] / sigma for every event A.

    Equals the minimum of q[x]/p[x] over the support of p; zero as soon as
    p puts mass where q has none.  For sigma > 0 this certifies
    hall_eps(p, q, e) <= e / sigma at every budget e.
    """
    _require_shared(p.universe, q.universe)
    sup = p.w > 0
    if np.any(q.w[sup] == 0.0):
        return 0.0
    return float(np.min(q.w[sup] / p.w[sup]))


# ---------------------------------------------------------------------------
# wire formats
# ---------------------------------------------------------------------------

def dist_to_json(p: Dist) -> dict:
    weights = {str(i): float(p.w[i]) for i in np.flatnonzero(p.w > 0)}
    return {"universe_size": p.universe.size, "weights": weights}


def dist_from_json(obj: Mapping) -> Dist:
    universe = Universe(int(obj["universe_size"]))
    return Dist.from_mapping(universe, {int(k): float(v) for k, v in obj["weights"].items()})


def event_to_json(e: EventSet) -> dict:
    return {"members": sorted(e.members)}


def event_from_json(universe: Universe, obj: Mapping) -> EventSet:
    return EventSet.of(universe, (int(a) for a in obj["members"]))
