"""Exact optimization of information functionals over hallucination polytopes.

The feasible sets are intersections of the probability simplex with
complement-mass caps p[X \\ T] <= eps, one per concept.  Out-of-sample mass
is linear, so it is maximized with a dense two-phase simplex under Bland's
rule; Shannon and Renyi objectives go through Lagrangian dual ascent with
closed-form (or bisection) inner maximizers.  Everything is deterministic:
same region, same report, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .concepts import Concept
from .measures import (
    CMP_TOL,
    Dist,
    InfoMeasure,
    Sample,
    Universe,
    UniverseMismatchError,
    hall,
    info,
    shannon_entropy,
)

__all__ = [
    "FeasibleRegion",
    "SolverReport",
    "feasible",
    "max_out_of_sample",
    "max_entropy",
    "max_info",
    "solver_report_to_json",
]

_MAX_ITER = 10_000
_RESIDUAL_TOL = 1e-9
_PIVOT_TOL = 1e-11
_PIN_SLACK = 1e-11


class FeasibleRegion:
    """Simplex plus complement-mass constraints p[X \\ T] <= eps per concept.

    Duplicate concepts are deduplicated keeping the smallest eps.
    """

    def __init__(self, universe: Universe, constraints: Sequence[tuple[Concept, float]] = ()):
        self.universe = universe
        dedup: dict[frozenset[int], tuple[Concept, float]] = {}
        order: list[frozenset[int]] = []
        for concept, eps in constraints:
            if concept.universe != universe:
                raise UniverseMismatchError("constraint concept on a different universe")
            e = float(eps)
            if not 0.0 <= e <= 1.0:
                raise ValueError("constraint eps must lie in [0, 1]")
            key = concept.members
            if key in dedup:
                if e < dedup[key][1]:
                    dedup[key] = (concept, e)
            else:
                dedup[key] = (concept, e)
                order.append(key)
        self.constraints: tuple[tuple[Concept, float], ...] = tuple(dedup[k] for k in order)

    def outside_matrix(self) -> np.ndarray:
        """Row j is the indicator of the complement of concept j."""
        m = np.ones((len(self.constraints), self.universe.size), dtype=float)
        for j, (concept, _) in enumerate(self.constraints):
            if concept.members:
                m[j, sorted(concept.members)] = 0.0
        return m

    def bounds(self) -> np.ndarray:
        return np.array([eps for _, eps in self.constraints], dtype=float)

    def __len__(self):
        return len(self.constraints)


@dataclass(frozen=True)
class SolverReport:
    argmax: Dist
    value: float
    status: str  # optimal | infeasible | tolerance_reached
    iterations: int
    residual: float


def feasible(p: Dist, region: FeasibleRegion) -> bool:
    """True iff p honors every complement-mass cap within the shared slack."""
    if p.universe != region.universe:
        raise UniverseMismatchError("distribution universe differs from region")
    return all(hall(p, concept) <= eps + CMP_TOL for concept, eps in region.constraints)


def _region_residual(p: Dist, region: FeasibleRegion) -> float:
    worst = 0.0
    for concept, eps in region.constraints:
        worst = max(worst, hall(p, concept) - eps)
    return max(0.0, worst)


# ---------------------------------------------------------------------------
# dense two-phase simplex, Bland's rule
# ---------------------------------------------------------------------------

def _pivot_loop(tableau: np.ndarray, basis: list[int], eligible: int) -> int:
    """Pivot until no eligible column improves the (maximization) objective.

    The last row carries reduced costs, the last column the right-hand side.
    Bland's rule throughout: lowest-index entering column with positive
    reduced cost, lowest-index basic variable among minimum-ratio rows.
    """
    m = tableau.shape[0] - 1
    pivots = 0
    while True:
        enter = -1
        for j in range(eligible):
            if tableau[-1, j] > _PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return pivots
        best_ratio = math.inf
        leave = -1
        for i in range(m):
            coef = tableau[i, enter]
            if coef > _PIVOT_TOL:
                ratio = tableau[i, -1] / coef
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12 and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            raise ArithmeticError("unbounded objective; the simplex constraint is missing")
        piv = tableau[leave, enter]
        tableau[leave] /= piv
        col = tableau[:, enter].copy()
        col[leave] = 0.0
        tableau -= np.outer(col, tableau[leave])
        basis[leave] = enter
        pivots += 1
        if pivots > 200_000:
            raise ArithmeticError("pivot budget exceeded")


def _solve_lp(
    objective: np.ndarray,
    a_ub: np.ndarray,
    b_ub: np.ndarray,
    a_eq: np.ndarray,
    b_eq: np.ndarray,
) -> tuple[np.ndarray | None, float, str, int]:
    """Maximize objective . x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Rows with negative right-hand sides are flipped into >= rows; those and
    the equalities receive artificial variables, driven out in phase 1.
    Returns (x, value, status, pivots); x is None when infeasible.
    """
    n = objective.size
    le_rows: list[tuple[np.ndarray, float]] = []
    ge_rows: list[tuple[np.ndarray, float]] = []
    eq_rows: list[tuple[np.ndarray, float]] = []
    for row, rhs in zip(a_ub, b_ub):
        if rhs >= 0:
            le_rows.append((row, float(rhs)))
        else:
            ge_rows.append((-row, -float(rhs)))
    for row, rhs in zip(a_eq, b_eq):
        if rhs >= 0:
            eq_rows.append((row, float(rhs)))
        else:
            eq_rows.append((-row, -float(rhs)))
    n_le, n_ge, n_eq = len(le_rows), len(ge_rows), len(eq_rows)
    m = n_le + n_ge + n_eq
    n_art = n_ge + n_eq
    width = n + n_le + n_ge + n_art + 1
    tab = np.zeros((m + 1, width))
    basis: list[int] = []
    art_base = n + n_le + n_ge
    r = 0
    for row, rhs in le_rows:
        tab[r, :n] = row
        tab[r, n + r] = 1.0
        tab[r, -1] = rhs
        basis.append(n + r)
        r += 1
    art = 0
    for row, rhs in ge_rows:
        tab[r, :n] = row
        tab[r, n + n_le + (r - n_le)] = -1.0
        tab[r, art_base + art] = 1.0
        tab[r, -1] = rhs
        basis.append(art_base + art)
        art += 1
        r += 1
    for row, rhs in eq_rows:
        tab[r, :n] = row
        tab[r, art_base + art] = 1.0
        tab[r, -1] = rhs
        basis.append(art_base + art)
        art += 1
        r += 1
    eligible = n + n_le + n_ge
    pivots = 0
    if n_art:
        # phase 1: maximize minus the artificial sum, expressed through the
        # rows where artificials start basic
        for i in range(n_le, m):
            tab[-1] += tab[i]
        tab[-1, art_base:art_base + n_art] = 0.0
        pivots += _pivot_loop(tab, basis, eligible)
        if tab[-1, -1] > 1e-9:
            return None, 0.0, "infeasible", pivots
        # drive still-basic artificials out with degenerate pivots so they
        # cannot absorb constraint violations later; rows with no eligible
        # coefficient are redundant and impose nothing
        for i in range(m):
            if basis[i] >= art_base:
                for j in range(eligible):
                    if abs(tab[i, j]) > 1e-9:
                        piv = tab[i, j]
                        tab[i] /= piv
                        col = tab[:, j].copy()
                        col[i] = 0.0
                        tab -= np.outer(col, tab[i])
                        basis[i] = j
                        pivots += 1
                        break
        tab[-1, :] = 0.0
    tab[-1, :n] = objective
    for i, b in enumerate(basis):
        if tab[-1, b] != 0.0:
            tab[-1] -= tab[-1, b] * tab[i]
    pivots += _pivot_loop(tab, basis, eligible)
    x = np.zeros(n)
    for i, b in enumerate(basis):
        if b < n:
            x[b] = max(0.0, tab[i, -1])
    return x, float(objective @ x), "optimal", pivots


def _canonical_lp_solution(
    objective: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
) -> tuple[np.ndarray | None, float, int]:
    """Canonical maximizer of a linear functional over the region.

    Among all optima, mass is pushed onto the lowest-index atoms that can
    carry it: after the optimal value is known, atom weights are maximized
    one index at a time subject to staying optimal, settled atoms being
    substituted out of the constraints.
    """
    n = objective.size
    ones = np.ones((1, n))
    x0, value, status, pivots = _solve_lp(objective, g, h, ones, np.array([1.0]))
    if x0 is None:
        return None, 0.0, pivots
    fixed = np.zeros(n)
    h_left = h.copy()
    mass_left = 1.0
    value_left = value
    for atom in range(n):
        if mass_left <= 1e-12:
            break
        if atom == n - 1:
            fixed[atom] = mass_left
            mass_left = 0.0
            break
        cols = np.arange(atom, n)
        g_sub = g[:, cols] if g.size else np.zeros((0, cols.size))
        a_ub = np.vstack([g_sub, -objective[None, cols]])
        b_ub = np.concatenate([h_left, [-(value_left - _PIN_SLACK)]])
        probe = np.zeros(cols.size)
        probe[0] = 1.0
        xs, _, st, pv = _solve_lp(
            probe, a_ub, b_ub, np.ones((1, cols.size)), np.array([mass_left])
        )
        pivots += pv
        take = float(x0[atom]) if xs is None else float(xs[0])
        take = min(max(take, 0.0), mass_left)
        fixed[atom] = take
        mass_left = max(0.0, mass_left - take)
        value_left -= objective[atom] * take
        if g.size:
            h_left = h_left - g[:, atom] * take
    total = float(np.sum(fixed))
    if abs(total - 1.0) > 1e-13 and total > 0:
        fixed = fixed / total
    return fixed, float(objective @ fixed), pivots


def max_out_of_sample(region: FeasibleRegion, sample: Sample) -> SolverReport:
    """Maximize the mass placed outside the sample points, exactly.

    A linear program over the region; ties among optimal vertices are broken
    by pushing mass onto the lowest-index atoms that can carry it.
    """
    if sample.universe != region.universe:
        raise UniverseMismatchError("sample universe differs from region")
    n = region.universe.size
    objective = np.ones(n)
    if sample.points:
        objective[np.fromiter(sample.atom_set(), dtype=int)] = 0.0
    g = region.outside_matrix() if len(region) else np.zeros((0, n))
    h = region.bounds()
    x, value, pivots = _canonical_lp_solution(objective, g, h)
    if x is None:
        return SolverReport(Dist.uniform(region.universe), 0.0, "infeasible", pivots, math.inf)
    dist = Dist(region.universe, x)
    return SolverReport(dist, value, "optimal", pivots, _region_residual(dist, region))


# ---------------------------------------------------------------------------
# concave information objectives via dual ascent
# ---------------------------------------------------------------------------

def _inner_shannon(c: np.ndarray) -> np.ndarray:
    z = -c
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


def _inner_renyi(c: np.ndarray, alpha: float) -> np.ndarray:
    """argmax of F(p) - c . p over the simplex for the Renyi power objective.

    alpha < 1 maximizes the concave sum p^alpha; alpha > 1 maximizes the
    Renyi entropy by minimizing the convex power sum.  Either way the
    stationarity condition is solved per atom after a bisection on the
    simplex multiplier.
    """
    n = c.size
    if alpha < 1.0:
        expo = 1.0 / (1.0 - alpha)
        base = -float(np.min(c))

        def mass(t: float) -> float:
            return float(np.sum((alpha / (c + base + t)) ** expo))

        hi = 1.0
        while mass(hi) > 1.0:
            hi *= 2.0
            if hi > 1e300:
                break
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= 0.0:
                break
            if mass(mid) > 1.0:
                lo = mid
            else:
                hi = mid
        p = (alpha / (c + base + 0.5 * (lo + hi))) ** expo
        return p / p.sum()
    expo = 1.0 / (alpha - 1.0)

    def mass(mu: float) -> float:
        root = np.maximum(0.0, (mu - c) / alpha)
        return float(np.sum(root**expo))

    lo = float(np.min(c))
    hi = float(np.max(c)) + alpha * 2.0
    while mass(hi) < 1.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mass(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    p = np.maximum(0.0, (0.5 * (lo + hi) - c) / alpha) ** expo
    total = p.sum()
    if total <= 0.0:
        return np.full(n, 1.0 / n)
    return p / total


def _common_core_anchor(region: FeasibleRegion) -> np.ndarray | None:
    """Uniform distribution on the intersection of all constraint concepts.

    Such a point satisfies every complement-mass cap with zero outside mass,
    which makes it a safe blending target; None when the intersection is
    empty.
    """
    common = frozenset(range(region.universe.size))
    for concept, _ in region.constraints:
        common &= concept.members
    if not common:
        return None
    w = np.zeros(region.universe.size)
    w[sorted(common)] = 1.0 / len(common)
    return w


def _dual_ascent(
    region: FeasibleRegion,
    inner: Callable[[np.ndarray], np.ndarray],
    dual_value: Callable[[np.ndarray, np.ndarray], float],
    primal_value: Callable[[np.ndarray], float],
    use_newton: bool,
) -> tuple[np.ndarray, int, float, str]:
    """Minimize the convex dual over nonnegative multipliers.

    The inner oracle returns the primal maximizer for penalties
    c = M^T lambda; multiplier steps are projected Newton (Shannon) or
    projected gradient, both safeguarded by a backtracking line search.
    The final iterate is blended just inside the feasible set when it
    overshoots, and the reported residual combines the remaining violation
    with the duality gap, a genuine optimality certificate.
    """
    m = len(region)
    n = region.universe.size
    if m == 0:
        p = inner(np.zeros(n))
        return p, 0, 0.0, "optimal"
    mat = region.outside_matrix()
    bound = region.bounds()
    lam = np.zeros(m)

    def evaluate(lam_: np.ndarray):
        p = inner(mat.T @ lam_)
        return dual_value(lam_, p), p, bound - mat @ p

    def residual_of(lam_: np.ndarray, slack_: np.ndarray) -> float:
        violation = float(np.max(np.maximum(0.0, -slack_)))
        comp = float(np.max(np.abs(lam_ * slack_)))
        return max(violation, comp)

    g_val, p, slack = evaluate(lam)
    iterations = 0
    best_residual = math.inf
    stagnant = 0
    for iterations in range(1, _MAX_ITER + 1):
        residual = residual_of(lam, slack)
        if residual <= _RESIDUAL_TOL:
            break
        if residual < best_residual - 1e-16:
            best_residual = residual
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= 50:
                break
        grad = slack  # d(dual)/d(lambda)
        if use_newton:
            cov = (mat * p[None, :]) @ mat.T - np.outer(mat @ p, mat @ p)
            free = ~((lam <= 0.0) & (grad > 0.0))
            direction = -grad.copy()
            if np.any(free):
                hess = cov[np.ix_(free, free)] + 1e-12 * np.eye(int(np.sum(free)))
                try:
                    direction[free] = -np.linalg.solve(hess, grad[free])
                except np.linalg.LinAlgError:
                    pass
        else:
            direction = -grad
        slope = float(direction @ grad)
        t = 1.0
        accepted = False
        for _ in range(60):
            cand = np.maximum(0.0, lam + t * direction)
            cand_val, cand_p, cand_slack = evaluate(cand)
            if cand_val <= g_val + 1e-4 * t * slope or cand_val < g_val - 1e-15:
                moved = not np.array_equal(cand, lam)
                lam, g_val, p, slack = cand, cand_val, cand_p, cand_slack
                accepted = moved
                break
            t *= 0.5
        if not accepted:
            break
    violation = float(np.max(np.maximum(0.0, -slack)))
    if violation > 0.0:
        anchor = _common_core_anchor(region)
        if anchor is not None:
            outside = mat @ p
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(outside > 0, 1.0 - bound / outside, 0.0)
            theta = min(1.0, max(0.0, float(np.max(ratios))) * (1.0 + 1e-12) + 1e-15)
            p = (1.0 - theta) * p + theta * anchor
            slack = bound - mat @ p
            violation = float(np.max(np.maximum(0.0, -slack)))
    gap = max(0.0, g_val - primal_value(p))
    residual = max(violation, gap)
    status = "optimal" if residual <= _RESIDUAL_TOL else "tolerance_reached"
    return p, iterations, residual, status


def max_entropy(region: FeasibleRegion) -> SolverReport:
    """Maximize Shannon entropy over the region by Lagrangian dual ascent.

    The inner maximizer is the exponential-family closed form
    p proportional to exp(-sum_T lambda_T 1{x outside T}).
    """
    mat = region.outside_matrix() if len(region) else None

    def dual_value(lam: np.ndarray, p: np.ndarray) -> float:
        z = -(mat.T @ lam)
        zmax = float(z.max())
        return zmax + math.log(float(np.sum(np.exp(z - zmax)))) + float(lam @ region.bounds())

    def primal_value(p: np.ndarray) -> float:
        w = p[p > 0]
        return float(np.sum(-w * np.log(w)))

    p, iterations, residual, status = _dual_ascent(
        region, _inner_shannon, dual_value, primal_value, use_newton=True
    )
    dist = Dist(region.universe, p / p.sum())
    return SolverReport(dist, shannon_entropy(dist), status, iterations, residual)


def _max_renyi(region: FeasibleRegion, alpha: float) -> SolverReport:
    sign = 1.0 if alpha < 1.0 else -1.0
    mat = region.outside_matrix() if len(region) else None

    def inner(c: np.ndarray) -> np.ndarray:
        return _inner_renyi(c, alpha)

    def dual_value(lam: np.ndarray, p: np.ndarray) -> float:
        c = mat.T @ lam
        return sign * float(np.sum(p**alpha)) - float(c @ p) + float(lam @ region.bounds())

    def primal_value(p: np.ndarray) -> float:
        return sign * float(np.sum(p**alpha))

    p, iterations, residual, status = _dual_ascent(
        region, inner, dual_value, primal_value, use_newton=False
    )
    dist = Dist(region.universe, p / p.sum())
    return SolverReport(dist, info(InfoMeasure.renyi(alpha), dist), status, iterations, residual)


def max_info(measure: InfoMeasure, region: FeasibleRegion, sample: Sample | None = None) -> SolverReport:
    """Dispatch on the information functional being maximized."""
    if measure.kind == "out_of_sample":
        if sample is None:
            raise ValueError("out-of-sample objective needs a sample")
        return max_out_of_sample(region, sample)
    if measure.kind == "shannon":
        return max_entropy(region)
    return _max_renyi(region, measure.alpha)


def solver_report_to_json(report: SolverReport) -> dict:
    from .measures import dist_to_json

    return {
        "argmax": dist_to_json(report.argmax),
        "value": report.value,
        "status": report.status,
        "iterations": report.iterations,
        "residual": report.residual,
    }
