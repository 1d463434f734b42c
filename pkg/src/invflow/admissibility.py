"""Necessary conditions on curvature vectors: half-spaces over vertex subsets.

For a nonempty proper subset A of the vertices the bound is

    sum_{i in A} x_i  >  -sum_{(e, v) in Lk(A)} (pi - Lambda(I_e)) + 2 pi chi(F_A)

Every curvature vector of a true packing satisfies all of them strictly, and
every extended curvature vector satisfies their closure.  These are
necessary conditions only; the flow is the operational admissibility test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import curvature_extended, in_omega
from .errors import BadTotalCurvature, TooManySubsets
from .geometry import as_weights, degenerate_radius, lambda_clamp
from .surface import (
    TriangulatedSurface,
    as_subset,
    classify_faces,
    euler_characteristic,
    link_pairs,
    proper_subsets,
    subcomplex_euler,
)

DEFAULT_SUBSET_BUDGET = 20
CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class HalfSpaceReport:
    subset: tuple[int, ...]
    lhs: float
    rhs: float
    margin: float
    satisfied: bool


def _link_cost(surface, w, pairs) -> float:
    # pi - Lambda(I_e) summed over the link
    return sum(math.pi - lambda_clamp(w.of(surface, *e)) for e, _ in pairs)


def halfspace_rhs(surface: TriangulatedSurface, I, A) -> float:
    w = as_weights(surface, I)
    return -_link_cost(surface, w, link_pairs(surface, A)) + 2 * math.pi * subcomplex_euler(surface, A)


def halfspace_rhs_phi(surface: TriangulatedSurface, phi, A) -> float:
    """Same bound written with intersection angles ``phi`` (edge-aligned) instead of weights."""
    phi = np.broadcast_to(np.asarray(phi, dtype=float), (surface.n_edges,))
    idx = surface.edge_index
    cost = sum(math.pi - phi[idx[e]] for e, _ in link_pairs(surface, A))
    return -cost + 2 * math.pi * subcomplex_euler(surface, A)


def halfspace_margin(surface: TriangulatedSurface, I, A, x, closure: bool = False) -> HalfSpaceReport:
    sub = as_subset(surface, A)
    x = np.asarray(x, dtype=float)
    lhs = float(x[np.asarray(sub.members) - 1].sum())
    rhs = halfspace_rhs(surface, I, sub)
    margin = lhs - rhs
    ok = margin >= -CLOSURE_TOL if closure else margin > 0
    return HalfSpaceReport(sub.members, lhs, rhs, margin, ok)


@dataclass(frozen=True)
class SubsetTable:
    """Every enumerated subset with its membership row and right-hand side."""

    subsets: list[tuple[int, ...]]
    mask: np.ndarray  # (S, N) float 0/1
    rhs: np.ndarray  # (S,)
    exhaustive: bool

    def margins(self, x) -> np.ndarray:
        """Margins for one vector (N,) or a batch (m, N) -> (S,) or (m, S)."""
        x = np.asarray(x, dtype=float)
        return x @ self.mask.T - self.rhs


def subset_table(
    surface: TriangulatedSurface,
    I,
    max_subsets: int = DEFAULT_SUBSET_BUDGET,
    sample: int | None = None,
    seed: int | None = None,
) -> SubsetTable:
    """Enumerate all 2^N - 2 proper subsets when N <= ``max_subsets``.

    With ``sample`` set, draw that many random proper subsets instead
    (non-exhaustive, labelled as such).
    """
    n = surface.n_vertices
    w = as_weights(surface, I)
    if sample is not None:
        rng = np.random.default_rng(seed)
        seen = set()
        while len(seen) < sample:
            m = rng.random(n) < 0.5
            if 0 < m.sum() < n:
                seen.add(tuple(int(v) + 1 for v in np.flatnonzero(m)))
        subsets = sorted(seen)
        exhaustive = False
    else:
        if n > max_subsets:
            raise TooManySubsets(
                f"{n} vertices means {2**n - 2} subsets; raise the budget (currently N <= {max_subsets}) or sample"
            )
        subsets = list(proper_subsets(n))
        exhaustive = True
    mask = np.zeros((len(subsets), n))
    rhs = np.empty(len(subsets))
    for s, A in enumerate(subsets):
        mask[s, np.asarray(A) - 1] = 1.0
        rhs[s] = -_link_cost(surface, w, link_pairs(surface, A)) + 2 * math.pi * subcomplex_euler(surface, A)
    return SubsetTable(subsets, mask, rhs, exhaustive)


@dataclass
class NecessaryReport:
    verdict: str  # "interior", "closure" or "violated"
    reports: list[HalfSpaceReport]
    violated: list[HalfSpaceReport] = field(default_factory=list)
    exhaustive: bool = True

    @property
    def worst(self) -> HalfSpaceReport:
        return min(self.reports, key=lambda r: r.margin)


def check_necessary(
    surface: TriangulatedSurface,
    I,
    x,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    closure: bool = False,
    sample: int | None = None,
    seed: int | None = None,
    table: SubsetTable | None = None,
) -> NecessaryReport:
    """Evaluate every half-space on ``x``; violations are those failing the chosen mode."""
    x = np.asarray(x, dtype=float)
    total = 2 * math.pi * euler_characteristic(surface)
    if abs(x.sum() - total) > 1e-9:
        raise BadTotalCurvature(f"curvatures sum to {x.sum():.17g}, expected {total:.17g}")
    if table is None:
        table = subset_table(surface, I, subset_budget, sample, seed)
    margins = table.margins(x)
    lhs = margins + table.rhs
    reports = [
        HalfSpaceReport(
            A, float(l), float(r), float(m), bool(m >= -CLOSURE_TOL if closure else m > 0)
        )
        for A, l, r, m in zip(table.subsets, lhs, table.rhs, margins)
    ]
    if np.all(margins > 0):
        verdict = "interior"
    elif np.all(margins >= -CLOSURE_TOL):
        verdict = "closure"
    else:
        verdict = "violated"
    violated = [rep for rep in reports if not rep.satisfied]
    return NecessaryReport(verdict, reports, violated, table.exhaustive)


@dataclass
class ConstantCurvatureVerdict:
    holds: bool
    reports: list[HalfSpaceReport]
    violated_by: list[tuple[int, ...]]
    # the conditions are necessary only: passing them does not prove existence
    necessary_only: bool = True

    @property
    def verdict(self) -> str:
        return "NecessaryConditionsHold" if self.holds else "ViolatedBy"


def constant_curvature_condition(
    surface: TriangulatedSurface, I, subset_budget: int = DEFAULT_SUBSET_BUDGET
) -> ConstantCurvatureVerdict:
    n = surface.n_vertices
    x = np.full(n, 2 * math.pi * euler_characteristic(surface) / n)
    rep = check_necessary(surface, I, x, subset_budget)
    bad = [r.subset for r in rep.reports if not r.margin > 0]
    return ConstantCurvatureVerdict(not bad, rep.reports, bad)


def thurston_condition(surface: TriangulatedSurface, phi, subset_budget: int = DEFAULT_SUBSET_BUDGET):
    """Constant-curvature condition for intersection-angle weights, evaluated with phi directly."""
    n = surface.n_vertices
    if n > subset_budget:
        raise TooManySubsets(f"{2**n - 2} subsets exceeds the budget")
    kav = 2 * math.pi * euler_characteristic(surface) / n
    out = []
    for A in proper_subsets(n):
        lhs = kav * len(A)
        rhs = halfspace_rhs_phi(surface, phi, A)
        out.append(HalfSpaceReport(A, lhs, rhs, lhs - rhs, lhs - rhs > 0))
    return out


@dataclass
class ProbeResult:
    subset: tuple[int, ...]
    factors: np.ndarray
    sums: np.ndarray
    predicted: float
    extrapolated: float

    @property
    def final_error(self) -> float:
        return abs(float(self.sums[-1]) - self.predicted)

    @property
    def extrapolated_error(self) -> float:
        return abs(self.extrapolated - self.predicted)


def _aitken(x0: float, x1: float, x2: float) -> float:
    den = x2 - 2 * x1 + x0
    if den == 0 or not math.isfinite(den):
        return x2
    est = x2 - (x2 - x1) ** 2 / den
    # fall back when the tail is not geometric
    return est if abs(est - x2) <= 10 * abs(x2 - x1) else x2


def degenerate_limit_probe(surface: TriangulatedSurface, I, A, shrink_factors, base=None) -> ProbeResult:
    """Shrink the radii on A and track the curvature sum on A.

    Radii outside A stay at ``base`` (default 1).  The prediction is the
    right-hand side of the half-space for A.
    """
    sub = as_subset(surface, A)
    w = as_weights(surface, I)
    n = surface.n_vertices
    idx = np.asarray(sub.members) - 1
    base = np.ones(n) if base is None else np.asarray(base, dtype=float)
    factors = np.asarray(shrink_factors, dtype=float)
    sums = []
    for f in factors:
        r = base.copy()
        r[idx] = f
        sums.append(curvature_extended(surface, w, r)[idx].sum())
    sums = np.array(sums)
    predicted = halfspace_rhs(surface, w, sub)
    extrap = _aitken(*sums[-3:]) if len(sums) >= 3 else float(sums[-1])
    return ProbeResult(sub.members, factors, sums, predicted, float(extrap))


@dataclass
class BoundaryGap:
    vertex: int
    degenerate_radius: float
    curvature_limit: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.curvature_limit - self.rhs


def boundary_curvature_gap(
    surface: TriangulatedSurface, I, vertex: int, face, base=None, eps: float = 1e-12
) -> BoundaryGap:
    """Approach the boundary of Omega by separating one edge of ``face`` opposite ``vertex``.

    The radius at ``vertex`` is set just above the root where the opposite
    edge becomes as long as the two others together; all other radii stay at
    ``base``.  The resulting curvature at ``vertex`` stays strictly above the
    half-space bound for the singleton {vertex}.
    """
    w = as_weights(surface, I)
    n = surface.n_vertices
    base = np.ones(n) if base is None else np.asarray(base, dtype=float)
    j, k = (v for v in face if v != vertex)
    I_jk, I_ik, I_ij = w.of(surface, j, k), w.of(surface, vertex, k), w.of(surface, vertex, j)
    rbar = degenerate_radius(base[j - 1], base[k - 1], (I_jk, I_ik, I_ij))
    r = base.copy()
    r[vertex - 1] = rbar * (1 + eps)
    K = curvature_extended(surface, w, r)
    return BoundaryGap(vertex, rbar, float(K[vertex - 1]), halfspace_rhs(surface, w, (vertex,)))


def chi_identity_holds(surface: TriangulatedSurface, A) -> bool:
    """Whether chi(F_A) = |A| - |A_2|/2 - |A_3|/2 on this subset."""
    a1, a2, a3 = classify_faces(surface, A)
    sub = as_subset(surface, A)
    return 2 * subcomplex_euler(surface, A) == 2 * len(sub) - len(a2) - len(a3)


__all__ = [
    "HalfSpaceReport",
    "SubsetTable",
    "NecessaryReport",
    "ConstantCurvatureVerdict",
    "ProbeResult",
    "BoundaryGap",
    "halfspace_rhs",
    "halfspace_rhs_phi",
    "halfspace_margin",
    "subset_table",
    "check_necessary",
    "constant_curvature_condition",
    "thurston_condition",
    "degenerate_limit_probe",
    "boundary_curvature_gap",
    "chi_identity_holds",
    "in_omega",
]
