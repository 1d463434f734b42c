import math

import numpy as np
import pytest

from conftest import sample_omega, separated_edge_weights
from invflow.admissibility import (
    boundary_curvature_gap,
    check_necessary,
    constant_curvature_condition,
    degenerate_limit_probe,
    halfspace_margin,
    halfspace_rhs,
    halfspace_rhs_phi,
    subset_table,
    thurston_condition,
)
from invflow.curvature import curvature_extended
from invflow.errors import BadTotalCurvature, EmptyOrFullSubset, TooManySubsets
from invflow.fixtures import FIXTURES, torus_grid
from invflow.geometry import InversiveWeights
from invflow.surface import proper_subsets

PI4 = np.full(4, math.pi)


def test_singleton_examples(tet):
    rep = halfspace_margin(tet, 1.0, (1,), PI4)
    assert rep.rhs == pytest.approx(-math.pi)
    assert rep.lhs == pytest.approx(math.pi)
    assert rep.margin == pytest.approx(2 * math.pi) and rep.satisfied
    rep = halfspace_margin(tet, 0.0, (1,), PI4)
    assert rep.rhs == pytest.approx(math.pi / 2)
    assert rep.margin == pytest.approx(math.pi / 2)


def test_empty_link(tet):
    rep = halfspace_margin(tet, 1.0, (1, 2, 3), PI4)
    assert rep.rhs == pytest.approx(2 * math.pi)
    assert rep.lhs == pytest.approx(3 * math.pi)
    assert rep.margin == rep.lhs - rep.rhs


def test_rejects_improper_subsets(tet):
    with pytest.raises(EmptyOrFullSubset):
        halfspace_margin(tet, 1.0, (), PI4)
    with pytest.raises(EmptyOrFullSubset):
        halfspace_margin(tet, 1.0, (1, 2, 3, 4), PI4)


def test_check_requires_total(tet):
    with pytest.raises(BadTotalCurvature):
        check_necessary(tet, 1.0, np.ones(4))


def test_budget_and_sampling():
    s = torus_grid(5, 5)
    x = np.zeros(25)
    with pytest.raises(TooManySubsets):
        check_necessary(s, 0.5, x)
    rep = check_necessary(s, 0.5, x, sample=200, seed=1)
    assert not rep.exhaustive and len(rep.reports) == 200
    again = check_necessary(s, 0.5, x, sample=200, seed=1)
    assert [r.subset for r in rep.reports] == [r.subset for r in again.reports]


def test_table_matches_direct(octa, rng):
    w = rng.uniform(0, 3, octa.n_edges)
    tab = subset_table(octa, w)
    assert tab.subsets == list(proper_subsets(6))
    x = curvature_extended(octa, w, np.exp(rng.uniform(-1, 1, 6)))
    for A, m in zip(tab.subsets, tab.margins(x)):
        assert m == pytest.approx(halfspace_margin(octa, w, A, x).margin, abs=1e-12)


def test_constructed_violation_is_reported(octa):
    x = np.full(6, 2 * math.pi / 3)
    A = (1, 2)
    rhs = halfspace_rhs(octa, 0.5, A)
    shift = (x[0] + x[1] - rhs) / 2 + 0.1
    x[[0, 1]] -= shift
    x[2:] += 2 * shift / 4
    rep = check_necessary(octa, 0.5, x)
    assert rep.verdict == "violated"
    assert A in [r.subset for r in rep.violated]


@pytest.mark.parametrize("name", ["tetrahedron", "octahedron", "torus7"])
def test_strict_margins_inside_omega(name, rng):
    s = FIXTURES[name]()
    w = rng.uniform(0, 2, s.n_edges)
    tab = subset_table(s, w)
    for r in sample_omega(s, w, rng, 30):
        assert np.all(tab.margins(curvature_extended(s, w, r)) > 0)


def test_closure_margins_everywhere(tet, octa, rng):
    for s in (tet, octa):
        w = rng.uniform(0, 5, s.n_edges)
        tab = subset_table(s, w)
        for _ in range(200):
            r = np.exp(rng.uniform(np.log(1e-8), np.log(1e3), s.n_vertices))
            assert np.all(tab.margins(curvature_extended(s, w, r)) >= -1e-9)


def test_constant_curvature_condition(tet, torus):
    assert constant_curvature_condition(tet, 1.0).verdict == "NecessaryConditionsHold"
    assert constant_curvature_condition(torus, 0.7).holds
    cc = constant_curvature_condition(tet, 1.0)
    assert cc.necessary_only


def test_weighted_variant_matches(any_surface, rng):
    s = any_surface
    phi = rng.uniform(0, math.pi / 2, s.n_edges)
    w = InversiveWeights.from_angles(s, phi)
    for A in list(proper_subsets(s.n_vertices))[:60]:
        assert halfspace_rhs(s, w, A) == pytest.approx(halfspace_rhs_phi(s, phi, A), abs=1e-12)


def test_thurston_right_angles(tet):
    # phi = pi/2 everywhere is I = 0
    reps = thurston_condition(tet, np.full(6, math.pi / 2))
    cc = constant_curvature_condition(tet, 0.0)
    for a, b in zip(reps, cc.reports):
        assert a.subset == b.subset and a.margin == pytest.approx(b.margin, abs=1e-12)


@pytest.mark.parametrize("I, A, limit", [(1.0, (1,), -math.pi), (0.0, (1,), math.pi / 2), (1.0, (1, 2), 0.0)])
def test_probe_limits(tet, I, A, limit):
    p = degenerate_limit_probe(tet, I, A, 10.0 ** -np.arange(1, 9))
    assert p.predicted == pytest.approx(limit, abs=1e-14)
    # the sums approach the limit monotonically in the tail
    d = np.abs(p.sums - limit)
    assert np.all(np.diff(d[3:]) < 0)
    assert p.extrapolated_error < 1e-4


def test_probe_rate_for_touching_circles(tet):
    # I = 1: corner angles open like sqrt(eps), so the error at eps is about 3 sqrt(8 eps)
    p = degenerate_limit_probe(tet, 1.0, (1,), [1e-8])
    assert p.final_error == pytest.approx(3 * math.sqrt(8e-8), rel=1e-3)


def test_boundary_gap(tet):
    g = boundary_curvature_gap(tet, separated_edge_weights(tet), 1, (1, 2, 3))
    assert g.degenerate_radius == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-12)
    assert g.rhs == pytest.approx(-math.pi / 3)
    assert g.gap > 0.1
