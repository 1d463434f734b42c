import math

import numpy as np
import pytest

from conftest import sample_outside_omega
from invflow.curvature import (
    curvature_bounds,
    curvature_extended,
    curvature_jacobian,
    in_omega,
    restricted_spectrum,
)
from invflow.errors import InsufficientSamples, NotConverged, OutsideOmega
from invflow.flow import (
    FlowConfig,
    FlowSample,
    FlowStatus,
    FlowTrajectory,
    estimate_rate,
    flow_step,
    newton_refine,
    radius_bound_violation,
    run_flow,
)
from invflow.potential import CurvatureTarget, PotentialSpec, potential_value

R0 = [1.5, 0.8, 1.1, 0.9]
PI4 = np.full(4, math.pi)


@pytest.fixture(scope="module")
def tet_run():
    from invflow.fixtures import tetrahedron

    s = tetrahedron()
    return s, run_flow(s, 1.0, R0, FlowConfig(target=PI4, record_potential=True))


def test_config_guards():
    with pytest.raises(ValueError):
        FlowConfig(target=PI4, dt=0.6)
    with pytest.raises(ValueError):
        FlowConfig(target=PI4, residual_tol=1e-14)
    with pytest.raises(ValueError):
        FlowConfig(target=PI4, method="leapfrog")


def test_equilibrium_is_fixed(tet):
    for method in ("explicit-euler", "rk4"):
        for dt in (0.01, 0.3):
            u = flow_step(tet, 1.0, np.zeros(4), dt, PI4, method)
            np.testing.assert_allclose(u, 0, atol=1e-14)


def test_euler_is_first_order(tet):
    u0 = np.log(R0)
    exact = u0.copy()
    for _ in range(1000):
        exact = flow_step(tet, 1.0, exact, 1e-4, PI4, "rk4")
    errs = []
    for n in (10, 20):
        u = u0.copy()
        for _ in range(n):
            u = flow_step(tet, 1.0, u, 0.1 / n, PI4, "explicit-euler")
        errs.append(np.abs(u - exact).max())
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)


def test_tetrahedron_converges_to_symmetric(tet_run):
    s, traj = tet_run
    assert traj.status == FlowStatus.CONVERGED
    assert traj.final.residual <= 1e-10
    np.testing.assert_allclose(traj.final_radii(), 1.0, atol=1e-9)
    t = traj.times
    assert np.all(np.diff(t) > 0)


def test_normalized_flow_keeps_log_sum(tet_run):
    _, traj = tet_run
    sums = traj.u.sum(axis=1)
    assert np.max(np.abs(sums - sums[0])) <= 1e-9
    prods = np.exp(sums)
    assert np.max(np.abs(prods / prods[0] - 1)) <= 1e-8


def test_log_sum_conserved_without_projection(tet):
    traj = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, normalize=False, t_max=10.0))
    sums = traj.u.sum(axis=1)
    assert np.max(np.abs(sums - sums[0])) <= 1e-9


def test_potential_non_increasing(tet_run):
    s, traj = tet_run
    F = np.array([x.potential for x in traj.samples])
    assert np.all(np.diff(F) <= 1e-9)
    # recorded values are the potential relative to the start
    spec = PotentialSpec.for_surface(s, PI4, base_point=traj.samples[0].u)
    assert F[-1] == pytest.approx(potential_value(s, 1.0, traj.final.u, spec), abs=1e-9)


def test_curvature_and_radius_bounds_along_flow(tet_run):
    s, traj = tet_run
    lo, hi = curvature_bounds(s)
    K = traj.K
    assert np.all(K > lo) and np.all(K <= hi)
    assert radius_bound_violation(traj, PI4) <= 1e-12


def test_rate_matches_linearization(tet_run):
    s, traj = tet_run
    est = estimate_rate(traj)
    assert est.r_squared > 0.99
    lam = restricted_spectrum(curvature_jacobian(s, 1.0, traj.final_radii()))[0]
    assert abs(est.rate - lam) <= 0.2 * lam


def test_rate_errors(tet):
    flat = FlowTrajectory(
        samples=[FlowSample(float(t), np.zeros(4), PI4, 1e-5, True) for t in range(20)],
        status=FlowStatus.MAX_TIME,
    )
    with pytest.raises(NotConverged):
        estimate_rate(flat)
    short = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, method="newton-hybrid"))
    assert short.status == FlowStatus.CONVERGED
    with pytest.raises(InsufficientSamples):
        estimate_rate(short, min_samples=10_000)


def test_torus_outside_omega_reenters(torus, rng):
    for r0 in sample_outside_omega(torus, 2.0, rng, 3):
        traj = run_flow(torus, 2.0, r0, FlowConfig(target=np.zeros(7)))
        flags = [x.in_omega for x in traj.samples]
        assert not flags[0] and flags[-1]
        assert traj.status == FlowStatus.CONVERGED
        r = traj.final_radii()
        np.testing.assert_allclose(r / r.mean(), 1.0, atol=1e-9)


def test_degenerate_start_on_separated_edge(tet):
    from conftest import separated_edge_weights
    from invflow.geometry import degenerate_radius

    w = separated_edge_weights(tet)
    rbar = degenerate_radius(1.0, 1.0, (3.0, 0.5, 0.5))
    r0 = np.array([rbar * 0.9, 1.0, 1.0, 1.0])
    assert not in_omega(tet, w, r0)
    target = curvature_extended(tet, w, np.array([1.2, 1.0, 1.0, 0.8]))
    traj = run_flow(tet, w, r0, FlowConfig(target=target))
    assert traj.status == FlowStatus.CONVERGED
    assert not traj.samples[0].in_omega and traj.final.in_omega


def test_newton_from_flow_output(tet):
    traj = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, residual_tol=1e-6))
    res = newton_refine(tet, 1.0, traj.final.u, PI4)
    assert res.residual < 1e-12
    assert res.iterations <= 5


def test_newton_at_equilibrium(tet):
    assert newton_refine(tet, 1.0, np.zeros(4), PI4).iterations == 0


def test_newton_needs_omega(tet):
    from conftest import separated_edge_weights

    w = separated_edge_weights(tet)
    with pytest.raises(OutsideOmega):
        newton_refine(tet, w, np.log([0.3, 1, 1, 1]), CurvatureTarget.constant(tet))


def test_newton_result_independent_of_start(octa, rng):
    w = rng.uniform(0, 1, octa.n_edges)
    target = curvature_extended(octa, w, np.exp(rng.uniform(-0.5, 0.5, 6)))
    outs = []
    for _ in range(2):
        traj = run_flow(octa, w, np.exp(rng.uniform(-1, 1, 6)), FlowConfig(target=target, method="newton-hybrid"))
        assert traj.status == FlowStatus.CONVERGED
        outs.append(traj.final_radii())
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-9)


def test_max_time_status(tet):
    traj = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, t_max=0.5))
    assert traj.status == FlowStatus.MAX_TIME
    assert traj.final.t == pytest.approx(0.5)


def test_record_every_thins_samples(tet):
    full = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, t_max=1.0))
    thin = run_flow(tet, 1.0, R0, FlowConfig(target=PI4, t_max=1.0, record_every=10))
    assert len(thin.samples) < len(full.samples) / 5
    np.testing.assert_allclose(thin.final.u, full.final.u, atol=1e-14)
