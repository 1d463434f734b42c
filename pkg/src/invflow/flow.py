"""Extended Ricci flow ``u' = Kbar - K(u)`` and Newton refinement.

The right-hand side uses the extended curvature, so a step may leave the set
of true triangulations and come back; nothing special happens at the
boundary.  K is continuous but not Lipschitz there, which rules out implicit
schemes gaining anything; only explicit integrators are offered.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .curvature import assemble_jacobian
from .errors import (
    InsufficientSamples,
    LineSearchStall,
    NonFiniteState,
    NotConverged,
    OutsideOmega,
)
from .geometry import as_weights
from .potential import CurvatureTarget, integrate_segment
from .surface import TriangulatedSurface

log = logging.getLogger(__name__)

METHODS = ("explicit-euler", "rk4", "newton-hybrid")


class FlowStatus(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_TIME = "MaxTimeReached"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class FlowConfig:
    target: CurvatureTarget
    dt: float = 0.01
    t_max: float = 200.0
    residual_tol: float = 1e-10
    method: str = "rk4"
    normalize: bool = True
    record_every: int = 1
    record_potential: bool = False
    max_halvings: int = 20
    newton_max_iters: int = 20

    def __post_init__(self):
        if not isinstance(self.target, CurvatureTarget):
            object.__setattr__(self, "target", CurvatureTarget(self.target))
        if not 0 < self.dt <= 0.5:
            raise ValueError(f"dt must lie in (0, 0.5], got {self.dt}")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.residual_tol < 1e-13:
            raise ValueError("residual_tol below 1e-13 is not attainable in double precision")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class FlowSample:
    t: float
    u: np.ndarray
    K: np.ndarray
    residual: float
    in_omega: bool
    potential: float | None = None


@dataclass
class FlowTrajectory:
    samples: list[FlowSample] = field(default_factory=list)
    status: FlowStatus = FlowStatus.MAX_TIME
    steps: int = 0
    halvings: int = 0
    newton_iterations: int = 0
    dt_final: float = float("nan")

    @property
    def final(self) -> FlowSample:
        return self.samples[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s.residual for s in self.samples])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.u for s in self.samples])

    @property
    def K(self) -> np.ndarray:
        return np.array([s.K for s in self.samples])

    def final_radii(self, normalize: bool = True) -> np.ndarray:
        u = self.final.u
        return np.exp(u - u.mean()) if normalize else np.exp(u)


class _System:
    """Per-face data bound once so the stepping loop calls the kernels directly."""

    def __init__(self, surface: TriangulatedSurface, I, kbar):
        self.surface = surface
        self.tri = surface.face_array
        self.w = as_weights(surface, I).on_faces(surface)
        self.n = surface.n_vertices
        self.kbar = np.asarray(kbar, dtype=float)

    def K(self, u):
        return kernels.curvature(np.exp(u), self.tri, self.w, self.n)

    def rhs(self, u):
        return self.kbar - self.K(u)

    def in_omega(self, u) -> bool:
        return bool(np.all(kernels.face_in_delta(np.exp(u), self.tri, self.w)))

    def jacobian(self, u):
        return assemble_jacobian(self.surface, kernels.face_jacobians(np.exp(u), self.tri, self.w))

    def segment(self, a, b, tol):
        return integrate_segment(self.surface, self.w, a, b, self.kbar, tol)


def _step(sys: _System, u, dt, method, f0=None):
    f0 = sys.rhs(u) if f0 is None else f0
    if method == "explicit-euler":
        return u + dt * f0
    k2 = sys.rhs(u + 0.5 * dt * f0)
    k3 = sys.rhs(u + 0.5 * dt * k2)
    k4 = sys.rhs(u + dt * k3)
    return u + dt / 6.0 * (f0 + 2.0 * k2 + 2.0 * k3 + k4)


def flow_step(surface: TriangulatedSurface, I, u, dt: float, target, method: str = "rk4") -> np.ndarray:
    """One explicit step of ``u' = Kbar - K(u)``; ``newton-hybrid`` steps like rk4."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    kbar = target.values if isinstance(target, CurvatureTarget) else target
    sys = _System(surface, I, kbar)
    out = _step(sys, np.asarray(u, dtype=float), dt, "explicit-euler" if method == "explicit-euler" else "rk4")
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("flow step produced a non-finite state", last_good=np.asarray(u, dtype=float))
    return out


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residual: float
    history: list[float]


def _newton(sys: _System, u, max_iters: int, tol: float) -> NewtonResult:
    u = np.asarray(u, dtype=float).copy()
    g = sys.K(u) - sys.kbar
    res = float(np.abs(g).max())
    history = [res]
    if res <= tol:
        return NewtonResult(u, 0, res, history)
    if not sys.in_omega(u):
        raise OutsideOmega("Newton refinement needs a starting metric inside Omega")
    ones = np.ones((sys.n, sys.n))
    it = 0
    while it < max_iters and res > tol:
        it += 1
        L = sys.jacobian(u)
        delta = np.linalg.solve(L + ones, -g)
        slope = float(np.dot(g, delta))
        alpha = 1.0
        while True:
            cand = u + alpha * delta
            if sys.in_omega(cand):
                g_new = sys.K(cand) - sys.kbar
                res_new = float(np.abs(g_new).max())
                dF = sys.segment(u, cand, max(1e-16, 1e-6 * abs(alpha * slope)))
                # once the decrease is below what the quadrature resolves, fall back on the residual
                if dF <= 1e-4 * alpha * slope or (abs(dF) < 1e-13 and res_new < res):
                    break
            alpha *= 0.5
            if alpha < 1e-10:
                raise LineSearchStall(f"no acceptable Newton step at residual {res:.3e}")
        u, g, res = cand, g_new, res_new
        history.append(res)
    return NewtonResult(u, it, res, history)


def newton_refine(
    surface: TriangulatedSurface, I, u, target, max_iters: int = 20, tol: float = 1e-12
) -> NewtonResult:
    """Damped Newton on the convex potential, restricted to sum(delta)=0.

    The Hessian is the curvature Jacobian L whose kernel is spanned by the
    all-ones vector, so ``L + 1 1^T`` is invertible and its solution against
    a gradient orthogonal to 1 is the minimum-norm Newton step.
    """
    kbar = target.values if isinstance(target, CurvatureTarget) else np.asarray(target, dtype=float)
    return _newton(_System(surface, I, kbar), u, max_iters, tol)


def run_flow(surface: TriangulatedSurface, I, metric0, config: FlowConfig) -> FlowTrajectory:
    """Integrate the extended flow from any positive radii until converged or ``t_max``."""
    sys = _System(surface, I, config.target.values)
    r0 = np.asarray(getattr(metric0, "radii", metric0), dtype=float)
    if r0.shape != (sys.n,) or not np.all(r0 > 0):
        raise ValueError("initial radii must be a positive vector with one entry per vertex")
    u = np.log(r0)
    usum = float(u.sum())
    method = config.method
    stepper = "explicit-euler" if method == "explicit-euler" else "rk4"
    traj = FlowTrajectory()
    dt = config.dt
    t = 0.0
    K = sys.K(u)
    g = sys.kbar - K
    res = float(np.abs(g).max())
    inside = sys.in_omega(u)
    potential = 0.0 if config.record_potential else None
    last_rec_u = u

    def record(t, u, K, res, inside):
        nonlocal potential, last_rec_u
        if config.record_potential:
            potential += sys.segment(last_rec_u, u, 1e-12)
            last_rec_u = u
        traj.samples.append(FlowSample(t, u.copy(), K.copy(), res, inside, potential))

    record(t, u, K, res, inside)
    inside_streak = int(inside)
    step = 0
    while res > config.residual_tol and t < config.t_max - 1e-12:
        h = min(dt, config.t_max - t)
        halvings = 0
        while True:
            u_new = _step(sys, u, h, stepper, g)
            if config.normalize:
                u_new = u_new - (u_new.sum() - usum) / sys.n
            if np.all(np.isfinite(u_new)):
                K_new = sys.K(u_new)
                g_new = sys.kbar - K_new
                # trapezoid estimate of the potential change over the step
                dF = -0.5 * float(np.dot(g + g_new, u_new - u))
                if dF <= 1e-14 * (1.0 + float(np.dot(g, g))):
                    break
            halvings += 1
            traj.halvings += 1
            if halvings > config.max_halvings:
                traj.status = FlowStatus.DIVERGED
                traj.dt_final = h
                if traj.samples[-1].t != t:
                    record(t, u, K, res, inside)
                log.warning("flow aborted at t=%g: no acceptable step after %d halvings", t, halvings - 1)
                return traj
            h *= 0.5
            dt = h
        u, K, g = u_new, K_new, g_new
        t += h
        step += 1
        res = float(np.abs(g).max())
        inside = sys.in_omega(u)
        inside_streak = inside_streak + 1 if inside else 0
        if step % config.record_every == 0 or res <= config.residual_tol:
            record(t, u, K, res, inside)
        if method == "newton-hybrid" and inside_streak >= 10 and res < 1e-3:
            try:
                nr = _newton(sys, u, config.newton_max_iters, min(config.residual_tol, 1e-12))
            except (LineSearchStall, OutsideOmega) as exc:
                log.info("Newton refinement failed at t=%g (%s); continuing the flow", t, exc)
                inside_streak = 0
                continue
            traj.newton_iterations += nr.iterations
            if nr.residual <= config.residual_tol:
                u = nr.u
                if config.normalize:
                    u = u - (u.sum() - usum) / sys.n
                K = sys.K(u)
                g = sys.kbar - K
                res = float(np.abs(g).max())
                record(t, u, K, res, sys.in_omega(u))
                break
            inside_streak = 0
    traj.steps = step
    traj.dt_final = dt
    if traj.samples[-1].t != t or traj.samples[-1].residual != res:
        record(t, u, K, res, inside)
    traj.status = FlowStatus.CONVERGED if res <= config.residual_tol else FlowStatus.MAX_TIME
    return traj


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    r_squared: float
    n_samples: int


def estimate_rate(
    trajectory: FlowTrajectory, lo: float = 1e-10, hi: float = 1e-3, min_samples: int = 10
) -> RateEstimate:
    """Least-squares slope of ln(residual) against t over the tail window (lo, hi)."""
    if trajectory.status != FlowStatus.CONVERGED:
        raise NotConverged(f"trajectory status is {trajectory.status.value}")
    t = trajectory.times
    res = trajectory.residuals
    sel = (res > lo) & (res < hi)
    if sel.sum() < min_samples:
        raise InsufficientSamples(f"only {int(sel.sum())} samples with residual in ({lo:g}, {hi:g})")
    x = t[sel]
    y = np.log(res[sel])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return RateEstimate(rate=-float(coef[0]), r_squared=r2, n_samples=int(sel.sum()))


def radius_bound_violation(trajectory: FlowTrajectory, kbar) -> float:
    """Largest excess of |u(t) - u(0)| over c*t, with c the largest |Kbar - K| seen."""
    U = trajectory.u
    c = float(np.max(np.abs(np.asarray(kbar)[None, :] - trajectory.K)))
    t = trajectory.times
    dev = np.abs(U - U[0][None, :]).max(axis=1)
    return float(np.max(dev - c * t))


__all__ = [
    "FlowConfig",
    "FlowSample",
    "FlowStatus",
    "FlowTrajectory",
    "NewtonResult",
    "RateEstimate",
    "flow_step",
    "run_flow",
    "newton_refine",
    "estimate_rate",
    "radius_bound_violation",
]
