"""Single-triangle geometry of inversive distance circle packings.

Conventions: a triangle has corners 0, 1, 2 with radii ``(r_0, r_1, r_2)``
and weights ``(I_12, I_02, I_01)``, i.e. weight ``c`` belongs to the edge
opposite corner ``c``.  Lengths are indexed the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .errors import (
    NegativeWeight,
    NoConvergence,
    NonFiniteInput,
    NonPositiveLength,
    NonPositiveRadius,
    NotSeparated,
    OutsideDelta,
    TargetOutsideZ,
)
from .surface import TriangulatedSurface

_TRI = np.array([[0, 1, 2]], dtype=np.int64)

# margin used for strict membership in the angle range Z
Z_MARGIN = 1e-12


def _check_weights(values) -> np.ndarray:
    w = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(w)):
        raise NonFiniteInput("inversive distances must be finite")
    if np.any(w < 0):
        bad = np.flatnonzero(w < 0)
        raise NegativeWeight(f"inversive distance must be >= 0 (entries {bad.tolist()})")
    return w


def _check_radii(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise NonFiniteInput("radii must be finite")
    if np.any(r <= 0):
        raise NonPositiveRadius("radii must be strictly positive")
    return r


@dataclass(frozen=True)
class InversiveWeights:
    """Per-edge inversive distances aligned with ``surface.edges``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_weights(self.values))

    @classmethod
    def uniform(cls, surface: TriangulatedSurface, value: float) -> "InversiveWeights":
        return cls(np.full(surface.n_edges, float(value)))

    @classmethod
    def from_mapping(
        cls, surface: TriangulatedSurface, mapping: Mapping[tuple[int, int], float], default: float | None = None
    ) -> "InversiveWeights":
        vals = np.full(surface.n_edges, np.nan if default is None else float(default))
        idx = surface.edge_index
        for (a, b), v in mapping.items():
            e = (min(a, b), max(a, b))
            if e not in idx:
                raise KeyError(f"edge {e} is not an edge of the surface")
            if v < 0:
                raise NegativeWeight(f"inversive distance on edge {e} is {v} < 0")
            vals[idx[e]] = float(v)
        if np.any(np.isnan(vals)):
            missing = [surface.edges[n] for n in np.flatnonzero(np.isnan(vals))]
            raise KeyError(f"no inversive distance for edges {missing} and no default given")
        return cls(vals)

    @classmethod
    def from_angles(cls, surface: TriangulatedSurface, phi) -> "InversiveWeights":
        """Thurston weights: ``I = cos(phi)`` with ``phi`` in [0, pi/2]."""
        phi = np.broadcast_to(np.asarray(phi, dtype=float), (surface.n_edges,))
        if np.any(phi < 0) or np.any(phi > np.pi / 2):
            raise ValueError("intersection angles must lie in [0, pi/2]")
        return cls(np.clip(np.cos(phi), 0.0, 1.0))

    def on_faces(self, surface: TriangulatedSurface) -> np.ndarray:
        return self.values[surface.face_edge_array]

    def of(self, surface: TriangulatedSurface, a: int, b: int) -> float:
        return float(self.values[surface.edge_index[(min(a, b), max(a, b))]])


def as_weights(surface: TriangulatedSurface, I) -> InversiveWeights:
    if isinstance(I, InversiveWeights):
        w = I
    elif np.isscalar(I):
        w = InversiveWeights.uniform(surface, float(I))
    elif isinstance(I, Mapping):
        w = InversiveWeights.from_mapping(surface, I)
    else:
        w = InversiveWeights(np.asarray(I, dtype=float))
    if w.values.shape != (surface.n_edges,):
        raise ValueError(f"expected {surface.n_edges} edge weights, got shape {w.values.shape}")
    return w


@dataclass(frozen=True)
class TriangleConfig:
    radii: tuple[float, float, float]
    inversive: tuple[float, float, float]

    def __post_init__(self):
        r = _check_radii(self.radii)
        w = _check_weights(self.inversive)
        if r.shape != (3,) or w.shape != (3,):
            raise ValueError("a triangle needs three radii and three weights")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "inversive", tuple(float(x) for x in w))

    @property
    def r(self) -> np.ndarray:
        return np.array(self.radii)

    @property
    def w(self) -> np.ndarray:
        return np.array([self.inversive])

    def lengths(self) -> np.ndarray:
        return kernels.face_lengths(self.r, _TRI, self.w)[0]

    def angles(self) -> np.ndarray:
        return kernels.face_angles(self.r, _TRI, self.w)[0]


def edge_length(r_a: float, r_b: float, I_ab: float) -> float:
    if not (r_a > 0 and r_b > 0):
        raise NonPositiveRadius(f"radii must be positive, got {r_a}, {r_b}")
    if I_ab < 0:
        raise NegativeWeight(f"inversive distance {I_ab} < 0")
    return math.sqrt(r_a * r_a + r_b * r_b + 2.0 * r_a * r_b * I_ab)


def lambda_clamp(x):
    """arccos extended by pi below -1 and 0 above 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise NonFiniteInput("lambda_clamp of NaN")
    out = np.arccos(np.clip(arr, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def cosine_ratios(lengths) -> np.ndarray:
    """Law-of-cosines ratio at each corner, the argument fed to ``lambda_clamp``."""
    a, b, c = (float(v) for v in lengths)
    return np.array(
        [
            (b * b + c * c - a * a) / (2 * b * c),
            (a * a + c * c - b * b) / (2 * a * c),
            (a * a + b * b - c * c) / (2 * a * b),
        ]
    )


def generalized_angles(lengths) -> np.ndarray:
    """Inner angles of a generalised Euclidean triangle.

    Equal to ``lambda_clamp(cosine_ratios(lengths))`` but evaluated with
    Kahan's area formula, so the three angles add to pi to rounding even for
    needle-shaped triangles.
    """
    L = np.asarray(lengths, dtype=float)
    if L.shape != (3,):
        raise ValueError("need three lengths")
    if not np.all(L > 0):
        raise NonPositiveLength(f"lengths must be positive, got {L.tolist()}")
    return kernels.angles_from_lengths(L[None, :])[0]


def in_delta(config: TriangleConfig) -> bool:
    return bool(kernels.face_in_delta(config.r, _TRI, config.w)[0])


def triangle_angle_jacobian(config: TriangleConfig) -> np.ndarray:
    """d(theta_0, theta_1, theta_2)/d(u_0, u_1, u_2) with ``u = ln r``."""
    if not in_delta(config):
        raise OutsideDelta(f"radii {config.radii} violate a triangle inequality")
    return kernels.face_jacobians(config.r, _TRI, config.w)[0]


def angle_bounds(inversive) -> np.ndarray:
    """Upper bounds pi - Lambda(I_opposite) of the corner angles."""
    w = _check_weights(inversive)
    return np.pi - lambda_clamp(w)


def degenerate_radius(r_j: float, r_k: float, inversive) -> float:
    """Radius at corner 0 making the edge opposite it exactly as long as the other two together.

    ``inversive`` is ``(I_jk, I_ik, I_ij)``; requires ``I_jk > 1``.
    """
    I_jk, I_ik, I_ij = (float(x) for x in _check_weights(inversive))
    if not (r_j > 0 and r_k > 0):
        raise NonPositiveRadius("radii must be positive")
    if I_jk <= 1.0:
        raise NotSeparated(f"I_jk = {I_jk} <= 1: the triangle only degenerates as r_i -> 0")
    l_jk = edge_length(r_j, r_k, I_jk)

    def f(t):
        return (
            math.sqrt(t * t + r_j * r_j + 2 * t * r_j * I_ij)
            + math.sqrt(t * t + r_k * r_k + 2 * t * r_k * I_ik)
            - l_jk
        )

    lo, hi = 0.0, l_jk
    while hi - lo > 1e-14 * l_jk:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    l1 = math.sqrt(t * t + r_j * r_j + 2 * t * r_j * I_ij)
    l2 = math.sqrt(t * t + r_k * r_k + 2 * t * r_k * I_ik)
    t_new = t - f(t) / ((t + r_j * I_ij) / l1 + (t + r_k * I_ik) / l2)
    if abs(f(t_new)) <= abs(f(t)) and t_new > 0:
        t = t_new
    return t


def in_z(target, inversive, margin: float = Z_MARGIN) -> bool:
    th = np.asarray(target, dtype=float)
    bounds = angle_bounds(inversive)
    return bool(
        abs(th.sum() - np.pi) <= 1e-9 and np.all(th > margin) and np.all(th < bounds - margin)
    )


def _plane_basis():
    # orthonormal basis of {u : sum(u) = 0}
    e1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    e2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6)
    return e1, e2


def _start_in_delta(w: np.ndarray) -> np.ndarray:
    u = np.zeros(3)
    if kernels.face_in_delta(np.exp(u), _TRI, w[None, :])[0]:
        return u
    e1, e2 = _plane_basis()
    s = np.linspace(-8, 8, 65)
    S, T = np.meshgrid(s, s)
    U = S.reshape(-1, 1) * e1 + T.reshape(-1, 1) * e2
    R = np.exp(U)
    a = np.sqrt(R[:, 1] ** 2 + R[:, 2] ** 2 + 2 * R[:, 1] * R[:, 2] * w[0])
    b = np.sqrt(R[:, 0] ** 2 + R[:, 2] ** 2 + 2 * R[:, 0] * R[:, 2] * w[1])
    c = np.sqrt(R[:, 0] ** 2 + R[:, 1] ** 2 + 2 * R[:, 0] * R[:, 1] * w[2])
    L = -np.sort(-np.stack([a, b, c], axis=1), axis=1)
    score = (L[:, 2] - (L[:, 0] - L[:, 1])) / L[:, 0]
    best = int(np.argmax(score))
    if score[best] <= 0:
        raise NoConvergence("could not locate a point of Delta")
    return U[best]


def _newton_to(u, target, w, tol, max_iter=30):
    """Newton iteration on the plane sum(u)=const; returns (u, residual) or None on failure."""
    W = w[None, :]
    ones = np.ones((3, 3))
    res = target - kernels.face_angles(np.exp(u), _TRI, W)[0]
    err = np.abs(res).max()
    for _ in range(max_iter):
        if err <= tol:
            return u, err
        J = kernels.face_jacobians(np.exp(u), _TRI, W)[0]
        step = np.linalg.solve(J + ones, res)
        alpha = 1.0
        while alpha > 1e-6:
            cand = u + alpha * step
            r = np.exp(cand)
            if kernels.face_in_delta(r, _TRI, W)[0]:
                new_res = target - kernels.face_angles(r, _TRI, W)[0]
                new_err = np.abs(new_res).max()
                if new_err < err:
                    u, res, err = cand, new_res, new_err
                    break
            alpha *= 0.5
        else:
            return None
    return (u, err) if err <= tol else None


def invert_angle_map(target, inversive, tol: float = 1e-12, max_steps: int = 10_000) -> TriangleConfig:
    """Radii with product 1 whose angles equal ``target``.

    Continuation along the straight segment in angle space from the angles of
    a starting point of Delta to the target, with a damped Newton corrector.
    The segment stays inside the convex set Z, so the preimage path exists.
    """
    w = _check_weights(inversive)
    th = np.asarray(target, dtype=float)
    if th.shape != (3,) or not in_z(th, w):
        raise TargetOutsideZ(f"target {th.tolist()} is not strictly inside Z for I={w.tolist()}")
    th = th - (th.sum() - np.pi) / 3.0

    u = _start_in_delta(w)
    u = u - u.mean()
    th0 = kernels.face_angles(np.exp(u), _TRI, w[None, :])[0]
    s, h = 0.0, 1.0
    steps = 0
    while s < 1.0:
        steps += 1
        if steps > max_steps or h < 1e-12:
            raise NoConvergence("angle-map continuation stalled", best=np.exp(u))
        s_try = min(1.0, s + h)
        sub = th0 + s_try * (th - th0)
        got = _newton_to(u, sub, w, tol=1e-9 if s_try < 1.0 else tol)
        if got is None:
            h *= 0.5
            continue
        u = got[0] - got[0].mean()
        s = s_try
        h *= 2.0
    r = np.exp(u - u.mean())
    return TriangleConfig(tuple(r), tuple(w))
