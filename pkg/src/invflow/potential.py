"""Extended Ricci potential and its prescribed-curvature variant.

The potential is the line integral of ``sum_i (K_i - Kbar_i) du_i`` from a
base point.  The 1-form is closed and continuous on all of R^N, so the value
is path independent; it is evaluated on straight segments with adaptive
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .curvature import average_curvature
from .errors import BadTotalCurvature, QuadratureFailure
from .geometry import as_weights
from .surface import TriangulatedSurface, euler_characteristic

GL_ORDER = 16
MAX_PANELS = 2**14
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class CurvatureTarget:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("curvature target must be a finite 1-d array")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, surface: TriangulatedSurface) -> "CurvatureTarget":
        return cls(np.full(surface.n_vertices, average_curvature(surface)))

    def check(self, surface: TriangulatedSurface, tol: float = 1e-9) -> "CurvatureTarget":
        if self.values.shape != (surface.n_vertices,):
            raise ValueError(f"target has {self.values.size} entries, surface has {surface.n_vertices} vertices")
        total = 2 * math.pi * euler_characteristic(surface)
        if abs(self.values.sum() - total) > tol:
            raise BadTotalCurvature(
                f"target sums to {self.values.sum():.17g}, expected 2*pi*chi = {total:.17g}"
            )
        return self


@dataclass(frozen=True)
class PotentialSpec:
    base_point: np.ndarray
    target: CurvatureTarget
    tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))

    @classmethod
    def for_surface(cls, surface, target=None, base_point=None, tol=1e-10, check=True) -> "PotentialSpec":
        if target is None:
            target = CurvatureTarget.constant(surface)
        elif not isinstance(target, CurvatureTarget):
            target = CurvatureTarget(target)
        if check:
            target.check(surface)
        u0 = np.zeros(surface.n_vertices) if base_point is None else base_point
        return cls(u0, target, tol)

    def rebased(self, base_point) -> "PotentialSpec":
        return PotentialSpec(base_point, self.target, self.tol)


def _kbar(spec_or_target) -> np.ndarray:
    if isinstance(spec_or_target, PotentialSpec):
        return spec_or_target.target.values
    if isinstance(spec_or_target, CurvatureTarget):
        return spec_or_target.values
    return np.asarray(spec_or_target, dtype=float)


def potential_gradient(surface: TriangulatedSurface, I, u, target) -> np.ndarray:
    w = as_weights(surface, I).on_faces(surface)
    K = kernels.curvature(np.exp(np.asarray(u, dtype=float)), surface.face_array, w, surface.n_vertices)
    return K - _kbar(target)


KINK_WIDTH = 2.0**-30
ROUNDING_ULPS = 256


def _in_delta_batch(R: np.ndarray, tri: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(m, F) strict triangle-inequality flags for m radius vectors at once."""
    Rf = R[:, tri]  # (m, F, 3)
    a, b = np.roll(Rf, -1, axis=2), np.roll(Rf, -2, axis=2)
    L = np.sqrt(a * a + b * b + 2.0 * a * b * w[None, :, :])
    L.sort(axis=2)
    return L[:, :, 0] - (L[:, :, 2] - L[:, :, 1]) > 0


@dataclass
class _Segment:
    tri: np.ndarray
    w: np.ndarray
    start: np.ndarray
    d: np.ndarray
    kbar_dot: float
    evals: int = field(default=0)

    def _radii(self, s: np.ndarray) -> np.ndarray:
        return np.exp(self.start[None, :] + s[:, None] * self.d[None, :])

    def integrand(self, s: np.ndarray) -> np.ndarray:
        K = kernels.curvature_batch(self._radii(s), self.tri, self.w)
        self.evals += len(s)
        return K @ self.d - self.kbar_dot

    def crosses(self, pts: np.ndarray) -> np.ndarray:
        """Whether some face changes Delta membership between consecutive points of each row."""
        m, k = pts.shape
        flags = _in_delta_batch(self._radii(pts.ravel()), self.tri, self.w).reshape(m, k, -1)
        return np.any(flags[:, 1:] != flags[:, :-1], axis=(1, 2))


def _panel_rules(a: np.ndarray, b: np.ndarray):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    return nodes, half


def integrate_segment(
    surface: TriangulatedSurface, w_faces: np.ndarray, start, end, kbar, tol: float = 1e-10
) -> float:
    """Integral of (K(u) - kbar).du along the straight segment start -> end.

    Panels are halved until a 16-point rule and its two halves agree.  The
    integrand has square-root kinks where a face crosses the boundary of
    Delta; a kink that falls between a panel end and its first node is
    invisible to both rules, so panels whose Delta flags change anywhere along
    (ends and nodes) are halved down to width ``KINK_WIDTH`` regardless.
    """
    start = np.asarray(start, dtype=float)
    d = np.asarray(end, dtype=float) - start
    if not np.any(d):
        return 0.0
    seg = _Segment(surface.face_array, w_faces, start, d, float(np.dot(kbar, d)))

    def quad(a, b):
        nodes, half = _panel_rules(a, b)
        vals = seg.integrand(nodes.ravel()).reshape(nodes.shape)
        kink = seg.crosses(np.column_stack([a, nodes, b]))
        return half * (vals @ _GL_W), half * (np.abs(vals) @ _GL_W), kink

    a = np.array([0.0])
    b = np.array([1.0])
    coarse, _, kink = quad(a, b)
    total = 0.0
    n_panels = 1
    while a.size:
        m = 0.5 * (a + b)
        left, sl, kl = quad(a, m)
        right, sr, kr = quad(m, b)
        fine = left + right
        tiny = (b - a) <= KINK_WIDTH
        # below a few hundred ulps of the panel mass the two rules cannot agree any better
        allowed = np.maximum(tol * (b - a), ROUNDING_ULPS * np.finfo(float).eps * (sl + sr))
        ok = (~(kink | kl | kr) & (np.abs(fine - coarse) <= allowed)) | tiny
        total += float(np.sum(fine[ok]))
        bad = ~ok
        if not np.any(bad):
            break
        n_panels += int(bad.sum())
        if n_panels > MAX_PANELS:
            raise QuadratureFailure(f"tolerance {tol:g} not met with {MAX_PANELS} panels")
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        kink = np.concatenate([kl[bad], kr[bad]])
    return total


def potential_value(surface: TriangulatedSurface, I, u, spec: PotentialSpec) -> float:
    """Potential at ``u`` relative to ``spec.base_point`` (where it is 0)."""
    w = as_weights(surface, I).on_faces(surface)
    return integrate_segment(surface, w, spec.base_point, u, spec.target.values, spec.tol)


def potential_along(surface: TriangulatedSurface, I, points, spec: PotentialSpec) -> float:
    """Potential at ``points[-1]`` integrated along the polyline base -> points[0] -> ... -> points[-1]."""
    w = as_weights(surface, I).on_faces(surface)
    verts = [spec.base_point] + [np.asarray(p, dtype=float) for p in points]
    tol = spec.tol / (len(verts) - 1)
    return sum(
        integrate_segment(surface, w, a, b, spec.target.values, tol) for a, b in zip(verts[:-1], verts[1:])
    )


def hessian_fd(surface: TriangulatedSurface, I, u, target, h: float = 1e-3, tol: float = 1e-14) -> np.ndarray:
    """Second differences of the potential itself, based at ``u`` so every segment is short."""
    u = np.asarray(u, dtype=float)
    n = u.size
    spec = PotentialSpec(u, target if isinstance(target, CurvatureTarget) else CurvatureTarget(target), tol)
    E = np.eye(n) * h

    def F(x):
        return potential_value(surface, I, x, spec)

    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = (
                F(u + E[i] + E[j]) - F(u + E[i] - E[j]) - F(u - E[i] + E[j]) + F(u - E[i] - E[j])
            ) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


@dataclass
class ConvexityReport:
    n_pairs: int
    n_rays: int
    midpoint_violations: list = field(default_factory=list)
    monotonicity_violations: list = field(default_factory=list)
    ray_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.midpoint_violations or self.monotonicity_violations or self.ray_violations)


def convexity_probe(
    surface: TriangulatedSurface,
    I,
    spec: PotentialSpec,
    pairs,
    rays=None,
    center=None,
    ray_radii=(1.0, 10.0),
    slack: float = 1e-9,
) -> ConvexityReport:
    """Sampled evidence of convexity and properness; violations are listed, not raised.

    ``pairs`` is an (m, 2, N) array of points.  ``rays`` (k, N) are directions
    that get projected onto sum(x)=0 and normalised; they are walked from
    ``center`` (a constant-curvature point) to each radius in ``ray_radii``.
    """
    pairs = np.asarray(pairs, dtype=float)
    rep = ConvexityReport(n_pairs=len(pairs), n_rays=0 if rays is None else len(rays))
    for n, (a, b) in enumerate(pairs):
        fa = potential_value(surface, I, a, spec)
        fb = potential_value(surface, I, b, spec)
        fm = potential_value(surface, I, 0.5 * (a + b), spec)
        gap = fm - 0.5 * (fa + fb)
        if gap > slack:
            rep.midpoint_violations.append((n, gap))
        mono = float(np.dot(potential_gradient(surface, I, b, spec) - potential_gradient(surface, I, a, spec), b - a))
        if mono < -slack:
            rep.monotonicity_violations.append((n, mono))
    if rays is not None:
        center = np.asarray(center, dtype=float)
        for n, xi in enumerate(np.asarray(rays, dtype=float)):
            xi = xi - xi.mean()
            xi = xi / np.linalg.norm(xi)
            vals = [potential_value(surface, I, center + t * xi, spec) for t in ray_radii]
            if not all(v2 > v1 for v1, v2 in zip(vals[:-1], vals[1:])):
                rep.ray_violations.append((n, vals))
    return rep
