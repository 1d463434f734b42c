"""Extended discrete curvature on a closed surface and its Jacobian."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OutsideOmega
from .geometry import InversiveWeights, _check_radii, as_weights
from .surface import TriangulatedSurface, euler_characteristic


@dataclass(frozen=True)
class PackingMetric:
    """Per-vertex radii; ``log_radii`` gives the ``u = ln r`` coordinates."""

    radii: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "radii", _check_radii(self.radii))

    @classmethod
    def from_log(cls, u) -> "PackingMetric":
        return cls(np.exp(np.asarray(u, dtype=float)))

    @property
    def log_radii(self) -> np.ndarray:
        return np.log(self.radii)

    def normalized(self) -> "PackingMetric":
        """Rescaled so that the product of radii is 1."""
        u = self.log_radii
        return PackingMetric.from_log(u - u.mean())


def _radii(metric) -> np.ndarray:
    if isinstance(metric, PackingMetric):
        return metric.radii
    return _check_radii(metric)


def curvature_extended(surface: TriangulatedSurface, I, metric) -> np.ndarray:
    """2*pi minus the sum of generalised angles at each vertex; defined for all positive radii."""
    w = as_weights(surface, I).on_faces(surface)
    r = _radii(metric)
    return kernels.curvature(r, surface.face_array, w, surface.n_vertices)


def curvature_from_log(surface: TriangulatedSurface, w_faces: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Unchecked fast path used inside the solvers (``w_faces`` already per-face)."""
    return kernels.curvature(np.exp(u), surface.face_array, w_faces, surface.n_vertices)


def average_curvature(surface: TriangulatedSurface) -> float:
    return 2.0 * math.pi * euler_characteristic(surface) / surface.n_vertices


def gauss_bonnet_defect(K, surface: TriangulatedSurface) -> float:
    return float(np.sum(K) - 2.0 * math.pi * euler_characteristic(surface))


def curvature_bounds(surface: TriangulatedSurface) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex a-priori range ``[2*pi - pi*deg, 2*pi]`` of the extended curvature."""
    deg = surface.degrees.astype(float)
    return 2.0 * math.pi - math.pi * deg, np.full(surface.n_vertices, 2.0 * math.pi)


def faces_in_delta(surface: TriangulatedSurface, I, metric) -> np.ndarray:
    w = as_weights(surface, I).on_faces(surface)
    return kernels.face_in_delta(_radii(metric), surface.face_array, w)


def in_omega(surface: TriangulatedSurface, I, metric) -> bool:
    return bool(np.all(faces_in_delta(surface, I, metric)))


def assemble_jacobian(surface: TriangulatedSurface, face_jac: np.ndarray) -> np.ndarray:
    n = surface.n_vertices
    L = np.zeros((n, n))
    for f, tri in enumerate(surface.face_array):
        L[np.ix_(tri, tri)] -= face_jac[f]
    return L


def curvature_jacobian(surface: TriangulatedSurface, I, metric) -> np.ndarray:
    """dK/du assembled face by face; only defined when every face is a true triangle."""
    w = as_weights(surface, I).on_faces(surface)
    r = _radii(metric)
    inside = kernels.face_in_delta(r, surface.face_array, w)
    if not np.all(inside):
        bad = [surface.faces[f] for f in np.flatnonzero(~inside)]
        raise OutsideOmega(f"faces {bad} violate the triangle inequality")
    return assemble_jacobian(surface, kernels.face_jacobians(r, surface.face_array, w))


def restricted_spectrum(L: np.ndarray) -> np.ndarray:
    """Eigenvalues of L with the kernel direction (1,...,1) removed, ascending."""
    n = L.shape[0]
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    B = q[:, 1:]
    return np.linalg.eigvalsh(B.T @ L @ B)


__all__ = [
    "PackingMetric",
    "InversiveWeights",
    "curvature_extended",
    "average_curvature",
    "gauss_bonnet_defect",
    "curvature_bounds",
    "faces_in_delta",
    "in_omega",
    "curvature_jacobian",
    "restricted_spectrum",
]
