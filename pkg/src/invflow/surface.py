"""Combinatorics of closed triangulated surfaces.

Vertices are numbered 1..N on the public surface of this module; the
``face_array``/``edge_array`` attributes hold the same data 0-based for the
numeric kernels.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DanglingVertex,
    DuplicateFace,
    EmptyOrFullSubset,
    NonManifoldEdge,
    SurfaceError,
)

Edge = tuple[int, int]
Face = tuple[int, int, int]


@dataclass(frozen=True)
class TriangulatedSurface:
    vertex_count: int
    faces: tuple[Face, ...]
    edges: tuple[Edge, ...]
    vertex_faces: tuple[tuple[int, ...], ...]  # face indices incident to each vertex
    face_array: np.ndarray = field(repr=False, compare=False)
    edge_array: np.ndarray = field(repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return self.vertex_count

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: n for n, e in enumerate(self.edges)}

    @cached_property
    def face_edge_array(self) -> np.ndarray:
        """(F, 3) edge indices; column c is the edge opposite corner c."""
        idx = self.edge_index
        out = np.empty((self.n_faces, 3), dtype=np.int64)
        for f, (i, j, k) in enumerate(self.faces):
            out[f] = idx[(j, k)], idx[(i, k)], idx[(i, j)]
        return out

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(fs) for fs in self.vertex_faces], dtype=np.int64)

    def euler_characteristic(self) -> int:
        return euler_characteristic(self)


def _normalize_face(face: Sequence[int], n: int) -> Face:
    if len(face) != 3:
        raise SurfaceError(f"face {tuple(face)} does not have three vertices")
    tri = tuple(sorted(int(v) for v in face))
    for v in tri:
        if not 1 <= v <= n:
            raise SurfaceError(f"face {tuple(face)} references vertex {v} outside 1..{n}")
    if tri[0] == tri[1] or tri[1] == tri[2]:
        raise DuplicateFace(tuple(face))
    return tri  # type: ignore[return-value]


def build_complex(vertex_count: int, faces: Iterable[Sequence[int]]) -> TriangulatedSurface:
    """Validate a closed triangulated surface and derive edges and incidence.

    Faces are stored sorted (``i < j < k``) in lexicographic order, which fixes
    every downstream assembly order.
    """
    n = int(vertex_count)
    if n < 1:
        raise SurfaceError("vertex_count must be positive")
    tris = [_normalize_face(f, n) for f in faces]
    if not tris:
        raise SurfaceError("surface has no faces")
    seen = Counter(tris)
    for tri, c in seen.items():
        if c > 1:
            raise DuplicateFace(tri)
    tris.sort()

    edge_count: Counter[Edge] = Counter()
    for i, j, k in tris:
        edge_count[(i, j)] += 1
        edge_count[(i, k)] += 1
        edge_count[(j, k)] += 1
    for e in sorted(edge_count):
        if edge_count[e] != 2:
            raise NonManifoldEdge(e, edge_count[e])
    edges = tuple(sorted(edge_count))

    incident: list[list[int]] = [[] for _ in range(n)]
    for f, tri in enumerate(tris):
        for v in tri:
            incident[v - 1].append(f)
    for v in range(n):
        if not incident[v]:
            raise DanglingVertex(v + 1)

    assert 2 * len(edges) == 3 * len(tris)
    return TriangulatedSurface(
        vertex_count=n,
        faces=tuple(tris),
        edges=edges,
        vertex_faces=tuple(tuple(fs) for fs in incident),
        face_array=np.array(tris, dtype=np.int64) - 1,
        edge_array=np.array(edges, dtype=np.int64) - 1,
    )


def euler_characteristic(surface: TriangulatedSurface) -> int:
    return surface.n_vertices - surface.n_edges + surface.n_faces


def is_connected(surface: TriangulatedSurface) -> bool:
    parent = list(range(surface.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in surface.edges:
        parent[find(i - 1)] = find(j - 1)
    return len({find(v) for v in range(surface.n_vertices)}) == 1


@dataclass(frozen=True)
class VertexSubset:
    """Nonempty proper vertex subset, 1-based and sorted."""

    members: tuple[int, ...]

    def __contains__(self, v: int) -> bool:
        return v in self._set

    @cached_property
    def _set(self) -> frozenset[int]:
        return frozenset(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[np.asarray(self.members) - 1] = True
        return m


def as_subset(surface: TriangulatedSurface, A) -> VertexSubset:
    if isinstance(A, VertexSubset):
        members = A.members
    else:
        members = tuple(sorted({int(v) for v in A}))
    n = surface.n_vertices
    if not members or len(members) >= n:
        raise EmptyOrFullSubset(f"subset of size {len(members)} is not a nonempty proper subset of {n} vertices")
    if members[0] < 1 or members[-1] > n:
        raise EmptyOrFullSubset(f"subset {members} references vertices outside 1..{n}")
    return VertexSubset(members)


def link_pairs(surface: TriangulatedSurface, A) -> list[tuple[Edge, int]]:
    """Pairs ``(e, v)`` with ``v`` in A, both ends of ``e`` outside A, and ``e + v`` a face."""
    sub = as_subset(surface, A)
    pairs = []
    for tri in surface.faces:
        inside = [v for v in tri if v in sub]
        if len(inside) == 1:
            v = inside[0]
            e = tuple(w for w in tri if w != v)
            pairs.append((e, v))
    pairs.sort(key=lambda p: (p[1], p[0]))
    return pairs


def classify_faces(surface: TriangulatedSurface, A) -> tuple[list[Face], list[Face], list[Face]]:
    """Split the faces touching A by how many of their vertices lie in A."""
    sub = as_subset(surface, A)
    buckets: tuple[list[Face], list[Face], list[Face]] = ([], [], [])
    for tri in surface.faces:
        c = sum(v in sub for v in tri)
        if c:
            buckets[c - 1].append(tri)
    return buckets


def subcomplex_euler(surface: TriangulatedSurface, A) -> int:
    """Euler characteristic of the full subcomplex spanned by A."""
    sub = as_subset(surface, A)
    n_edges = sum(i in sub and j in sub for i, j in surface.edges)
    n_faces = sum(all(v in sub for v in tri) for tri in surface.faces)
    return len(sub) - n_edges + n_faces


def proper_subsets(n: int):
    """All nonempty proper subsets of 1..n, lexicographic on the sorted tuples."""
    stack = [(v,) for v in range(n, 0, -1)]
    while stack:
        cur = stack.pop()
        if len(cur) < n:
            yield cur
        stack.extend(cur + (w,) for w in range(n, cur[-1], -1))
