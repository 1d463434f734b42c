"""Small closed triangulations used by the CLI examples, tests and benchmarks."""

from .surface import TriangulatedSurface, build_complex


def tetrahedron() -> TriangulatedSurface:
    return build_complex(4, [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)])


def octahedron() -> TriangulatedSurface:
    # poles 1 and 6, equator 2-3-4-5
    faces = []
    ring = [2, 3, 4, 5]
    for a, b in zip(ring, ring[1:] + ring[:1]):
        faces.append((1, a, b))
        faces.append((6, a, b))
    return build_complex(6, faces)


def torus7() -> TriangulatedSurface:
    """Minimal 7-vertex torus; its 1-skeleton is K7 and every vertex has degree 6."""
    faces = []
    for i in range(7):
        faces.append((i % 7 + 1, (i + 1) % 7 + 1, (i + 3) % 7 + 1))
        faces.append((i % 7 + 1, (i + 2) % 7 + 1, (i + 3) % 7 + 1))
    return build_complex(7, faces)


def torus_grid(m: int = 3, n: int = 3) -> TriangulatedSurface:
    """Triangulated m-by-n grid with periodic identification (m, n >= 3)."""

    def vid(a, b):
        return (a % m) * n + (b % n) + 1

    faces = []
    for a in range(m):
        for b in range(n):
            faces.append((vid(a, b), vid(a + 1, b), vid(a + 1, b + 1)))
            faces.append((vid(a, b), vid(a, b + 1), vid(a + 1, b + 1)))
    return build_complex(m * n, faces)


FIXTURES = {
    "tetrahedron": tetrahedron,
    "octahedron": octahedron,
    "torus7": torus7,
    "torus9": torus_grid,
}
