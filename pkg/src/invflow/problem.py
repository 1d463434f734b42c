"""Problem files: one JSON document describing a surface, weights, start and target.

Schema (keys not listed are rejected)::

    {
      "vertex_count": 4,                      # or "fixture": "tetrahedron"
      "faces": [[1, 2, 3], ...],              # 1-based vertex triples
      "inversive": 1.0,                       # or {"default": 0.5, "edges": [[2, 3, 3.0], ...]}
      "radii": [1.5, 0.8, 1.1, 0.9],          # optional; default all 1, or "random"
      "target": "constant",                   # or an explicit per-vertex list
      "solver": {"dt": 0.01, "t_max": 200, "tol": 1e-10,
                 "method": "rk4", "normalize": true, "record_every": 1}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ProblemFileError, SurfaceError
from .fixtures import FIXTURES
from .geometry import InversiveWeights
from .surface import TriangulatedSurface, build_complex, euler_characteristic

TOP_KEYS = {"vertex_count", "faces", "fixture", "inversive", "radii", "target", "solver"}
SOLVER_KEYS = {"dt", "t_max", "tol", "method", "normalize", "record_every"}
TARGET_SUM_TOL = 1e-6


@dataclass
class Problem:
    surface: TriangulatedSurface
    weights: InversiveWeights
    radii: np.ndarray | None
    random_radii: bool = False
    target: np.ndarray | None = None  # None means the constant target
    target_given: bool = False
    solver: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.surface.n_vertices

    def initial_radii(self, seed: int | None = None) -> np.ndarray:
        if self.random_radii:
            rng = np.random.default_rng(seed)
            return np.exp(rng.uniform(-1.0, 1.0, self.n))
        return np.ones(self.n) if self.radii is None else self.radii.copy()

    def target_values(self) -> np.ndarray:
        if self.target is not None:
            return self.target
        return np.full(self.n, 2 * math.pi * euler_characteristic(self.surface) / self.n)


def _num(x, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ProblemFileError(f"{what} must be a number, got {x!r}")
    v = float(x)
    if not math.isfinite(v):
        raise ProblemFileError(f"{what} must be finite, got {x!r}")
    return v


def _weights(surface: TriangulatedSurface, spec) -> InversiveWeights:
    if spec is None:
        raise ProblemFileError("missing 'inversive'")
    if not isinstance(spec, dict):
        v = _num(spec, "inversive")
        if v < 0:
            raise ProblemFileError(f"inversive distance {v} < 0 (applies to every edge)")
        return InversiveWeights.uniform(surface, v)
    extra = set(spec) - {"default", "edges"}
    if extra:
        raise ProblemFileError(f"unknown keys in 'inversive': {sorted(extra)}")
    default = spec.get("default")
    if default is not None:
        default = _num(default, "inversive.default")
        if default < 0:
            raise ProblemFileError(f"inversive.default {default} < 0")
    mapping = {}
    for entry in spec.get("edges", []):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ProblemFileError(f"edge entry {entry!r} must be [a, b, value]")
        a, b, v = entry
        e = (min(a, b), max(a, b))
        v = _num(v, f"inversive distance on edge {e}")
        if e not in surface.edge_index:
            raise ProblemFileError(f"edge {e} is not an edge of the surface")
        if v < 0:
            raise ProblemFileError(f"inversive distance on edge {e} is {v} < 0")
        mapping[e] = v
    try:
        return InversiveWeights.from_mapping(surface, mapping, default)
    except KeyError as exc:
        raise ProblemFileError(str(exc.args[0])) from None


def parse_problem(doc: dict) -> Problem:
    """Validate a decoded document; raises ProblemFileError or a SurfaceError."""
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a JSON object")
    extra = set(doc) - TOP_KEYS
    if extra:
        raise ProblemFileError(f"unknown keys: {sorted(extra)}")
    if "fixture" in doc:
        if "faces" in doc or "vertex_count" in doc:
            raise ProblemFileError("give either 'fixture' or 'vertex_count'/'faces', not both")
        name = doc["fixture"]
        if name not in FIXTURES:
            raise ProblemFileError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
        surface = FIXTURES[name]()
    else:
        if "vertex_count" not in doc or "faces" not in doc:
            raise ProblemFileError("missing 'vertex_count' or 'faces'")
        n = doc["vertex_count"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ProblemFileError("vertex_count must be an integer")
        faces = doc["faces"]
        if not isinstance(faces, list) or not all(
            isinstance(f, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in f) for f in faces
        ):
            raise ProblemFileError("faces must be a list of integer triples")
        surface = build_complex(n, faces)
    weights = _weights(surface, doc.get("inversive"))

    radii = None
    random_radii = False
    if "radii" in doc:
        if doc["radii"] == "random":
            random_radii = True
        else:
            rv = doc["radii"]
            if not isinstance(rv, list) or len(rv) != surface.n_vertices:
                raise ProblemFileError(f"radii must be a list of {surface.n_vertices} numbers or \"random\"")
            radii = np.array([_num(x, "radius") for x in rv])
            bad = np.flatnonzero(radii <= 0)
            if bad.size:
                raise ProblemFileError(f"radius at vertex {int(bad[0]) + 1} is {radii[bad[0]]} <= 0")

    target = None
    given = False
    t = doc.get("target", "constant")
    if t != "constant":
        if not isinstance(t, list) or len(t) != surface.n_vertices:
            raise ProblemFileError(f"target must be \"constant\" or a list of {surface.n_vertices} numbers")
        target = np.array([_num(x, "target curvature") for x in t])
        total = 2 * math.pi * euler_characteristic(surface)
        if abs(target.sum() - total) > TARGET_SUM_TOL:
            raise ProblemFileError(
                f"target curvatures sum to {target.sum():.17g}; they must sum to 2*pi*chi = {total:.17g}"
            )
        # spread the rounding residue so the target sums to 2*pi*chi exactly
        target = target - (target.sum() - total) / target.size
        given = True

    solver = dict(doc.get("solver", {}))
    extra = set(solver) - SOLVER_KEYS
    if extra:
        raise ProblemFileError(f"unknown solver keys: {sorted(extra)}")
    return Problem(surface, weights, radii, random_radii, target, given, solver)


def read_document(path) -> dict:
    """Read and decode the JSON text only; no structural checks."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: not valid JSON ({exc})") from None
    return doc


def load_problem(path) -> Problem:
    return parse_problem(read_document(path))


def problem_document(problem: Problem, radii=None) -> dict:
    """Inverse of ``parse_problem``; optionally replaces the initial radii."""
    s = problem.surface
    edges = [[a, b, float(v)] for (a, b), v in zip(s.edges, problem.weights.values)]
    doc = {
        "vertex_count": s.n_vertices,
        "faces": [list(f) for f in s.faces],
        "inversive": {"edges": edges},
        "target": "constant" if problem.target is None else [float(x) for x in problem.target],
    }
    r = problem.radii if radii is None else radii
    if r is not None:
        doc["radii"] = [float(x) for x in r]
    if problem.solver:
        doc["solver"] = dict(problem.solver)
    return doc


__all__ = ["Problem", "parse_problem", "read_document", "load_problem", "problem_document", "SurfaceError"]
