import numpy as np
import pytest

from invflow.curvature import in_omega
from invflow.fixtures import octahedron, tetrahedron, torus7, torus_grid
from invflow.geometry import InversiveWeights

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def sample_omega(surface, I, rng, count, lo=0.1, hi=10.0, max_tries=100_000):
    """Log-uniform radii in [lo, hi] kept only when every face is a true triangle."""
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("rejection sampling of Omega did not fill up")
        r = np.exp(rng.uniform(np.log(lo), np.log(hi), surface.n_vertices))
        if in_omega(surface, I, r):
            out.append(r)
    return np.array(out)


def sample_outside_omega(surface, I, rng, count, spread=3.0):
    out = []
    while len(out) < count:
        r = np.exp(rng.uniform(-spread, spread, surface.n_vertices))
        if not in_omega(surface, I, r):
            out.append(r)
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tet():
    return tetrahedron()


@pytest.fixture
def octa():
    return octahedron()


@pytest.fixture
def torus():
    return torus7()


@pytest.fixture(params=["tetrahedron", "octahedron", "torus7", "torus9"])
def any_surface(request):
    return {"tetrahedron": tetrahedron, "octahedron": octahedron, "torus7": torus7, "torus9": torus_grid}[
        request.param
    ]()


def separated_edge_weights(surface, edge=(2, 3), value=3.0, default=0.5):
    return InversiveWeights.from_mapping(surface, {edge: value}, default=default)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")


def sample_z(inversive, rng, count, margin=1e-12):
    """Uniform samples of Z = {theta > 0, sum = pi, theta_i < pi - Lambda(I_i)} by rejection."""
    from invflow.geometry import angle_bounds

    bounds = angle_bounds(inversive)
    out = []
    while len(out) < count:
        th = np.pi * rng.dirichlet(np.ones(3))
        if np.all(th > margin) and np.all(th < bounds - margin):
            out.append(th)
    return np.array(out)
