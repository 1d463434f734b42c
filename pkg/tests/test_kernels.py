import os
import subprocess
import sys

import numpy as np
import pytest

from invflow import kernels
from invflow.fixtures import octahedron, torus_grid
from invflow.geometry import InversiveWeights
from invflow.kernels import numpy_impl

pytestmark = pytest.mark.skipif(kernels.numba_impl is None, reason="numba backend not available")


@pytest.fixture(params=["octahedron", "grid"])
def setup(request, rng):
    s = octahedron() if request.param == "octahedron" else torus_grid(6, 7)
    w = InversiveWeights(rng.uniform(0, 4, s.n_edges)).on_faces(s)
    return s, w


def test_backend_selected():
    assert kernels.BACKEND in {"numba", "numpy"}
    if os.environ.get("INVFLOW_DISABLE_NUMBA"):
        assert kernels.BACKEND == "numpy"


def test_curvature_agrees(setup, rng):
    s, w = setup
    nb = kernels.numba_impl
    for _ in range(50):
        r = np.exp(rng.uniform(-4, 4, s.n_vertices))
        a = numpy_impl.curvature(r, s.face_array, w, s.n_vertices)
        b = nb.curvature(r, s.face_array, w, s.n_vertices)
        np.testing.assert_allclose(a, b, atol=1e-13)
        np.testing.assert_array_equal(
            numpy_impl.face_in_delta(r, s.face_array, w), nb.face_in_delta(r, s.face_array, w)
        )


def test_batch_agrees(setup, rng):
    s, w = setup
    R = np.exp(rng.uniform(-3, 3, (40, s.n_vertices)))
    a = numpy_impl.curvature_batch(R, s.face_array, w)
    b = kernels.numba_impl.curvature_batch(R, s.face_array, w)
    np.testing.assert_allclose(a, b, atol=1e-13)
    single = np.array([numpy_impl.curvature(r, s.face_array, w, s.n_vertices) for r in R])
    np.testing.assert_allclose(a, single, atol=1e-13)


def test_jacobians_agree(setup, rng):
    s, w = setup
    for _ in range(20):
        r = np.exp(rng.uniform(-1, 1, s.n_vertices))
        a = numpy_impl.face_jacobians(r, s.face_array, w)
        b = kernels.numba_impl.face_jacobians(r, s.face_array, w)
        np.testing.assert_array_equal(np.isnan(a), np.isnan(b))
        ok = ~np.isnan(a)
        np.testing.assert_allclose(a[ok], b[ok], atol=1e-12)


def test_angles_agree_on_degenerate_lengths():
    L = np.array([[3.0, 1.0, 1.0], [2.0, 1.0, 1.0], [1.0, 1.0, 1e-9], [5.0, 4.0, 3.0], [1.0, 1.0, 1.0]])
    np.testing.assert_allclose(
        numpy_impl.angles_from_lengths(L), kernels.numba_impl.angles_from_lengths(L), atol=1e-15
    )


def test_env_flag_forces_numpy():
    code = "import invflow.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, INVFLOW_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_backend_runs_a_flow():
    code = (
        "import numpy as np, invflow as f;"
        "s=f.tetrahedron();"
        "t=f.run_flow(s,1.0,[1.5,0.8,1.1,0.9],f.FlowConfig(target=np.full(4,np.pi)));"
        "print(f.kernels.BACKEND, t.status.value, repr(t.final.residual))"
    )
    env = dict(os.environ, INVFLOW_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, status, res = out.stdout.split()
    assert backend == "numpy" and status == "Converged" and float(res) <= 1e-10
