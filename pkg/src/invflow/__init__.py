"""Inversive distance circle packings on closed surfaces and the extended Ricci flow."""

from . import kernels
from .admissibility import (
    HalfSpaceReport,
    boundary_curvature_gap,
    check_necessary,
    constant_curvature_condition,
    degenerate_limit_probe,
    halfspace_margin,
    subset_table,
)
from .curvature import (
    PackingMetric,
    average_curvature,
    curvature_extended,
    curvature_jacobian,
    gauss_bonnet_defect,
    in_omega,
    restricted_spectrum,
)
from .errors import *  # noqa: F401,F403
from .fixtures import FIXTURES, octahedron, tetrahedron, torus7, torus_grid
from .flow import FlowConfig, FlowStatus, FlowTrajectory, estimate_rate, flow_step, newton_refine, run_flow
from .geometry import (
    InversiveWeights,
    TriangleConfig,
    angle_bounds,
    degenerate_radius,
    edge_length,
    generalized_angles,
    invert_angle_map,
    lambda_clamp,
)
from .potential import CurvatureTarget, PotentialSpec, potential_value
from .surface import TriangulatedSurface, build_complex, euler_characteristic, link_pairs

__version__ = "0.1.0"
