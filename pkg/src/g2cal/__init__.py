"""Numerics for the cross-product calibration algebra on R^7, the
Dirac-type operator on flat associative model domains, its boundary
theory, and the discrete exterior-calculus translation on 3-manifolds.
"""

from .algebra import (
    build_calibration,
    chi,
    chi_bracket,
    classify_plane,
    cross,
    phi_form,
)
from .boundary import (
    assemble_DL,
    chern_number,
    decompose_boundary_bundles,
    index,
    rigidity_report,
)
from .cy import (
    assemble_Dvee,
    betti,
    build_dec,
    build_s1xs2_dec,
    build_sphere3_dec,
    build_torus_dec,
    cy_kernel_dim,
    dvee_square_vs_laplacian,
)
from .dirac import (
    AssembledOperator,
    BoundaryCondition,
    adjointness_residual,
    assemble_D,
    evaluate_F,
    fourier_oracle,
    kernel_dim,
    spectrum,
    symbol,
    weitzenboeck_residual,
)
from .geometry import second_fundamental_form, simons_operators
from .meshes import (
    build_ball_mesh,
    build_sphere3_mesh,
    build_torus_grid,
    ellipsoid_radius,
    euler_genus,
    load_mesh_json,
    round_radius,
    save_mesh_json,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledOperator",
    "BoundaryCondition",
    "adjointness_residual",
    "assemble_D",
    "assemble_DL",
    "assemble_Dvee",
    "betti",
    "build_ball_mesh",
    "build_calibration",
    "build_dec",
    "build_s1xs2_dec",
    "build_sphere3_dec",
    "build_sphere3_mesh",
    "build_torus_dec",
    "build_torus_grid",
    "chern_number",
    "chi",
    "chi_bracket",
    "classify_plane",
    "cross",
    "cy_kernel_dim",
    "decompose_boundary_bundles",
    "dvee_square_vs_laplacian",
    "ellipsoid_radius",
    "euler_genus",
    "evaluate_F",
    "fourier_oracle",
    "index",
    "kernel_dim",
    "load_mesh_json",
    "phi_form",
    "rigidity_report",
    "round_radius",
    "save_mesh_json",
    "second_fundamental_form",
    "simons_operators",
    "spectrum",
    "symbol",
    "weitzenboeck_residual",
]
