"""Ideal points of deformation varieties and spun-normal surfaces."""
from importlib import resources
from pathlib import Path

from .equations import (
    GluingSystem,
    ShapeAssignment,
    build_gluing_system,
    gluing_residuals,
    parameter_residuals,
)
from .errors import *  # noqa: F401,F403
from .geometry import (
    SolveOptions,
    cross_ratio,
    develop,
    fig8_degeneration_path,
    holonomy_eval,
    lobachevsky,
    mobius_apply,
    mobius_from_triples,
    solve,
    trace_squared,
    track_degeneration,
    volume,
)
from .surfaces import (
    boundary_slopes,
    integral_surface,
    nontriviality_certificate,
    nu_evaluate,
    peripheral_basis,
    spine_descriptor,
)
from .triangulation import (
    IdealTriangulation,
    PeripheralCurve,
    cusp_triangulation,
    edge_classes,
    load_triangulation,
    parse_triangulation,
    validate_curve,
)
from .tropical import (
    QuadCoordinate,
    TropicalPoint,
    enumerate_pf_vertices,
    prevariety_membership,
    quads_to_xi,
    sphdual_membership,
    xi_to_quads,
)

__version__ = "0.1.0"


def fixture_path(name: str = "fig8") -> Path:
    """Path of a triangulation shipped with the package."""
    return Path(str(resources.files(__package__) / "data" / f"{name}.json"))


def load_fixture(name: str = "fig8") -> IdealTriangulation:
    return load_triangulation(fixture_path(name))
