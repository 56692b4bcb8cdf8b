"""Geometric functionals: Voronoi set approximation, covering processes,
nearest-neighbor statistics, and the shapes/grids they share."""

from .shapes import AxisBox, Ball, HalfInterval, KochFlake, unit_ball_volume
from .grid import IntegrationGrid, make_grid, make_ball_samples
from .voronoi import (
    VoronoiAssignment,
    add_one_decomposition_check,
    assign_nearest,
    boundary_band_volume,
    captured_volume,
    max_cell_radius,
    max_cell_radius_event,
    rolling_ball_integral,
    voronoi_deletion_profile,
    voronoi_deletion_support,
    voronoi_functional,
    voronoi_radii,
    voronoi_volume,
    voronoi_volume_exact_1d,
)
from .covering import (
    ConstantRadius,
    GermGrain,
    ParetoRadius,
    UniformRadius,
    covering_functionals,
    covering_volume_and_isolated,
    germ_grain_from_config,
)
from .nearest import nn_average_distance, nn_functional

__all__ = [
    "AxisBox", "Ball", "HalfInterval", "KochFlake", "unit_ball_volume",
    "IntegrationGrid", "make_grid", "make_ball_samples",
    "VoronoiAssignment", "assign_nearest", "voronoi_volume",
    "voronoi_functional", "voronoi_volume_exact_1d", "voronoi_radii",
    "voronoi_deletion_profile", "voronoi_deletion_support",
    "add_one_decomposition_check", "rolling_ball_integral",
    "boundary_band_volume", "captured_volume",
    "max_cell_radius", "max_cell_radius_event",
    "ConstantRadius", "UniformRadius", "ParetoRadius", "GermGrain",
    "germ_grain_from_config", "covering_functionals",
    "covering_volume_and_isolated",
    "nn_average_distance", "nn_functional",
]
