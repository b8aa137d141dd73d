"""Tilt-rotor gait design, singularity analysis and tracking simulation."""

from ._core import (
    Branch,
    ColorSolution,
    Gait,
    Gains,
    Grid2D,
    Params,
    TiltrotorError,
    bias_gait,
    coefficient_scale,
    color_map,
    decoupling_det,
    decoupling_matrix,
    det_decomposition,
    make_preset_gait,
    make_rectangle_gait,
    normalized_det,
    robustness_report,
    run_cli,
    run_tracking,
    singular_curves,
    solve_color_pair,
    thrust_matrix,
    torque_matrix,
    wrap_angle,
)

__all__ = [
    "Branch",
    "ColorSolution",
    "Gait",
    "Gains",
    "Grid2D",
    "Params",
    "TiltrotorError",
    "bias_gait",
    "coefficient_scale",
    "color_map",
    "decoupling_det",
    "decoupling_matrix",
    "det_decomposition",
    "make_preset_gait",
    "make_rectangle_gait",
    "normalized_det",
    "robustness_report",
    "run_cli",
    "run_tracking",
    "singular_curves",
    "solve_color_pair",
    "thrust_matrix",
    "torque_matrix",
    "wrap_angle",
]
