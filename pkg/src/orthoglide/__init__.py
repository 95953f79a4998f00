"""Kinematic, workspace, stiffness and sensitivity analysis of
Orthoglide-type translational parallel kinematic machines."""

from .core import (
    Cube,
    JointLimitWarning,
    MachineParams,
    OrthoglideError,
    ParameterError,
    PoseDeviation,
    Singular,
    SymMat6,
    Unreachable,
    Wrench,
    validate_params,
)
from .kinematics import (
    diagonal_spectrum,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    transmission_factors,
)
from .synthesis import SynthesisReport, SynthesisSpec, synthesize
from .workspace import cube_inclusion_check, grid_map, interval_certify
from .stiffness import (
    DEFAULT_STIFFNESS,
    LegStiffnessParams,
    milling_case_study,
    total_stiffness,
)
from .sensitivity import ToleranceSpec, monte_carlo_accuracy, position_sensitivity

__version__ = "0.1.0"


__all__ = [
    "Cube",
    "JointLimitWarning",
    "MachineParams",
    "OrthoglideError",
    "ParameterError",
    "PoseDeviation",
    "Singular",
    "SymMat6",
    "Unreachable",
    "Wrench",
    "validate_params",
    "diagonal_spectrum",
    "forward_kinematics",
    "inverse_kinematics",
    "jacobian",
    "transmission_factors",
    "SynthesisReport",
    "SynthesisSpec",
    "synthesize",
    "cube_inclusion_check",
    "grid_map",
    "interval_certify",
    "DEFAULT_STIFFNESS",
    "LegStiffnessParams",
    "milling_case_study",
    "total_stiffness",
    "ToleranceSpec",
    "monte_carlo_accuracy",
    "position_sensitivity",
]
