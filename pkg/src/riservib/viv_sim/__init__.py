"""Time-domain VIV prediction: strip force model, rigid-cylinder and
flexible-riser solvers, and prediction-error evaluation."""
from .evaluate import ClusterErrorRow, evaluate_predictions
from .forces import (EmpiricalParameters, StripState, advance_phase,
                     hydro_force, instantaneous_velocity_phase,
                     synchronization_frequency)
from .result import SimResult
from .rigid import RigidCylinderConfig, lockin_curve, power_balance, \
    simulate_rigid_cylinder
from .riser import simulate_riser
from .structure import BeamModel, build_beam_model, effective_tension, hermite_eval

__all__ = [
    "BeamModel", "ClusterErrorRow", "EmpiricalParameters",
    "RigidCylinderConfig", "SimResult", "StripState", "advance_phase",
    "build_beam_model", "effective_tension", "evaluate_predictions",
    "hermite_eval", "hydro_force", "instantaneous_velocity_phase",
    "lockin_curve", "power_balance", "simulate_rigid_cylinder",
    "simulate_riser", "synchronization_frequency",
]
