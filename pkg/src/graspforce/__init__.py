"""Contact force allocation and closed-loop force control for multi-fingered grasps.

The package covers the full loop: contact frame geometry, friction-cone force
optimization (a small dense SOCP solved by an interior-point method), online
friction/weight estimation from tactile readings, joint-space PID force
tracking on a simplified hand model, and a quasi-static rigid-body grasp
simulator with Coulomb stick-slip contacts used as ground truth.
"""

from graspforce.contact_geometry import (
    ContactFrame,
    RotationAxis,
    build_contact_frame,
    is_collinear,
    local_to_world,
    rotational_slip_bound,
    slip_displacement,
    world_to_local,
)
from graspforce.cone_program import (
    ConeBounds,
    ConeProblem,
    adaptive_lower_bounds,
    assemble,
    feasibility_residuals,
    objective,
)
from graspforce.socp import SolverSettings, Solution, oracle_solve, solve

__all__ = [
    "ContactFrame",
    "RotationAxis",
    "build_contact_frame",
    "is_collinear",
    "local_to_world",
    "rotational_slip_bound",
    "slip_displacement",
    "world_to_local",
    "ConeBounds",
    "ConeProblem",
    "adaptive_lower_bounds",
    "assemble",
    "feasibility_residuals",
    "objective",
    "SolverSettings",
    "Solution",
    "oracle_solve",
    "solve",
]

__version__ = "0.1.0"
