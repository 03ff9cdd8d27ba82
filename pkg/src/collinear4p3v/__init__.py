"""Non-iterative four-point three-view pose solver for collinear cameras.

The solver normalizes each view, builds an exact-rational polynomial
constraint system from the epipolar geometry, eliminates down to a
degree-36 univariate polynomial, and recovers poses and structure from its
real roots.  A synthetic benchmark harness drives noise experiments.
"""

from .errors import NoSolution, SolverError
from .normalize import NormalizedProblem, ProblemInstance, apply_normalization
from .constraints import ReducedSystem, build_reduced_system
from .eliminate import Eliminant, build_eliminant
from .recover import PoseSolution, solve
from .synth import (
    GroundTruth,
    RationalScene,
    ScenarioConfig,
    add_noise,
    generate_rational_scene,
    generate_scene,
    rot_error,
    run_benchmark,
    transl_error,
)

__version__ = "0.1.0"

__all__ = [
    "Eliminant",
    "GroundTruth",
    "NoSolution",
    "NormalizedProblem",
    "PoseSolution",
    "ProblemInstance",
    "RationalScene",
    "ReducedSystem",
    "ScenarioConfig",
    "SolverError",
    "__version__",
    "add_noise",
    "apply_normalization",
    "build_eliminant",
    "build_reduced_system",
    "generate_rational_scene",
    "generate_scene",
    "rot_error",
    "run_benchmark",
    "solve",
    "transl_error",
]
