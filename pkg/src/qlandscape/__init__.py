"""Numerical control-landscape analysis for a driven qubit."""
from .dynamics import (
    ControlGrid,
    ControlTask,
    QubitSystem,
    bloch_path,
    gradient,
    objective,
    objective_and_gradient,
    propagate,
)
from .landscape import CriticalPointReport, build_kernel_spec, classify_critical_point, hessian_spectrum
from .optimizer import OptimizerConfig, gradient_ascent, multistart
from .su2 import BlochVector, Hermitian2, Unitary2
from .theorems import check_all, theorem1_report, theorem2_report, theorem3_report

__version__ = "0.1.0"
