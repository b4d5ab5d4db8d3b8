"""dshock: a numerical laboratory for weak asymptotic delta shock cascades
(delta, delta', delta'' waves) on the 2-pi torus."""

from .cascade import SchemeParams, SystemSpec, ps4_system
from .diagnostics import (
    characteristics_oracle,
    estimate_delta_power,
    l1_norm,
    oracle_from_expression,
    shock_area,
    sup_error,
    weak_residual,
)
from .errors import DshockError
from .grid import Field, Grid, integrate, make_field, make_grid, primitive
from .ladder import run_convergence_study, run_residual_study, run_scale_study
from .mollifier import Kernel, build_kernel, convolve, convolve_derivative
from .scenario import (
    Scenario,
    bundled_scenario_path,
    format_scenario,
    load_scenario,
    parse_scenario,
)
from .timeint import Trajectory, run
from .velocity import VelocitySpec, riemann_velocity

__version__ = "0.1.0"

__all__ = [
    "DshockError",
    "Field",
    "Grid",
    "Kernel",
    "Scenario",
    "SchemeParams",
    "SystemSpec",
    "Trajectory",
    "VelocitySpec",
    "build_kernel",
    "bundled_scenario_path",
    "characteristics_oracle",
    "convolve",
    "convolve_derivative",
    "estimate_delta_power",
    "format_scenario",
    "integrate",
    "l1_norm",
    "load_scenario",
    "make_field",
    "make_grid",
    "oracle_from_expression",
    "parse_scenario",
    "primitive",
    "ps4_system",
    "riemann_velocity",
    "run",
    "run_convergence_study",
    "run_residual_study",
    "run_scale_study",
    "shock_area",
    "sup_error",
    "weak_residual",
]
