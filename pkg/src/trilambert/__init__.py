"""Lambert-W closed forms for a barycentric surrogate of the planar three-body
problem, with a Newtonian reference integrator and a validity monitor."""

from .closed_form import (
    SignMode,
    SolveMode,
    SurrogateParams,
    build_params,
    params_for_body,
    r_a_closed,
    radius_closed,
    radius_semi_analytic,
    solve_system,
    theta_closed,
    theta_semi_analytic,
    validity_horizon,
)
from .errors import ThreeBodyError
from .lambert_w import Branch, lambertw, w0, wm1
from .model import Body, Convention, PolarState, SystemState
from .oracle import integrate, integrate_surrogate_full, integrate_surrogate_radial
from .trajectory import Trajectory
from .validity import ValidityReport, monitor

__version__ = "0.1.0"
