"""Lambert-W closed forms of the two-body surrogate of each body.

Each body ``i`` is paired with a point of mass ``mu`` (its two companions)
sitting at the companions' barycenter.  Dropping the centrifugal term and
truncating the binomial expansion of the radial energy integral gives the
implicit law ``r - k ln r = f(t)`` whose explicit inverse is
``r_a(t) = -k W(c4 exp(c5 t))``.  The body's own radius and angle then follow
from the printed double integrals (mode ``paper_closed_form``) or from
numerical quadrature of the same radial law (mode ``semi_analytic``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    AlreadyInvalid,
    BranchDomain,
    DegenerateRadius,
    DomainError,
    NonEscaping,
    QuadratureFailure,
    ThreeBodyError,
    ZeroRadialRate,
)
from .lambert_w import Branch, lambertw
from .model import Convention, PolarState, SurrogateInitials, SystemState, other_indices, surrogate_initials
from .trajectory import Trajectory

__all__ = [
    "SignMode",
    "SolveMode",
    "SurrogateParams",
    "build_params",
    "params_for_body",
    "f_of_t",
    "w_arg",
    "lambert_value",
    "r_a_closed",
    "validity_horizon",
    "radius_closed",
    "theta_closed",
    "printed_radial_rate",
    "printed_angular_rate",
    "radial_rate_model",
    "angular_rate_model",
    "radius_semi_analytic",
    "theta_semi_analytic",
    "implicit_residual",
    "SolveResult",
    "solve_system",
]

TWO_E_M2 = -2.0 * math.exp(-2.0)
DEFAULT_QUAD_TOL = 1e-10
QUAD_LIMIT = 200


class SignMode(str, enum.Enum):
    AUTO = "auto"
    PLUS = "plus"
    MINUS = "minus"


class SolveMode(str, enum.Enum):
    PAPER_CLOSED_FORM = "paper_closed_form"
    SEMI_ANALYTIC = "semi_analytic"


@dataclass(frozen=True)
class SurrogateParams:
    body_index: int
    g_const: float
    mu: float
    m_total: float
    a_const: float
    b_const: float
    k_const: float
    sign: int
    c1: float
    c2: float
    c4: float
    c5: float
    k1: float
    k_lin: float
    k_w: float
    theta_coeff: float
    r_a0: float
    rdot_a0: float
    r_i0: float
    rdot_i0: float
    theta_i0: float
    thetadot_i0: float
    t0: float
    branch: Branch

    @property
    def margin(self) -> float:
        """|A/B| = 2k, the separation below which the binomial step fails."""
        return abs(self.a_const / self.b_const)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in self.__dataclass_fields__}
        d["branch"] = self.branch.value
        return d


def build_params(
    g: float,
    masses,
    i: int,
    initials: SurrogateInitials,
    body: PolarState,
    sign_mode: SignMode | str = SignMode.AUTO,
    branch: Branch | str = Branch.LOWER,
    t0: float = 0.0,
    force: bool = False,
) -> SurrogateParams:
    """Derive every constant of body ``i``'s surrogate.

    Raises :class:`NonEscaping` when B <= 0 unless ``force`` is set, in which
    case the square-root dependent constants come back as NaN (useful only for
    diagnostics).
    """
    branch = Branch(branch)
    sign_mode = SignMode(sign_mode)
    j, k = other_indices(i)
    m = [float(x) for x in masses]
    mu = m[j] + m[k]
    m_total = sum(m)
    r_a0, rdot_a0 = float(initials.r_a0), float(initials.rdot_a0)
    if not r_a0 > 0.0:
        raise DegenerateRadius(f"surrogate radius must be positive, got {r_a0}")

    a = 2.0 * g * m_total
    b = rdot_a0 * rdot_a0 - a / r_a0
    escaping = b > 0.0

    if sign_mode is SignMode.AUTO:
        if rdot_a0 == 0.0 and not force:
            raise ZeroRadialRate(
                f"body {i}: zero surrogate range rate; B = {b!r} <= 0 as well"
            )
        sign = 1 if rdot_a0 >= 0.0 else -1
    else:
        sign = 1 if sign_mode is SignMode.PLUS else -1

    if not escaping and not force:
        raise NonEscaping(f"body {i}: B = {b!r} <= 0, surrogate motion is bound")

    nan = math.nan
    k_const = a / (2.0 * b) if b != 0.0 else math.inf
    if escaping:
        sqrt_b = math.sqrt(b)
        c2 = sign * 2.0 * b * sqrt_b / a
        c1 = -(2.0 * b / a) * math.exp(-(2.0 * b / a) * (r_a0 - k_const * math.log(r_a0)))
        c4 = c1 * math.exp(c2 * t0)
        c5 = -c2
        k1 = -(4.0 * b * b * g * mu) / (a * a)
        k_w = k1 / (2.0 * c5)
    else:
        c1 = c2 = c4 = c5 = k1 = k_w = nan

    params = SurrogateParams(
        body_index=i,
        g_const=float(g),
        mu=mu,
        m_total=m_total,
        a_const=a,
        b_const=b,
        k_const=k_const,
        sign=sign,
        c1=c1,
        c2=c2,
        c4=c4,
        c5=c5,
        k1=k1,
        k_lin=nan,
        k_w=k_w,
        theta_coeff=nan,
        r_a0=r_a0,
        rdot_a0=rdot_a0,
        r_i0=float(body.r),
        rdot_i0=float(body.r_dot),
        theta_i0=float(body.theta),
        thetadot_i0=float(body.theta_dot),
        t0=float(t0),
        branch=branch,
    )
    if not escaping:
        return params

    theta_coeff = 4.0 * r_a0 * r_a0 * body.theta_dot * b * b / (c5 * a * a)
    try:
        w_start = lambert_value(params, t0)
        k_lin = body.r_dot - k_w * (1.0 + 2.0 * w_start)
    except BranchDomain:
        if not force:
            raise
        k_lin = nan
    return _replace(params, k_lin=k_lin, theta_coeff=theta_coeff)


def _replace(p: SurrogateParams, **changes) -> SurrogateParams:
    d = {name: getattr(p, name) for name in p.__dataclass_fields__}
    d.update(changes)
    return SurrogateParams(**d)


def params_for_body(
    sys: SystemState,
    i: int,
    sign_mode=SignMode.AUTO,
    branch=Branch.LOWER,
    convention=Convention.VECTOR,
    force: bool = False,
) -> SurrogateParams:
    """:func:`build_params` fed from a system state."""
    init = surrogate_initials(sys, i, convention)
    return build_params(
        sys.g_const, sys.masses, i, init, sys.bodies[i - 1].state, sign_mode, branch, sys.t, force
    )


def f_of_t(p: SurrogateParams, t: float) -> float:
    return p.sign * math.sqrt(p.b_const) * (t - p.t0) + p.r_a0 - p.k_const * math.log(p.r_a0)


def w_arg(p: SurrogateParams, t: float) -> float:
    """Lambert argument c4*exp(c5*t).

    Evaluated as -exp(-f(t)/k)/k, which is the same quantity but cannot
    overflow or underflow in the intermediate constant c4.
    """
    return -math.exp(-f_of_t(p, t) / p.k_const - math.log(p.k_const))


def lambert_value(p: SurrogateParams, t: float) -> float:
    """W_branch(w_arg(p, t)), with domain failures reported as BranchDomain."""
    z = w_arg(p, t)
    try:
        return lambertw(z, p.branch)
    except DomainError as exc:
        raise BranchDomain(
            f"body {p.body_index}: Lambert argument {z!r} at t={t!r} is outside the "
            f"{p.branch.value} branch domain"
        ) from exc


def r_a_closed(p: SurrogateParams, t: float) -> float:
    return -p.k_const * lambert_value(p, t)


def validity_horizon(p: SurrogateParams) -> float:
    """Last time at which r_a stays above the binomial margin 2k."""
    if not p.r_a0 > 2.0 * p.k_const:
        raise AlreadyInvalid(
            f"body {p.body_index}: r_a0 = {p.r_a0!r} is not above 2k = {2.0 * p.k_const!r}"
        )
    if p.sign > 0:
        return math.inf
    k = p.k_const
    # f(t*) = 2k - k ln(2k): the implicit law at r_a = 2k
    f_star = 2.0 * k - k * math.log(2.0 * k)
    return p.t0 + (p.r_a0 - k * math.log(p.r_a0) - f_star) / math.sqrt(p.b_const)


def _bracket(w: float) -> float:
    return 0.5 * w ** 4 + w ** 3 + 0.5 * w ** 2


def _theta_term(w: float) -> float:
    return (1.0 + 2.0 * w) * w * w


def radius_closed(p: SurrogateParams, t: float) -> float:
    """Body radius from the printed double-integral formula.

    Paired t and t0 terms are grouped so the t0 value is exactly r_i0.
    """
    if t == p.t0 or p.k_w == 0.0:
        return p.r_i0 + p.k_lin * (t - p.t0)
    w_t = lambert_value(p, t)
    w_0 = lambert_value(p, p.t0)
    return p.k_lin * (t - p.t0) + (p.k_w / p.c5) * (_bracket(w_t) - _bracket(w_0)) + p.r_i0


def theta_closed(p: SurrogateParams, t: float) -> float:
    if t == p.t0 or p.theta_coeff == 0.0:
        return p.theta_i0
    w_t = lambert_value(p, t)
    w_0 = lambert_value(p, p.t0)
    return p.theta_i0 + p.theta_coeff * (_theta_term(w_0) - _theta_term(w_t))


def printed_radial_rate(p: SurrogateParams, t: float) -> float:
    """Exact time derivative of :func:`radius_closed`.

    Uses dW/dt = c5 W / (1 + W).  This is not rdot_i0 at t0: the printed
    radius formula does not honour its own initial-rate condition.
    """
    if p.k_w == 0.0:
        return p.k_lin
    w = lambert_value(p, t)
    return p.k_lin + p.k_w * w * w * (2.0 * w + 1.0)


def printed_angular_rate(p: SurrogateParams, t: float) -> float:
    """Exact time derivative of :func:`theta_closed`."""
    if p.theta_coeff == 0.0:
        return 0.0
    w = lambert_value(p, t)
    return -p.theta_coeff * p.c5 * 2.0 * w * w * (3.0 * w + 1.0) / (1.0 + w)


def radial_rate_model(p: SurrogateParams, t: float) -> float:
    """rdot_i0 - G mu * integral of r_a^-2, integrated exactly.

    Along the Lambert separation dr_a/dt = sign sqrt(B) r_a / (r_a - k), so
    the integral of r_a^-2 dt is (k / (2 r_a^2) - 1 / r_a) / (sign sqrt(B)).
    """
    if t == p.t0 or p.mu == 0.0:
        return p.rdot_i0

    def anti(r):
        return p.k_const / (2.0 * r * r) - 1.0 / r

    rate = p.sign * math.sqrt(p.b_const)
    return p.rdot_i0 - p.g_const * p.mu * (anti(r_a_closed(p, t)) - anti(p.r_a0)) / rate


def angular_rate_model(p: SurrogateParams, r: float) -> float:
    """Angular rate at body radius ``r`` from conservation of r^2 dtheta/dt."""
    return p.r_i0 * p.r_i0 * p.thetadot_i0 / (r * r)


def _quad(func, a: float, b: float, tol: float, what: str) -> float:
    res = integrate.quad(func, a, b, epsrel=tol, epsabs=0.0, limit=QUAD_LIMIT, full_output=1)
    val, err = res[0], res[1]
    # a fourth element carries the failure message (ier > 0)
    if len(res) > 3 or not math.isfinite(val):
        raise QuadratureFailure(f"{what}: tolerance {tol:g} not reached (estimate {err:g})")
    return val


def radius_semi_analytic(p: SurrogateParams, t: float, quad_tol: float = DEFAULT_QUAD_TOL) -> tuple[float, float]:
    """Radius and radial rate from quadrature of r'' = -G mu / r_a(t)^2.

    The repeated integral for the radius is folded into a single weighted
    integral: r(t) = r_i0 + rdot_i0 (t - t0) - G mu int (t - tau) / r_a(tau)^2.
    """
    if not quad_tol > 0.0:
        raise ValueError("quad_tol must be positive")
    dt = t - p.t0
    if dt == 0.0 or p.mu == 0.0:
        return p.r_i0 + p.rdot_i0 * dt, p.rdot_i0

    i1 = _quad(lambda tau: r_a_closed(p, tau) ** -2, p.t0, t, quad_tol, "radial rate")
    return _radius_only(p, t, quad_tol), p.rdot_i0 - p.g_const * p.mu * i1


def _radius_only(p: SurrogateParams, t: float, quad_tol: float) -> float:
    dt = t - p.t0
    if dt == 0.0 or p.mu == 0.0:
        return p.r_i0 + p.rdot_i0 * dt
    i2 = _quad(lambda tau: (t - tau) * r_a_closed(p, tau) ** -2, p.t0, t, quad_tol, "radius")
    return p.r_i0 + p.rdot_i0 * dt - p.g_const * p.mu * i2


def theta_semi_analytic(p: SurrogateParams, t: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Angle from conservation of r^2 dtheta/dt along the semi-analytic radius."""
    if t == p.t0 or p.thetadot_i0 == 0.0:
        return p.theta_i0
    inner_tol = 0.1 * quad_tol
    h = p.r_i0 * p.r_i0 * p.thetadot_i0

    def rate(tau):
        r = _radius_only(p, tau, inner_tol)
        if r == 0.0:
            raise QuadratureFailure(f"body {p.body_index}: radius reaches zero at t={tau!r}")
        return h / (r * r)

    return p.theta_i0 + _quad(rate, p.t0, t, quad_tol, "angle")


def implicit_residual(p: SurrogateParams, t: float) -> float:
    r = r_a_closed(p, t)
    return r - p.k_const * math.log(r) - f_of_t(p, t)


@dataclass
class SolveResult:
    trajectories: list
    params: list
    errors: list

    def ok(self, i: int) -> bool:
        return self.errors[i - 1] is None


def _body_samples(p: SurrogateParams, mode: SolveMode, times: np.ndarray, quad_tol: float):
    """Samples up to the first quadrature breakdown, and that failure (or None)."""
    out = np.empty((len(times), 4))
    for n, t in enumerate(times):
        t = float(t)
        if t == p.t0:
            out[n] = (p.r_i0, p.theta_i0, p.rdot_i0, p.thetadot_i0)
            continue
        if mode is SolveMode.PAPER_CLOSED_FORM:
            r = radius_closed(p, t)
            out[n] = (r, theta_closed(p, t), radial_rate_model(p, t), angular_rate_model(p, r))
            continue
        try:
            r, rdot = radius_semi_analytic(p, t, quad_tol)
            out[n] = (r, theta_semi_analytic(p, t, quad_tol), rdot, angular_rate_model(p, r))
        except QuadratureFailure as exc:
            # the integrals stop existing (e.g. the radius passes through zero);
            # keep the prefix, as for the validity horizon
            if n == 0:
                raise
            return times[:n], out[:n], exc
    return times, out, None


def solve_system(
    sys: SystemState,
    sign_mode=SignMode.AUTO,
    branch=Branch.LOWER,
    convention=Convention.VECTOR,
    mode=SolveMode.PAPER_CLOSED_FORM,
    horizon: float = 1.0,
    samples: int = 101,
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> SolveResult:
    """Sample every body's closed-form (or semi-analytic) path.

    ``horizon`` is an absolute end time; each body's interval is clipped to
    its own validity horizon.  A body whose surrogate cannot be built keeps
    its exception in ``errors`` and a ``None`` trajectory; a semi-analytic
    body whose quadrature breaks down mid-interval keeps the samples before
    the failure and the failure in ``errors``.
    """
    mode = SolveMode(mode)
    if samples < 2:
        raise ValueError("need at least two samples")
    if not horizon > sys.t:
        raise ValueError(f"horizon {horizon!r} must exceed the start time {sys.t!r}")
    trajs, params, errors = [], [], []
    for i in (1, 2, 3):
        try:
            p = params_for_body(sys, i, sign_mode, branch, convention)
            params.append(p)
            end = min(horizon, validity_horizon(p))
            times, data, failure = _body_samples(p, mode, np.linspace(sys.t, end, samples), quad_tol)
        except ThreeBodyError as exc:
            if len(params) < i:
                params.append(None)
            trajs.append(None)
            errors.append(exc)
            continue
        trajs.append(
            Trajectory(
                times,
                data,
                mode.value,
                (i,),
                horizon=float(times[-1]),
                masses=tuple(float(m) for m in sys.masses),
                g_const=sys.g_const,
                meta={"quad_tol": quad_tol} if mode is SolveMode.SEMI_ANALYTIC else {},
            )
        )
        errors.append(failure)
    return SolveResult(trajs, params, errors)
