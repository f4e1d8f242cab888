"""Numerical ground truth for the planar three-body problem.

Two vector fields are available: true Newtonian gravity (``newton``) and the
printed unit-vector-difference direction law (``paper``), which agrees with
gravity only for pairs at equal radii.  Both are integrated in Cartesian
coordinates.  The two surrogate two-body systems (with and without the
centrifugal term) are integrated here as well.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CollinearSingularity, CollisionSingularity, DegenerateRadius
from .integrator import dopri5
from .model import SurrogateInitials, SystemState
from .trajectory import Trajectory, cartesian_to_polar_arrays

__all__ = [
    "Field",
    "ConservedQuantities",
    "accel_newton",
    "accel_paper",
    "integrate",
    "integrate_surrogate_full",
    "integrate_surrogate_radial",
    "integrate_driven_radius",
    "conserved",
    "conserved_along",
    "kepler_two_body",
]

DEFAULT_SAMPLES = 101


class Field(str, enum.Enum):
    NEWTON = "newton"
    PAPER = "paper"


@dataclass(frozen=True)
class ConservedQuantities:
    energy: float
    angular_momentum: float
    linear_momentum: np.ndarray
    com: np.ndarray


_PAIRS = ((0, 1), (0, 2), (1, 2))


def _newton_acc(g, m, x):
    """x: flat (x1, y1, x2, y2, x3, y3); returns flat accelerations."""
    acc = [0.0] * 6
    for i, j in _PAIRS:
        dx = x[2 * j] - x[2 * i]
        dy = x[2 * j + 1] - x[2 * i + 1]
        d2 = dx * dx + dy * dy
        if d2 == 0.0:
            raise CollisionSingularity(f"bodies {i + 1} and {j + 1} collide")
        inv3 = g / (d2 * math.sqrt(d2))
        acc[2 * i] += m[j] * dx * inv3
        acc[2 * i + 1] += m[j] * dy * inv3
        acc[2 * j] -= m[i] * dx * inv3
        acc[2 * j + 1] -= m[i] * dy * inv3
    return acc


def _paper_acc(g, m, x):
    units = []
    for n in range(3):
        px, py = x[2 * n], x[2 * n + 1]
        r = math.hypot(px, py)
        if r == 0.0:
            raise DegenerateRadius(f"body {n + 1} at the origin has no radial unit vector")
        units.append((px / r, py / r))
    acc = [0.0] * 6
    for i, j in _PAIRS:
        dx = x[2 * j] - x[2 * i]
        dy = x[2 * j + 1] - x[2 * i + 1]
        d2 = dx * dx + dy * dy
        if d2 == 0.0:
            raise CollisionSingularity(f"bodies {i + 1} and {j + 1} collide")
        ux = units[j][0] - units[i][0]
        uy = units[j][1] - units[i][1]
        un = math.hypot(ux, uy)
        if un == 0.0:
            raise CollinearSingularity(
                f"bodies {i + 1} and {j + 1} share a polar angle; direction undefined"
            )
        s = g / (d2 * un)
        acc[2 * i] += m[j] * ux * s
        acc[2 * i + 1] += m[j] * uy * s
        acc[2 * j] -= m[i] * ux * s
        acc[2 * j + 1] -= m[i] * uy * s
    return acc


_ACCEL = {Field.NEWTON: _newton_acc, Field.PAPER: _paper_acc}


def accel_newton(sys: SystemState) -> np.ndarray:
    """Newtonian accelerations, shape (3, 2)."""
    pos, _ = sys.cartesian()
    return np.array(_newton_acc(sys.g_const, list(sys.masses), pos.ravel().tolist())).reshape(3, 2)


def accel_paper(sys: SystemState) -> np.ndarray:
    """Accelerations under the unit-vector-difference direction law, shape (3, 2)."""
    pos, _ = sys.cartesian()
    return np.array(_paper_acc(sys.g_const, list(sys.masses), pos.ravel().tolist())).reshape(3, 2)


def _rhs(field: Field, g: float, masses):
    acc_fn = _ACCEL[Field(field)]
    m = [float(v) for v in masses]

    def rhs(t, y):
        yl = y.tolist()
        return np.array(yl[6:] + acc_fn(g, m, yl[:6]))

    return rhs


def _time_grid(t0, t_end, t_eval, samples):
    if t_eval is not None:
        return np.asarray(t_eval, dtype=float)
    return np.linspace(t0, t_end, samples)


def integrate(
    field: Field | str,
    sys: SystemState,
    t_end: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_steps: int = 1_000_000,
    t_eval=None,
    samples: int = DEFAULT_SAMPLES,
) -> Trajectory:
    """Integrate the three-body system and return it sampled in polar form."""
    field = Field(field)
    pos, vel = sys.cartesian()
    y0 = np.concatenate([pos.ravel(), vel.ravel()])
    times, ys, stats = dopri5(
        _rhs(field, sys.g_const, sys.masses),
        sys.t,
        y0,
        t_end,
        _time_grid(sys.t, t_end, t_eval, samples),
        rel_tol,
        abs_tol,
        max_steps,
    )
    p = ys[:, :6].reshape(-1, 3, 2)
    v = ys[:, 6:].reshape(-1, 3, 2)
    polar = cartesian_to_polar_arrays(p, v)
    # keep the caller's unwrapped starting angles
    start = np.array([b.state.theta for b in sys.bodies])
    polar[:, :, 1] += np.round((start - polar[0, :, 1]) / (2 * math.pi)) * 2 * math.pi
    return Trajectory(
        times,
        polar,
        f"oracle_{field.value}",
        (1, 2, 3),
        stats=stats,
        horizon=float(t_end),
        masses=tuple(float(m) for m in sys.masses),
        g_const=sys.g_const,
    )


def integrate_surrogate_full(
    g: float,
    m_total: float,
    initials: SurrogateInitials,
    t_end: float,
    t0: float = 0.0,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-14,
    max_steps: int = 1_000_000,
    t_eval=None,
    samples: int = DEFAULT_SAMPLES,
    body_id: int = 1,
) -> Trajectory:
    """Separation coordinate under r'' = r thetadot^2 - G M / r^2 (full central force)."""
    if not initials.r_a0 > 0.0:
        raise DegenerateRadius("surrogate radius must be positive")
    gm = g * m_total
    r, th, rd, thd = initials.r_a0, initials.theta0, initials.rdot_a0, initials.thetadot0
    c, s = math.cos(th), math.sin(th)
    y0 = [r * c, r * s, rd * c - r * thd * s, rd * s + r * thd * c]

    def rhs(t, y):
        x, yy, vx, vy = y.tolist()
        d2 = x * x + yy * yy
        if d2 == 0.0:
            raise CollisionSingularity("surrogate separation reached zero")
        f = -gm / (d2 * math.sqrt(d2))
        return np.array([vx, vy, f * x, f * yy])

    times, ys, stats = dopri5(
        rhs, t0, y0, t_end, _time_grid(t0, t_end, t_eval, samples), rel_tol, abs_tol, max_steps
    )
    polar = cartesian_to_polar_arrays(ys[:, None, :2], ys[:, None, 2:])
    polar[:, :, 1] += np.round((th - polar[0, :, 1]) / (2 * math.pi)) * 2 * math.pi
    return Trajectory(times, polar, "surrogate_full", (body_id,), stats=stats, horizon=float(t_end))


def integrate_surrogate_radial(
    g: float,
    m_total: float,
    initials: SurrogateInitials,
    t_end: float,
    t0: float = 0.0,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-14,
    max_steps: int = 1_000_000,
    t_eval=None,
    samples: int = DEFAULT_SAMPLES,
    body_id: int = 1,
) -> Trajectory:
    """Separation coordinate under r'' = -G M / r^2 with the centrifugal term dropped;
    the angle follows from r^2 thetadot = r_a0^2 thetadot_0."""
    if not initials.r_a0 > 0.0:
        raise DegenerateRadius("surrogate radius must be positive")
    gm = g * m_total
    h = initials.r_a0 ** 2 * initials.thetadot0

    def rhs(t, y):
        r, rd, _ = y.tolist()
        if r <= 0.0:
            raise CollisionSingularity("surrogate separation reached zero")
        return np.array([rd, -gm / (r * r), h / (r * r)])

    y0 = [initials.r_a0, initials.rdot_a0, initials.theta0]
    times, ys, stats = dopri5(
        rhs, t0, y0, t_end, _time_grid(t0, t_end, t_eval, samples), rel_tol, abs_tol, max_steps
    )
    polar = np.stack([ys[:, 0], ys[:, 2], ys[:, 1], h / ys[:, 0] ** 2], axis=-1)
    return Trajectory(times, polar, "surrogate_radial", (body_id,), stats=stats, horizon=float(t_end))


def integrate_driven_radius(
    g: float,
    mu: float,
    r_a_of_t,
    r0: float,
    rdot0: float,
    theta0: float,
    thetadot0: float,
    t_end: float,
    t0: float = 0.0,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-14,
    t_eval=None,
    samples: int = DEFAULT_SAMPLES,
    body_id: int = 1,
) -> Trajectory:
    """Body radius under r'' = -G mu / r_a(t)^2 for a prescribed separation
    history ``r_a_of_t``, with the angle from r^2 thetadot = const."""
    gm = g * mu
    h = r0 * r0 * thetadot0

    def rhs(t, y):
        r, rd, _ = y.tolist()
        ra = r_a_of_t(t)
        return np.array([rd, -gm / (ra * ra), h / (r * r)])

    times, ys, stats = dopri5(
        rhs, t0, [r0, rdot0, theta0], t_end, _time_grid(t0, t_end, t_eval, samples), rel_tol, abs_tol
    )
    polar = np.stack([ys[:, 0], ys[:, 2], ys[:, 1], h / ys[:, 0] ** 2], axis=-1)
    return Trajectory(times, polar, "driven_radius", (body_id,), stats=stats, horizon=float(t_end))


def _energy_terms(g, m, pos, vel):
    kinetic = 0.5 * np.sum(m[:, None] * vel * vel, axis=(-1, -2))
    potential = 0.0
    for i, j in _PAIRS:
        d = np.linalg.norm(pos[..., j, :] - pos[..., i, :], axis=-1)
        if np.any(d == 0.0):
            raise CollisionSingularity(f"bodies {i + 1} and {j + 1} collide")
        potential = potential - g * m[i] * m[j] / d
    return kinetic + potential


def conserved(sys: SystemState) -> ConservedQuantities:
    m = sys.masses
    pos, vel = sys.cartesian()
    energy = float(_energy_terms(sys.g_const, m, pos, vel))
    ang = float(np.sum(m * (pos[:, 0] * vel[:, 1] - pos[:, 1] * vel[:, 0])))
    mom = m @ vel
    com = m @ pos / m.sum()
    return ConservedQuantities(energy, ang, mom, com)


def conserved_along(traj: Trajectory) -> dict:
    """Energy, angular momentum, momentum and COM at every sample of a three-body trajectory."""
    if traj.masses is None or traj.g_const is None:
        raise ValueError("trajectory lacks masses / gravitational constant")
    m = np.asarray(traj.masses, dtype=float)
    pos, vel = traj.cartesian()
    return {
        "energy": _energy_terms(traj.g_const, m, pos, vel),
        "angular_momentum": np.sum(m * (pos[..., 0] * vel[..., 1] - pos[..., 1] * vel[..., 0]), axis=-1),
        "linear_momentum": np.einsum("b,nbk->nk", m, vel),
        "com": np.einsum("b,nbk->nk", m, pos) / m.sum(),
    }


def kepler_two_body(gm: float, r0, v0, dt: float, tol: float = 1e-15):
    """Relative two-body motion over ``dt`` for a bound orbit.

    Solves Kepler's equation in eccentric-anomaly difference form with Newton
    iteration and applies the Lagrange f and g coefficients.
    """
    r0 = np.asarray(r0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    rn = float(np.linalg.norm(r0))
    vv = float(v0 @ v0)
    inv_a = 2.0 / rn - vv / gm
    if inv_a <= 0.0:
        raise ValueError("kepler_two_body handles bound (elliptic) orbits only")
    a = 1.0 / inv_a
    n = math.sqrt(gm * inv_a ** 3)
    sigma = float(r0 @ v0) / math.sqrt(gm)
    sqa = math.sqrt(a)
    m_anom = n * dt
    de = m_anom
    for _ in range(100):
        s, c = math.sin(de), math.cos(de)
        fval = de + sigma / sqa * (1.0 - c) - (1.0 - rn / a) * s - m_anom
        fder = 1.0 + sigma / sqa * s - (1.0 - rn / a) * c
        step = fval / fder
        de -= step
        if abs(step) <= tol * max(1.0, abs(de)):
            break
    s, c = math.sin(de), math.cos(de)
    r = a + (rn - a) * c + sigma * sqa * s
    f = 1.0 - a / rn * (1.0 - c)
    g = dt - (de - s) / n
    fdot = -math.sqrt(gm * a) / (r * rn) * s
    gdot = 1.0 - a / r * (1.0 - c)
    return f * r0 + g * v0, fdot * r0 + gdot * v0
