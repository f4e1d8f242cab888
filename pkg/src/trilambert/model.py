"""Planar kinematic state, polar/Cartesian geometry and surrogate initial data."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateRadius, ZeroMassPair

__all__ = [
    "PolarState",
    "Body",
    "SystemState",
    "Convention",
    "SurrogateInitials",
    "polar_to_cartesian",
    "cartesian_to_polar",
    "separation_sq",
    "unit_diff_norm",
    "resolve_unit",
    "pair_barycenter",
    "to_com_frame",
    "surrogate_initials",
    "other_indices",
]


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class PolarState:
    """Planar polar state of one body. ``theta`` is not wrapped.

    Non-finite fields are representable so that validity checks can report
    them; use :attr:`is_finite` before doing arithmetic.
    """

    r: float
    theta: float
    r_dot: float
    theta_dot: float

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError(f"negative radius {self.r}")

    @property
    def is_finite(self) -> bool:
        return _finite(self.r, self.theta, self.r_dot, self.theta_dot)


@dataclass(frozen=True)
class Body:
    mass: float
    state: PolarState

    def __post_init__(self):
        # zero mass is screened at the scenario layer (allow_zero_mass)
        if not math.isfinite(self.mass) or self.mass < 0.0:
            raise ValueError(f"invalid mass {self.mass}")


@dataclass(frozen=True)
class SystemState:
    g_const: float
    bodies: tuple[Body, Body, Body]
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        if len(self.bodies) != 3:
            raise ValueError("a system needs exactly three bodies")
        if not (math.isfinite(self.g_const) and self.g_const > 0.0):
            raise ValueError(f"gravitational constant must be positive, got {self.g_const}")

    @property
    def masses(self) -> np.ndarray:
        return np.array([b.mass for b in self.bodies])

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities as two (3, 2) arrays."""
        pos = np.empty((3, 2))
        vel = np.empty((3, 2))
        for n, b in enumerate(self.bodies):
            pos[n], vel[n] = polar_to_cartesian(b.state)
        return pos, vel

    @classmethod
    def from_cartesian(cls, g_const, masses, pos, vel, t=0.0) -> "SystemState":
        """Build from Cartesian arrays.  A body exactly at the origin gets r = 0
        with its angle along the velocity, which converts back exactly."""
        bodies = tuple(
            Body(float(m), _polar_or_origin(p, v)) for m, p, v in zip(masses, pos, vel)
        )
        return cls(g_const, bodies, t)


class Convention(str, enum.Enum):
    VECTOR = "vector"
    PAPER = "paper"


class SurrogateInitials(NamedTuple):
    r_a0: float
    rdot_a0: float
    theta0: float
    thetadot0: float


def polar_to_cartesian(s: PolarState) -> tuple[np.ndarray, np.ndarray]:
    c, sn = math.cos(s.theta), math.sin(s.theta)
    pos = np.array([s.r * c, s.r * sn])
    vel = np.array([s.r_dot * c - s.r * s.theta_dot * sn, s.r_dot * sn + s.r * s.theta_dot * c])
    return pos, vel


def cartesian_to_polar(position, velocity) -> PolarState:
    x, y = float(position[0]), float(position[1])
    vx, vy = float(velocity[0]), float(velocity[1])
    r = math.hypot(x, y)
    if r == 0.0:
        raise DegenerateRadius("polar angle undefined at the origin")
    return PolarState(r, math.atan2(y, x), (x * vx + y * vy) / r, (x * vy - y * vx) / (r * r))


def _polar_or_origin(position, velocity) -> PolarState:
    if float(position[0]) == 0.0 and float(position[1]) == 0.0:
        vx, vy = float(velocity[0]), float(velocity[1])
        return PolarState(0.0, math.atan2(vy, vx), math.hypot(vx, vy), 0.0)
    return cartesian_to_polar(position, velocity)


def separation_sq(a: PolarState, b: PolarState) -> float:
    """Squared distance between two bodies from their polar coordinates."""
    return a.r * a.r + b.r * b.r - 2.0 * a.r * b.r * math.cos(b.theta - a.theta)


def unit_diff_norm(delta_theta: float) -> float:
    """Length of the difference of two radial unit vectors ``delta_theta`` apart."""
    return math.sqrt(2.0) * math.sqrt(max(0.0, 1.0 - math.cos(delta_theta)))


def resolve_unit(theta_src: float, theta_dst: float) -> tuple[float, float]:
    """Components of the radial unit vector at ``theta_src`` along the radial and
    transverse unit vectors at ``theta_dst``."""
    d = theta_src - theta_dst
    return math.cos(d), math.sin(d)


def pair_barycenter(m_j: float, s_j: PolarState, m_k: float, s_k: PolarState):
    total = m_j + m_k
    if total == 0.0:
        raise ZeroMassPair("barycenter of two massless bodies")
    pj, vj = polar_to_cartesian(s_j)
    pk, vk = polar_to_cartesian(s_k)
    return (m_j * pj + m_k * pk) / total, (m_j * vj + m_k * vk) / total


def to_com_frame(sys: SystemState) -> SystemState:
    m = sys.masses
    pos, vel = sys.cartesian()
    total = m.sum()
    com = m @ pos / total
    vcom = m @ vel / total
    return SystemState.from_cartesian(sys.g_const, m, pos - com, vel - vcom, sys.t)


def other_indices(i: int) -> tuple[int, int]:
    """Zero-based indices of the two companions of 1-based body ``i``."""
    if i not in (1, 2, 3):
        raise ValueError(f"body index must be 1, 2 or 3, got {i!r}")
    others = [n for n in range(3) if n != i - 1]
    return others[0], others[1]


def surrogate_initials(
    sys: SystemState, i: int, convention: Convention | str = Convention.VECTOR
) -> SurrogateInitials:
    """Initial data of body ``i``'s two-body surrogate.

    ``vector`` measures the separation from the companions' barycenter and its
    range rate; ``paper`` identifies the surrogate radius with the body's own
    radius.  The angle and angular rate are the body's own in both cases.
    """
    j, k = other_indices(i)
    own = sys.bodies[i - 1]
    s = own.state
    if Convention(convention) is Convention.PAPER:
        return SurrogateInitials(s.r, s.r_dot, s.theta, s.theta_dot)
    bj, bk = sys.bodies[j], sys.bodies[k]
    bpos, bvel = pair_barycenter(bj.mass, bj.state, bk.mass, bk.state)
    pos, vel = polar_to_cartesian(s)
    dpos = pos - bpos
    dvel = vel - bvel
    dist = math.hypot(dpos[0], dpos[1])
    if dist == 0.0:
        raise DegenerateRadius(f"body {i} sits on its companions' barycenter")
    rate = float(dpos @ dvel) / dist
    return SurrogateInitials(dist, rate, s.theta, s.theta_dot)
