"""Sampled trajectories shared by the closed-form, oracle and harness layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntegratorStats", "Trajectory", "polar_to_cartesian_arrays", "cartesian_to_polar_arrays"]


@dataclass(frozen=True)
class IntegratorStats:
    n_steps: int
    n_rejected: int
    n_fev: int
    rel_tol: float
    abs_tol: float


def polar_to_cartesian_arrays(polar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised polar -> Cartesian for arrays whose last axis is (r, theta, r_dot, theta_dot)."""
    r, th, rd, thd = np.moveaxis(polar, -1, 0)
    c, s = np.cos(th), np.sin(th)
    pos = np.stack([r * c, r * s], axis=-1)
    vel = np.stack([rd * c - r * thd * s, rd * s + r * thd * c], axis=-1)
    return pos, vel


def cartesian_to_polar_arrays(pos: np.ndarray, vel: np.ndarray, unwrap_axis: int | None = 0) -> np.ndarray:
    """Inverse of :func:`polar_to_cartesian_arrays`; angles are unwrapped along
    ``unwrap_axis`` so histories stay continuous."""
    x, y = pos[..., 0], pos[..., 1]
    vx, vy = vel[..., 0], vel[..., 1]
    r = np.hypot(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        rd = (x * vx + y * vy) / r
        thd = (x * vy - y * vx) / (r * r)
    th = np.arctan2(y, x)
    at_origin = r == 0.0
    if np.any(at_origin):
        # angle along the velocity, all speed radial: exact on conversion back
        th = np.where(at_origin, np.arctan2(vy, vx), th)
        rd = np.where(at_origin, np.hypot(vx, vy), rd)
        thd = np.where(at_origin, 0.0, thd)
    if unwrap_axis is not None and th.shape[unwrap_axis] > 1:
        th = np.unwrap(th, axis=unwrap_axis)
    return np.stack([r, th, rd, thd], axis=-1)


@dataclass
class Trajectory:
    """Time-ordered samples of one or more bodies.

    ``polar`` has shape (n_samples, n_bodies, 4) with columns
    (r, theta, r_dot, theta_dot).  ``body_ids`` holds the 1-based labels of
    the stored bodies.
    """

    times: np.ndarray
    polar: np.ndarray
    mode: str
    body_ids: tuple[int, ...] = (1, 2, 3)
    stats: IntegratorStats | None = None
    horizon: float | None = None
    masses: tuple[float, ...] | None = None
    g_const: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.polar = np.asarray(self.polar, dtype=float)
        if self.polar.ndim == 2:
            self.polar = self.polar[:, None, :]
        self.body_ids = tuple(int(b) for b in self.body_ids)
        n = len(self.times)
        if n == 0:
            raise ValueError("empty trajectory")
        if self.polar.shape != (n, len(self.body_ids), 4):
            raise ValueError(
                f"state array shape {self.polar.shape} does not match "
                f"{n} samples of {len(self.body_ids)} bodies"
            )
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(self.polar)):
            raise ValueError("trajectory contains non-finite states")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_bodies(self) -> int:
        return len(self.body_ids)

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities, each of shape (n_samples, n_bodies, 2)."""
        return polar_to_cartesian_arrays(self.polar)

    def body(self, body_id: int) -> "Trajectory":
        col = self.body_ids.index(body_id)
        return Trajectory(
            self.times.copy(),
            self.polar[:, col : col + 1, :].copy(),
            self.mode,
            (body_id,),
            self.stats,
            self.horizon,
            self.masses,
            self.g_const,
            dict(self.meta),
        )
