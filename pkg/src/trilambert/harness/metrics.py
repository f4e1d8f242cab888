"""Position-error metrics between two sampled trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DisjointIntervals
from ..integrator import hermite_cubic
from ..trajectory import Trajectory

__all__ = ["BodyErrorMetrics", "ErrorMetrics", "compare", "divergence_time", "interpolate_cartesian"]


@dataclass(frozen=True)
class BodyErrorMetrics:
    body: int
    rms_position_error: float
    max_position_error: float
    divergence_time: float | None
    final_error: float
    samples_compared: int


@dataclass(frozen=True)
class ErrorMetrics:
    bodies: tuple[BodyErrorMetrics, ...]
    horizon: tuple[float, float]
    samples_compared: int

    def for_body(self, body: int) -> BodyErrorMetrics:
        for m in self.bodies:
            if m.body == body:
                return m
        raise KeyError(body)

    def to_dict(self) -> dict:
        return {
            "bodies": [asdict(m) for m in self.bodies],
            "horizon": list(self.horizon),
            "samples_compared": self.samples_compared,
        }


def divergence_time(times, errors, threshold: float) -> float | None:
    """First sample time whose error exceeds ``threshold``."""
    errors = np.asarray(errors)
    above = np.nonzero(errors > threshold)[0]
    if above.size == 0:
        return None
    return float(np.asarray(times)[above[0]])


def interpolate_cartesian(ref: Trajectory, times) -> np.ndarray:
    """Reference positions at ``times`` by cubic Hermite interpolation on the
    stored positions and velocities.  Shape (len(times), n_bodies, 2)."""
    pos, vel = ref.cartesian()
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, ref.n_bodies, 2))
    idx = np.searchsorted(ref.times, times, side="left")
    for n, (t, i) in enumerate(zip(times, idx)):
        if i < len(ref.times) and ref.times[i] == t:
            out[n] = pos[i]
            continue
        lo, hi = i - 1, i
        out[n] = hermite_cubic(t, ref.times[lo], ref.times[hi], pos[lo], vel[lo], pos[hi], vel[hi])
    return out


def compare(a: Trajectory, b: Trajectory, threshold: float) -> ErrorMetrics:
    """Cartesian position errors of ``a`` against reference ``b``.

    ``b`` is interpolated onto the samples of ``a`` that fall inside ``b``'s
    time span; bodies present in both trajectories are compared.
    """
    common = [bid for bid in a.body_ids if bid in b.body_ids]
    if not common:
        raise ValueError("trajectories share no body")
    lo, hi = max(a.times[0], b.times[0]), min(a.times[-1], b.times[-1])
    mask = (a.times >= lo) & (a.times <= hi)
    if hi < lo or not mask.any():
        raise DisjointIntervals(
            f"no common samples: [{a.times[0]}, {a.times[-1]}] vs [{b.times[0]}, {b.times[-1]}]"
        )
    times = a.times[mask]
    pos_a, _ = a.cartesian()
    pos_b = interpolate_cartesian(b, times)
    out = []
    for bid in common:
        ca, cb = a.body_ids.index(bid), b.body_ids.index(bid)
        err = np.linalg.norm(pos_a[mask, ca] - pos_b[:, cb], axis=-1)
        peak = float(err.max())
        out.append(
            BodyErrorMetrics(
                body=bid,
                # summation rounding must not push rms above the peak
                rms_position_error=min(float(math.sqrt(np.mean(err * err))), peak),
                max_position_error=peak,
                divergence_time=divergence_time(times, err, threshold),
                final_error=float(err[-1]),
                samples_compared=int(times.size),
            )
        )
    return ErrorMetrics(tuple(out), (float(times[0]), float(times[-1])), int(times.size) * len(common))
