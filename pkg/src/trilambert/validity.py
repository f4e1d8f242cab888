"""Solvability conditions attached to the closed forms, checked and monitored."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .closed_form import SurrogateParams, r_a_closed, validity_horizon
from .errors import AlreadyInvalid, ThreeBodyError
from .model import SystemState, other_indices
from .trajectory import Trajectory

__all__ = [
    "Violation",
    "ValidityReport",
    "check_preconditions",
    "check_surrogate",
    "monitor",
    "DEFAULT_ANGULAR_RATE_THRESHOLD",
]

DEFAULT_ANGULAR_RATE_THRESHOLD = 1.0

# simultaneous violations are ordered b_positive, margin, angular_rate,
# finite_position, then by body index


@dataclass(frozen=True)
class Violation:
    body: int
    time: float
    condition: str


@dataclass
class ValidityReport:
    angular_rate_ok: list = field(default_factory=lambda: [None] * 3)
    finite_positions_ok: list = field(default_factory=lambda: [None] * 3)
    b_positive: list = field(default_factory=lambda: [None] * 3)
    margin_ok: list = field(default_factory=lambda: [None] * 3)
    margin_ratio: list = field(default_factory=lambda: [None] * 3)
    horizon: list = field(default_factory=lambda: [None] * 3)
    first_violation: Violation | None = None

    @property
    def all_ok(self) -> bool:
        flags = self.angular_rate_ok + self.finite_positions_ok + self.b_positive + self.margin_ok
        return self.first_violation is None and all(f is not False for f in flags)

    def to_dict(self) -> dict:
        fv = self.first_violation
        return {
            "angular_rate_ok": list(self.angular_rate_ok),
            "finite_positions_ok": list(self.finite_positions_ok),
            "b_positive": list(self.b_positive),
            "margin_ok": list(self.margin_ok),
            "margin_ratio": list(self.margin_ratio),
            "horizon": list(self.horizon),
            "first_violation": None
            if fv is None
            else {"body": fv.body, "time": fv.time, "condition": fv.condition},
        }


def check_preconditions(
    sys: SystemState,
    angular_rate_threshold: float = DEFAULT_ANGULAR_RATE_THRESHOLD,
    r_max: float | None = None,
) -> ValidityReport:
    """Angular-rate and bounded-position conditions on the initial state."""
    rep = ValidityReport()
    for n, b in enumerate(sys.bodies):
        s = b.state
        rep.angular_rate_ok[n] = bool(abs(s.theta_dot) < angular_rate_threshold)
        finite = s.is_finite
        if finite and r_max is not None:
            finite = s.r <= r_max
        rep.finite_positions_ok[n] = bool(finite)
    return rep


def check_surrogate(p: SurrogateParams) -> tuple[bool, bool, float]:
    """(B > 0, |r_a| > |A/B|, r_a0 B / A) at the start time."""
    ratio = p.r_a0 * p.b_const / p.a_const
    return bool(p.b_const > 0.0), bool(ratio > 1.0), ratio


def _as_body_trajectories(traj) -> dict[int, Trajectory]:
    if isinstance(traj, Trajectory):
        return {b: traj.body(b) for b in traj.body_ids}
    out = {}
    for tr in traj:
        if tr is None:
            continue
        for b in tr.body_ids:
            out[b] = tr.body(b)
    return out


def _separation_history(traj: Trajectory, i: int) -> np.ndarray | None:
    """|pos_i - barycenter(j, k)| along a three-body trajectory, if masses are known."""
    if traj.masses is None or traj.n_bodies != 3:
        return None
    j, k = other_indices(i)
    m = np.asarray(traj.masses, dtype=float)
    if m[j] + m[k] == 0.0:
        return None
    pos, _ = traj.cartesian()
    bary = (m[j] * pos[:, j] + m[k] * pos[:, k]) / (m[j] + m[k])
    return np.linalg.norm(pos[:, i - 1] - bary, axis=-1)


def monitor(
    traj,
    params: Sequence[SurrogateParams | None],
    angular_rate_threshold: float = DEFAULT_ANGULAR_RATE_THRESHOLD,
    r_max: float | None = None,
    separation_from_r: bool = False,
) -> ValidityReport:
    """Scan a trajectory for the first failure of every condition.

    ``traj`` is either one multi-body trajectory or a sequence of single-body
    trajectories (``None`` entries are skipped).  The surrogate margin is
    checked against the actual companion-barycenter separation when the
    trajectory carries all three bodies and their masses, against the stored
    radius when ``separation_from_r`` is set (surrogate runs), and otherwise
    against the closed-form separation ``r_a_closed``.
    """
    rep = ValidityReport()
    bodies = _as_body_trajectories(traj)
    full = traj if isinstance(traj, Trajectory) and traj.n_bodies == 3 else None
    violations = []
    for i in (1, 2, 3):
        p = params[i - 1] if i - 1 < len(params) else None
        first: list[tuple[float, int, str]] = []
        if p is not None:
            b_ok, m_ok, ratio = check_surrogate(p)
            rep.b_positive[i - 1] = b_ok
            rep.margin_ok[i - 1] = m_ok
            rep.margin_ratio[i - 1] = ratio
            if not b_ok:
                first.append((p.t0, 0, "b_positive"))
            elif not m_ok:
                first.append((p.t0, 1, "margin"))
        tr = bodies.get(i)
        if tr is not None:
            times = tr.times
            r, thd = tr.polar[:, 0, 0], tr.polar[:, 0, 3]
            rate_bad = ~(np.abs(thd) < angular_rate_threshold)
            pos_bad = ~np.isfinite(r)
            if r_max is not None:
                pos_bad |= r > r_max
            rep.angular_rate_ok[i - 1] = not bool(rate_bad.any())
            rep.finite_positions_ok[i - 1] = not bool(pos_bad.any())
            if rate_bad.any():
                first.append((float(times[np.argmax(rate_bad)]), 2, "angular_rate"))
            if pos_bad.any():
                first.append((float(times[np.argmax(pos_bad)]), 3, "finite_position"))
            if p is not None and p.b_const > 0.0 and rep.margin_ok[i - 1]:
                sep = _separation_history(full, i) if full is not None else None
                if separation_from_r:
                    margin_bad = ~(r > p.margin)
                elif sep is None:
                    sep = np.array([_safe_r_a(p, float(t)) for t in times])
                    # r_a <= 2k from the analytic horizon on, whatever rounding
                    # does to the sampled value there
                    margin_bad = ~(sep > p.margin) | (times >= _analytic_horizon(p))
                else:
                    margin_bad = ~(sep > p.margin)
                if margin_bad.any():
                    first.append((float(times[np.argmax(margin_bad)]), 1, "margin"))
        analytic = _analytic_horizon(p)
        sampled = min(first)[0] if first else math.inf
        rep.horizon[i - 1] = min(analytic, sampled)
        if first:
            t, order, name = min(first)
            violations.append((t, i, order, name))
    if violations:
        t, i, _, name = min(violations)
        rep.first_violation = Violation(i, t, name)
    return rep


def _safe_r_a(p: SurrogateParams, t: float) -> float:
    try:
        return r_a_closed(p, t)
    except ThreeBodyError:
        return math.nan


def _analytic_horizon(p: SurrogateParams | None) -> float:
    if p is None or not p.b_const > 0.0:
        return p.t0 if p is not None else math.inf
    try:
        return validity_horizon(p)
    except AlreadyInvalid:
        return p.t0
