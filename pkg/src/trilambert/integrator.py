"""Adaptive Dormand-Prince 5(4) stepper with cubic Hermite dense output.

Steps are chosen by a PI controller on the embedded error estimate.  A step
is also rejected when the cubic Hermite interpolant through its end points
deviates at the midpoint from the method's own fourth-order continuous
extension by more than a tenth of the tolerance, so requested output times
never need to be hit by a step.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import MaxSteps, StepFailure
from .trajectory import IntegratorStats

__all__ = ["dopri5", "hermite_cubic"]

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth-order minus fourth-order weights, seventh entry is the FSAL stage
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension (Shampine), columns multiply theta, theta^2, theta^3, theta^4
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)
_MID = _P @ np.array([0.5, 0.25, 0.125, 0.0625])

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_INTERP_FRACTION = 0.1


def hermite_cubic(t, t0, t1, y0, f0, y1, f1):
    """Cubic Hermite interpolant on [t0, t1] evaluated at ``t`` (scalar or array)."""
    h = t1 - t0
    s = (np.asarray(t, dtype=float) - t0) / h
    s = s[..., None] if np.ndim(s) and np.ndim(y0) else s
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.dot(x, x)) / x.size)


def _initial_step(fun, t0, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = fun(t0 + h0 * direction, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def dopri5(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    t_eval=None,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_steps: int = 1_000_000,
):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end`` (forward only).

    Returns ``(times, states, stats)`` where ``states[n]`` is the solution at
    ``times[n]``.  ``t_eval`` defaults to ``[t0, t_end]``.
    """
    if not (rel_tol > 0 and abs_tol > 0):
        raise ValueError("tolerances must be positive")
    if not t_end > t0:
        raise ValueError(f"t_end {t_end!r} must exceed t0 {t0!r}")
    y = np.array(y0, dtype=float)
    if t_eval is None:
        t_eval = np.array([t0, t_end])
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size and (t_eval[0] < t0 or t_eval[-1] > t_end or np.any(np.diff(t_eval) <= 0)):
        raise ValueError("t_eval must be increasing and inside [t0, t_end]")

    out = np.empty((t_eval.size, y.size))
    n_out = 0
    while n_out < t_eval.size and t_eval[n_out] == t0:
        out[n_out] = y
        n_out += 1

    t = float(t0)
    f = np.asarray(fun(t, y), dtype=float)
    n_fev = 1
    h = _initial_step(fun, t, y, f, 1.0, rel_tol, abs_tol)
    n_fev += 1
    err_old = 1e-4
    n_steps = n_rejected = 0
    rejected_last = False
    k = np.empty((7, y.size))

    while t < t_end:
        if n_steps >= max_steps:
            raise MaxSteps(f"step budget {max_steps} exhausted at t={t!r}")
        h_min = 16.0 * np.spacing(max(abs(t), 1.0))
        if h < h_min:
            raise StepFailure(f"step size underflow at t={t!r} (h={h!r})")
        last = t + h >= t_end
        if last:
            h = t_end - t

        k[0] = f
        for s in range(1, 6):
            dy = np.dot(_A[s], k[:s]) * h
            k[s] = fun(t + _C[s] * h, y + dy)
        y_new = y + h * np.dot(_B, k[:6])
        t_new = t_end if last else t + h
        k[6] = fun(t_new, y_new)
        n_fev += 6

        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * np.dot(_E, k) / scale)
        y_mid = y + h * np.dot(_MID, k)
        y_herm = 0.5 * (y + y_new) + 0.125 * h * (f - k[6])
        err_interp = _rms((y_mid - y_herm) / scale) / _INTERP_FRACTION
        err = max(err, err_interp)
        if not math.isfinite(err):
            err = 1e10

        if err <= 1.0:
            fac = err ** _EXPO / err_old ** _BETA
            fac = min(1.0 / _FAC_MIN, max(1.0 / _FAC_MAX, fac / _SAFETY))
            h_next = h / fac
            if rejected_last:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            while n_out < t_eval.size and t_eval[n_out] <= t_new:
                te = t_eval[n_out]
                out[n_out] = y_new if te == t_new else hermite_cubic(te, t, t_new, y, f, y_new, k[6])
                n_out += 1
            t, y, f = t_new, y_new, k[6].copy()
            n_steps += 1
            rejected_last = False
            h = h_next
        else:
            n_rejected += 1
            rejected_last = True
            h = h / min(1.0 / _FAC_MIN, err ** _EXPO / _SAFETY)

    stats = IntegratorStats(n_steps, n_rejected, n_fev, rel_tol, abs_tol)
    return t_eval, out, stats
