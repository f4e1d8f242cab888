"""Real branches of the Lambert W function.

``w0`` is the principal branch (W >= -1, defined on [-1/e, inf)) and ``wm1``
the lower branch (W <= -1, defined on [-1/e, 0)).  Both refine a branch
specific starting guess with Halley iteration on ``f(w) = w*exp(w) - z``.
"""

from __future__ import annotations

import enum
import math

from .errors import DomainError, IterationError

__all__ = [
    "Branch",
    "BRANCH_POINT",
    "DOMAIN_SLACK",
    "w0",
    "wm1",
    "lambertw",
    "w_residual",
]

# -1/e split into two doubles so z + 1/e is formed without cancellation.
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17

BRANCH_POINT = -_INV_E_HI
DOMAIN_SLACK = 1e-12

_MAX_ITER = 50
_EPS = 2.220446049250313e-16
_STEP_TOL = 1e-15
# Width of the neighbourhood of -1/e where the branch-point series is used.
_SERIES_WIDTH = 1e-2


class Branch(str, enum.Enum):
    PRINCIPAL = "principal"
    LOWER = "lower"


def _offset_from_branch_point(z: float) -> float:
    # z + 1/e
    return (z + _INV_E_HI) + _INV_E_LO


def _series_guess(q: float, sign: float) -> float:
    p = sign * math.sqrt(2.0 * math.e * q)
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3


def _g_series(d: float) -> tuple[float, float, float]:
    """g(d) = (1 - d) e^d - 1 by its series -sum_{n>=2} (n-1) d^n / n!,
    plus the closed-form derivatives g' = -d e^d and g'' = -(1 + d) e^d."""
    g = 0.0
    term = d
    for n in range(2, 40):
        term *= d / n
        g -= (n - 1) * term
        if abs(term) <= 1e-18 * abs(g):
            break
    ed = math.exp(d)
    return g, -d * ed, -(1.0 + d) * ed


def _halley_near(q: float, w: float, lower: bool) -> float:
    """Halley iteration in d = w + 1 with f = -(g(d)/e) - q, where q = z + 1/e
    is carried exactly.  Avoids the cancellation in w*exp(w) - z close to
    the branch point."""
    d = w + 1.0
    for _ in range(_MAX_ITER):
        g, gp, gpp = _g_series(d)
        f = -g * _INV_E_HI - q
        fp = -gp * _INV_E_HI
        fpp = -gpp * _INV_E_HI
        if abs(f) <= _EPS * q or fp == 0.0:
            return d - 1.0
        step = f / (fp - f * fpp / (2.0 * fp))
        d_new = d - step
        if lower and d_new > 0.0:
            d_new = 0.5 * d
        elif not lower and d_new < 0.0:
            d_new = 0.5 * d
        if abs(d_new - d) <= 2.0 * _EPS * abs(d_new):
            return d_new - 1.0
        d = d_new
    raise IterationError(f"Halley iteration did not converge for z + 1/e={q!r}")


def _halley(z: float, w: float, lower: bool) -> float:
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - z
        # residual at the rounding floor: further steps only chase noise
        if abs(f) <= 4.0 * _EPS * abs(z):
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            return w
        step = f / denom
        w_new = w - step
        # keep the iterate on its own side of the branch point
        if lower and w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        elif not lower and w_new < -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= _STEP_TOL * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    raise IterationError(f"Halley iteration did not converge for z={z!r}")


def _check_number(z: float) -> float:
    z = float(z)
    if math.isnan(z):
        raise DomainError("Lambert W of NaN")
    return z


def w0(z: float) -> float:
    """Principal branch W0(z) for real z >= -1/e."""
    z = _check_number(z)
    q = _offset_from_branch_point(z)
    if q < -DOMAIN_SLACK:
        raise DomainError(f"w0 undefined for z={z!r} < -1/e")
    if q <= 0.0:
        return -1.0
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf
    if q < _SERIES_WIDTH:
        return _halley_near(q, _series_guess(q, +1.0), lower=False)
    if z < math.e:
        w = math.log1p(z)
        w = max(w, -0.9)
    else:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    return _halley(z, w, lower=False)


def wm1(z: float) -> float:
    """Lower branch W-1(z) for real -1/e <= z < 0."""
    z = _check_number(z)
    if z >= 0.0:
        raise DomainError(f"wm1 undefined for z={z!r} >= 0")
    q = _offset_from_branch_point(z)
    if q < -DOMAIN_SLACK:
        raise DomainError(f"wm1 undefined for z={z!r} < -1/e")
    if q <= 0.0:
        return -1.0
    if q < _SERIES_WIDTH:
        return _halley_near(q, _series_guess(q, -1.0), lower=True)
    l1 = math.log(-z)
    l2 = math.log(-l1)
    w = min(l1 - l2 + l2 / l1, -1.1)
    return _halley(z, w, lower=True)


def lambertw(z: float, branch: Branch | str = Branch.LOWER) -> float:
    """Evaluate the requested real branch."""
    if Branch(branch) is Branch.PRINCIPAL:
        return w0(z)
    return wm1(z)


def w_residual(w: float, z: float) -> float:
    return w * math.exp(w) - z
