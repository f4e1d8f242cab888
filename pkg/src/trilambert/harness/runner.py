"""Scenario orchestration: run solver modes, check validity, compare, serialise."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..closed_form import (
    SolveMode,
    SurrogateParams,
    params_for_body,
    printed_angular_rate,
    printed_radial_rate,
    solve_system,
)
from ..errors import ThreeBodyError, ValidityViolation
from ..model import SystemState, surrogate_initials, to_com_frame
from ..oracle import integrate, integrate_surrogate_full, integrate_surrogate_radial
from ..trajectory import Trajectory
from ..validity import ValidityReport, check_preconditions, monitor
from .metrics import ErrorMetrics, compare
from .scenario import Scenario

__all__ = ["ModeRun", "RunResult", "run_scenario", "trajectory_rows", "write_csv", "report_dict", "write_report"]

CSV_HEADER = "t,body,r,theta,r_dot,theta_dot,x,y"


@dataclass
class ModeRun:
    mode: str
    trajectories: list
    errors: list
    validity: ValidityReport
    extra: dict = field(default_factory=dict)


@dataclass
class RunResult:
    scenario: Scenario
    system: SystemState
    params: list
    param_errors: list
    runs: dict
    metrics: ErrorMetrics | None = None
    compared: tuple[str, str] | None = None

    @property
    def has_violation(self) -> bool:
        if any(e is not None for e in self.param_errors):
            return True
        for run in self.runs.values():
            if any(e is not None for e in run.errors) or not run.validity.all_ok:
                return True
        return False


def _diagnostic_params(sys: SystemState, sv):
    params, errors = [], []
    for i in (1, 2, 3):
        try:
            params.append(params_for_body(sys, i, sv.sign_mode, sv.branch, sv.convention))
            errors.append(None)
        except ThreeBodyError as exc:
            errors.append(exc)
            try:
                params.append(params_for_body(sys, i, sv.sign_mode, sv.branch, sv.convention, force=True))
            except ThreeBodyError:
                params.append(None)
    return params, errors


def _merge_preconditions(rep: ValidityReport, pre: ValidityReport) -> ValidityReport:
    for n in range(3):
        for name in ("angular_rate_ok", "finite_positions_ok"):
            got = getattr(rep, name)
            got[n] = bool(getattr(pre, name)[n]) and got[n] is not False
    return rep


def _run_mode(mode: str, sys: SystemState, sv, params) -> ModeRun:
    thr, r_max = sv.angular_rate_threshold, sv.r_max
    if mode in (SolveMode.PAPER_CLOSED_FORM.value, SolveMode.SEMI_ANALYTIC.value):
        res = solve_system(
            sys, sv.sign_mode, sv.branch, sv.convention, mode, sv.horizon, sv.samples, sv.quad_tol
        )
        trajs = [t for t in res.trajectories if t is not None]
        rep = monitor(res.trajectories, params, thr, r_max)
        extra = {}
        if mode == SolveMode.PAPER_CLOSED_FORM.value:
            extra["printed_rates_at_t0"] = [_printed_rates(p) for p in res.params]
        return ModeRun(mode, trajs, [_err(e) for e in res.errors], rep, extra)

    if mode in ("oracle_newton", "oracle_paper"):
        traj = integrate(
            mode.split("_", 1)[1], sys, sv.horizon, sv.rel_tol, sv.abs_tol, samples=sv.samples
        )
        rep = monitor(traj, params, thr, r_max)
        return ModeRun(mode, [traj], [None, None, None], rep)

    integ = integrate_surrogate_full if mode == "surrogate_full" else integrate_surrogate_radial
    trajs, errors = [], []
    m_total = float(sys.masses.sum())
    for i in (1, 2, 3):
        try:
            init = surrogate_initials(sys, i, sv.convention)
            trajs.append(
                integ(
                    sys.g_const, m_total, init, sv.horizon, sys.t, sv.rel_tol, sv.abs_tol,
                    samples=sv.samples, body_id=i,
                )
            )
            errors.append(None)
        except ThreeBodyError as exc:
            errors.append(_err(exc))
    rep = monitor(trajs, params, thr, r_max, separation_from_r=True)
    return ModeRun(mode, trajs, errors, rep)


def _printed_rates(p: SurrogateParams | None):
    if p is None:
        return None
    try:
        return {
            "r_dot": printed_radial_rate(p, p.t0),
            "theta_dot": printed_angular_rate(p, p.t0),
            "r_dot_initial": p.rdot_i0,
            "theta_dot_initial": p.thetadot_i0,
        }
    except ThreeBodyError:
        return None


def _err(exc) -> str | None:
    if exc is None:
        return None
    return f"{type(exc).__name__}: {exc}"


def _compare_runs(a: ModeRun, b: ModeRun, threshold: float) -> ErrorMetrics:
    per_body, lo, hi, total = [], math.inf, -math.inf, 0
    for ta in a.trajectories:
        for bid in ta.body_ids:
            ref = next((tb for tb in b.trajectories if bid in tb.body_ids), None)
            if ref is None:
                continue
            m = compare(ta.body(bid), ref.body(bid), threshold)
            per_body.extend(m.bodies)
            lo, hi = min(lo, m.horizon[0]), max(hi, m.horizon[1])
            total += m.samples_compared
    per_body.sort(key=lambda m: m.body)
    return ErrorMetrics(tuple(per_body), (lo, hi), total)


def run_scenario(sc: Scenario, modes=None, threshold: float | None = None, strict: bool | None = None) -> RunResult:
    """Run one or two solver modes on a scenario (in the COM frame).

    With two modes the first is compared against the second as reference.
    In strict mode any validity failure raises :class:`ValidityViolation`
    carrying the finished result as ``exc.result``.
    """
    sv = sc.solver
    modes = tuple(modes) if modes else (sv.mode,)
    strict = sv.strict if strict is None else strict
    sys = to_com_frame(sc.system_state())
    params, perr = _diagnostic_params(sys, sv)
    pre = check_preconditions(sys, sv.angular_rate_threshold, sv.r_max)
    runs = {}
    for mode in modes:
        run = _run_mode(mode, sys, sv, params)
        _merge_preconditions(run.validity, pre)
        runs[mode] = run
    result = RunResult(sc, sys, params, [_err(e) for e in perr], runs)
    if len(modes) == 2:
        result.metrics = _compare_runs(runs[modes[0]], runs[modes[1]], math.inf if threshold is None else threshold)
        result.compared = (modes[0], modes[1])
    if strict and result.has_violation:
        exc = ValidityViolation("validity conditions failed in strict mode")
        exc.result = result
        raise exc
    return result


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_rows(trajectories) -> list[str]:
    """CSV lines (without header) for a collection of trajectories, ordered
    by time and then body.  Angles are wrapped to [-pi, pi] here only."""
    rows = []
    for tr in trajectories:
        pos, _ = tr.cartesian()
        for n, t in enumerate(tr.times):
            for c, bid in enumerate(tr.body_ids):
                r, th, rd, thd = tr.polar[n, c]
                rows.append(
                    (float(t), bid, ",".join(
                        [_fmt(t), str(bid), _fmt(r), _fmt(math.remainder(th, 2.0 * math.pi)),
                         _fmt(rd), _fmt(thd), _fmt(pos[n, c, 0]), _fmt(pos[n, c, 1])]
                    ))
                )
    rows.sort(key=lambda row: (row[0], row[1]))
    return [row[2] for row in rows]


def write_csv(path, trajectories) -> None:
    lines = [CSV_HEADER] + trajectory_rows(trajectories)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def report_dict(result: RunResult) -> dict:
    modes = {}
    for name, run in result.runs.items():
        modes[name] = {
            "validity": run.validity.to_dict(),
            "errors": list(run.errors),
            "integrator_stats": [None if t.stats is None else asdict(t.stats) for t in run.trajectories],
            "horizons": [t.horizon for t in run.trajectories],
            **run.extra,
        }
    return _clean(
        {
            "scenario": result.scenario.to_dict(),
            "params": [None if p is None else p.to_dict() for p in result.params],
            "param_errors": list(result.param_errors),
            "modes": modes,
            "compared": list(result.compared) if result.compared else None,
            "metrics": None if result.metrics is None else result.metrics.to_dict(),
        }
    )


def write_report(path, result: RunResult) -> None:
    text = json.dumps(report_dict(result), indent=2, sort_keys=True, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def write_outputs(out_dir, result: RunResult) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, run in result.runs.items():
        path = out / f"{name}.csv"
        write_csv(path, run.trajectories)
        written.append(path)
    path = out / "report.json"
    write_report(path, result)
    written.append(path)
    return written
