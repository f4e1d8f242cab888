"""Scenario files: strict JSON loading, validation and the golden demo."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ScenarioError
from ..model import Body, PolarState, SystemState

__all__ = ["MODES", "BodySpec", "SolverOptions", "Scenario", "parse_scenario", "load_scenario", "demo_scenario"]

MODES = (
    "paper_closed_form",
    "semi_analytic",
    "oracle_newton",
    "oracle_paper",
    "surrogate_full",
    "surrogate_radial",
)
_SIGN_MODES = ("auto", "plus", "minus")
_BRANCHES = ("lower", "principal")
_CONVENTIONS = ("vector", "paper")

_TOP_KEYS = {"g_const", "t0", "bodies", "solver"}
_BODY_KEYS = ("mass", "r", "theta", "r_dot", "theta_dot")


@dataclass(frozen=True)
class BodySpec:
    mass: float
    r: float
    theta: float
    r_dot: float
    theta_dot: float


@dataclass(frozen=True)
class SolverOptions:
    mode: str = "paper_closed_form"
    sign_mode: str = "auto"
    branch: str = "lower"
    convention: str = "vector"
    horizon: float = 10.0
    samples: int = 101
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    quad_tol: float = 1e-8
    angular_rate_threshold: float = 1.0
    strict: bool = False
    allow_zero_mass: bool = False
    r_max: float | None = None


@dataclass(frozen=True)
class Scenario:
    g_const: float
    bodies: tuple[BodySpec, BodySpec, BodySpec]
    t0: float = 0.0
    solver: SolverOptions = field(default_factory=SolverOptions)

    def system_state(self) -> SystemState:
        return SystemState(
            self.g_const,
            tuple(Body(b.mass, PolarState(b.r, b.theta, b.r_dot, b.theta_dot)) for b in self.bodies),
            self.t0,
        )

    def to_dict(self) -> dict:
        return {
            "g_const": self.g_const,
            "t0": self.t0,
            "bodies": [asdict(b) for b in self.bodies],
            "solver": asdict(self.solver),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: must be finite")
    return value


def _reject_unknown(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ScenarioError(f"{where}: unknown keys {extra}")


def _choice(value, options, where):
    if value not in options:
        raise ScenarioError(f"{where}: {value!r} is not one of {list(options)}")
    return value


def _parse_solver(d: dict) -> SolverOptions:
    defaults = SolverOptions()
    _reject_unknown(d, asdict(defaults), "solver")
    opts = asdict(defaults)
    for key, value in d.items():
        where = f"solver.{key}"
        if key == "mode":
            opts[key] = _choice(value, MODES, where)
        elif key == "sign_mode":
            opts[key] = _choice(value, _SIGN_MODES, where)
        elif key == "branch":
            opts[key] = _choice(value, _BRANCHES, where)
        elif key == "convention":
            opts[key] = _choice(value, _CONVENTIONS, where)
        elif key in ("strict", "allow_zero_mass"):
            if not isinstance(value, bool):
                raise ScenarioError(f"{where}: expected true/false")
            opts[key] = value
        elif key == "samples":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(f"{where}: expected an integer")
            opts[key] = value
        elif key == "r_max":
            opts[key] = None if value is None else _number(value, where)
        else:
            opts[key] = _number(value, where)
    sv = SolverOptions(**opts)
    if sv.samples < 2:
        raise ScenarioError("solver.samples must be at least 2")
    for key in ("rel_tol", "abs_tol", "quad_tol", "angular_rate_threshold"):
        if not getattr(sv, key) > 0.0:
            raise ScenarioError(f"solver.{key} must be positive")
    if sv.r_max is not None and not sv.r_max > 0.0:
        raise ScenarioError("solver.r_max must be positive")
    return sv


def parse_scenario(d) -> Scenario:
    _reject_unknown(d, _TOP_KEYS, "scenario")
    for key in ("g_const", "bodies"):
        if key not in d:
            raise ScenarioError(f"scenario: missing key {key!r}")
    g = _number(d["g_const"], "g_const")
    if g <= 0.0:
        raise ScenarioError("g_const must be positive")
    t0 = _number(d.get("t0", 0.0), "t0")
    solver = _parse_solver(d.get("solver", {}))
    raw = d["bodies"]
    if not isinstance(raw, list) or len(raw) != 3:
        raise ScenarioError("bodies: exactly three bodies are required")
    bodies = []
    for n, b in enumerate(raw, start=1):
        where = f"bodies[{n}]"
        _reject_unknown(b, _BODY_KEYS, where)
        missing = [k for k in _BODY_KEYS if k not in b]
        if missing:
            raise ScenarioError(f"{where}: missing keys {missing}")
        spec = BodySpec(*(_number(b[k], f"{where}.{k}") for k in _BODY_KEYS))
        if spec.mass < 0.0 or (spec.mass == 0.0 and not solver.allow_zero_mass):
            raise ScenarioError(f"{where}.mass must be positive (set allow_zero_mass for 0)")
        if spec.r < 0.0:
            raise ScenarioError(f"{where}.r must be non-negative")
        bodies.append(spec)
    if not solver.horizon > t0:
        raise ScenarioError("solver.horizon must lie after t0")
    return Scenario(g, tuple(bodies), t0, solver)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(data)


def demo_scenario() -> Scenario:
    """Equal-mass triple on a circle of radius 20/3, expanding radially at 4/3.

    Every body then sees its companions' barycenter at r_a0 = 10 receding at
    2, so all three surrogates share A = 6, B = 3.4 (G = 1).
    """
    r = 20.0 / 3.0
    v = 4.0 / 3.0
    bodies = tuple(BodySpec(1.0, r, n * 2.0 * math.pi / 3.0, v, 1e-3) for n in range(3))
    return Scenario(1.0, bodies, 0.0, SolverOptions(horizon=5.0, samples=51))
