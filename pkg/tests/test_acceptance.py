"""Acceptance criteria 1-11.

Each test records one line in RESULTS; conftest prints them in the terminal
summary so the pass/fail table lands in the test log.
"""

import contextlib
import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import bisect, golden_params
from trilambert.closed_form import (
    implicit_residual,
    f_of_t,
    params_for_body,
    r_a_closed,
    radius_semi_analytic,
    solve_system,
    theta_semi_analytic,
    validity_horizon,
)
from trilambert.errors import AlreadyInvalid, NonEscaping
from trilambert.harness import cli
from trilambert.harness.runner import run_scenario, write_outputs
from trilambert.harness.scenario import demo_scenario, load_scenario
from trilambert.lambert_w import w0, wm1
from trilambert.model import Body, PolarState, SurrogateInitials, SystemState, surrogate_initials, to_com_frame
from trilambert.oracle import (
    conserved,
    conserved_along,
    integrate,
    integrate_surrogate_full,
    integrate_surrogate_radial,
    kepler_two_body,
)
from trilambert.validity import check_preconditions, check_surrogate

RESULTS = {}

INV_E = math.exp(-1.0)


@contextlib.contextmanager
def criterion(num, title, budget):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        took = time.perf_counter() - start
        note = "" if took <= budget else f" (over {budget:g} s budget)"
        RESULTS[num] = f"C{num:<2} {'PASS' if ok else 'FAIL'}  {title}  [{took:.2f} s]{note}"


# -- 1 -------------------------------------------------------------------


def test_c1_lambert_w_conformance():
    with criterion(1, "Lambert W conformance", 1.0):
        lower = np.concatenate([
            -INV_E + np.logspace(-16, math.log10(INV_E), 600)[:-1],
            -np.logspace(-300, math.log10(INV_E) - 1e-9, 600),
            [-INV_E],
        ])
        lower = lower[(lower >= -INV_E) & (lower < 0.0)]
        principal = np.concatenate([
            -INV_E + np.logspace(-16, math.log10(INV_E), 500),
            -np.logspace(-300, -1, 200),
            [0.0],
            np.logspace(-300, 6, 600),
            [-INV_E, 1e6],
        ])
        principal = principal[(principal >= -INV_E) & (principal <= 1e6)]
        assert lower.size >= 1000 and principal.size >= 1000
        for fn, grid, side in ((wm1, lower, -1), (w0, principal, 1)):
            for z in grid:
                w = fn(float(z))
                assert abs(w * math.exp(w) - z) <= 1e-13 * max(1.0, abs(z)), (fn.__name__, z)
                assert side * (w + 1.0) >= 0.0
        assert abs(wm1(-2 * math.exp(-2)) + 2.0) <= 1e-10
        for u in np.linspace(1.0, 50.0, 1000):
            assert wm1(-u * math.exp(-u)) == pytest.approx(-u, rel=1e-11)
        for u in np.linspace(0.0, 50.0, 1000):
            assert w0(u * math.exp(u)) == pytest.approx(u, rel=1e-11, abs=1e-300)


# -- 2 -------------------------------------------------------------------


def test_c2_implicit_equation_exactness():
    with criterion(2, "implicit equation exactness", 1.0):
        p = golden_params()
        assert (p.a_const, p.b_const) == (6.0, pytest.approx(3.4, rel=1e-15))
        assert p.k_const == pytest.approx(0.8823529, rel=1e-7)
        h = 1e-4
        for t in np.linspace(0.0, 50.0, 100):
            assert abs(implicit_residual(p, t)) <= 1e-9 * max(1.0, abs(f_of_t(p, t)))
            fd = (r_a_closed(p, t + h) - r_a_closed(p, t - h)) / (2 * h)
            # dr_a/dt (1 - k / r_a) = sign sqrt(B) follows from the implicit law
            model = math.sqrt(p.b_const) / (1.0 - p.k_const / r_a_closed(p, t))
            assert fd == pytest.approx(model, rel=1e-6)


# -- 3 -------------------------------------------------------------------


def random_valid_systems(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        bodies = tuple(
            Body(
                float(rng.uniform(0.5, 2.0)),
                PolarState(
                    float(rng.uniform(3.0, 12.0)),
                    float(rng.uniform(-math.pi, math.pi)),
                    float(rng.choice([-1, 1]) * rng.uniform(1.5, 3.0)),
                    float(rng.uniform(-0.05, 0.05)),
                ),
            )
            for _ in range(3)
        )
        sys = to_com_frame(SystemState(1.0, bodies))
        try:
            params = [params_for_body(sys, i) for i in (1, 2, 3)]
        except Exception:
            continue
        if not all(check_surrogate(p)[1] for p in params):
            continue
        if not all(check_preconditions(sys).angular_rate_ok):
            continue
        out.append(sys)
    return out


def cartesian_close(state, row, tol=1e-12):
    from trilambert.model import polar_to_cartesian

    p0, v0 = polar_to_cartesian(state)
    p1, v1 = polar_to_cartesian(PolarState(*row))
    return np.linalg.norm(p1 - p0) <= tol * np.linalg.norm(p0) and np.linalg.norm(v1 - v0) <= tol * np.linalg.norm(v0)


def test_c3_initial_condition_reproduction():
    with criterion(3, "initial-condition reproduction, all modes", 2.0):
        for sys in random_valid_systems(100, seed=3):
            t1 = sys.t + 1e-3
            for mode in ("paper_closed_form", "semi_analytic"):
                res = solve_system(sys, mode=mode, horizon=t1, samples=2)
                for i, tr in enumerate(res.trajectories):
                    s = sys.bodies[i].state
                    assert tuple(tr.polar[0, 0]) == (s.r, s.theta, s.r_dot, s.theta_dot)
            for field in ("newton", "paper"):
                tr = integrate(field, sys, t1, samples=2)
                for i in range(3):
                    assert cartesian_close(sys.bodies[i].state, tr.polar[0, i])
            m_total = float(sys.masses.sum())
            for i in (1, 2, 3):
                init = surrogate_initials(sys, i)
                expect = PolarState(init.r_a0, init.theta0, init.rdot_a0, init.thetadot0)
                for fn in (integrate_surrogate_full, integrate_surrogate_radial):
                    tr = fn(1.0, m_total, init, t1, samples=2)
                    assert cartesian_close(expect, tr.polar[0, 0])


# -- 4 -------------------------------------------------------------------


def truncation_gap(r_a0):
    p = golden_params(r_a0=r_a0)
    init = SurrogateInitials(r_a0, 2.0, 0.0, 1e-3)
    ode = integrate_surrogate_radial(1.0, 3.0, init, 1.0, t_eval=[0.0, 1.0]).polar[-1, 0, 0]
    closed = r_a_closed(p, 1.0)
    return closed, ode, abs(closed - ode) / ode, p


def test_c4_binomial_truncation_bound():
    with criterion(4, "binomial truncation error bound", 2.0):
        closed, ode, rel, p = truncation_gap(10.0)
        assert closed == pytest.approx(12.0052, abs=5e-5)
        assert check_surrogate(p)[2] == pytest.approx(5.7, abs=0.05)
        assert rel <= 0.01
        gaps = [rel] + [truncation_gap(r)[2] for r in (20.0, 40.0)]
        assert gaps[0] > gaps[1] > gaps[2]


# -- 5 -------------------------------------------------------------------


def test_c5_centrifugal_drop():
    with criterion(5, "centrifugal drop error", 2.0):
        grid = np.linspace(0.0, 20.0, 201)
        for thd, tol in ((1e-3, 1e-2), (0.0, 1e-9)):
            init = SurrogateInitials(10.0, 2.0, 0.0, thd)
            radial = integrate_surrogate_radial(1.0, 3.0, init, 20.0, t_eval=grid).polar[:, 0, 0]
            full = integrate_surrogate_full(1.0, 3.0, init, 20.0, t_eval=grid).polar[:, 0, 0]
            assert np.max(np.abs(radial - full) / full) <= tol


# -- 6 -------------------------------------------------------------------


def random_bounded_triples(count, seed):
    """Hierarchical triples: a close binary and a distant companion, all bound."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = rng.uniform(0.5, 1.5, 3)
        a = rng.uniform(1.0, 2.0)
        e_kick = rng.uniform(0.8, 1.1)
        phi = rng.uniform(0, 2 * math.pi)
        d = np.array([math.cos(phi), math.sin(phi)])
        perp = np.array([-d[1], d[0]])
        v_in = e_kick * math.sqrt((m[0] + m[1]) / a)
        mb = m[0] + m[1]
        pos = np.array([d * a * m[1] / mb, -d * a * m[0] / mb, np.zeros(2)])
        vel = np.array([perp * v_in * m[1] / mb, -perp * v_in * m[0] / mb, np.zeros(2)])
        psi = rng.uniform(0, 2 * math.pi)
        R = rng.uniform(10.0, 14.0)
        dir3 = np.array([math.cos(psi), math.sin(psi)])
        v_out = rng.uniform(0.8, 1.0) * math.sqrt(m.sum() / R)
        pos[2] = dir3 * R
        vel[2] = np.array([-dir3[1], dir3[0]]) * v_out
        sys = to_com_frame(SystemState.from_cartesian(1.0, m, pos, vel))
        if conserved(sys).energy < 0.0:
            out.append(sys)
    return out


def test_c6_oracle_conservation():
    with criterion(6, "oracle conservation, 20 bounded triples", 10.0):
        for sys in random_bounded_triples(20, seed=6):
            q0 = conserved(sys)
            scale = max(b.state.r for b in sys.bodies)
            tr = integrate("newton", sys, 10.0, rel_tol=1e-10, abs_tol=1e-12, samples=101)
            q = conserved_along(tr)
            assert np.max(np.abs(q["energy"] - q0.energy)) <= 1e-8 * abs(q0.energy)
            assert np.max(np.abs(q["angular_momentum"] - q0.angular_momentum)) <= 1e-8 * abs(q0.angular_momentum)
            assert np.max(np.linalg.norm(q["com"] - q0.com, axis=-1)) <= 1e-10 * scale


# -- 7 -------------------------------------------------------------------


def test_c7_degenerate_limit():
    with criterion(7, "massless third body vs Kepler", 5.0):
        m1, m2 = 1.0, 0.6
        gm = m1 + m2
        rel0, vrel0 = np.array([1.5, 0.0]), np.array([0.0, 0.8 * math.sqrt(gm / 1.5)])
        pos = np.array([rel0 * m2 / gm, -rel0 * m1 / gm, [0.0, 25.0]])
        vel = np.array([vrel0 * m2 / gm, -vrel0 * m1 / gm, [0.05, 0.0]])
        sys = to_com_frame(SystemState.from_cartesian(1.0, [m1, m2, 0.0], pos, vel))
        a = 1.0 / (2.0 / 1.5 - vrel0 @ vrel0 / gm)
        period = 2 * math.pi * math.sqrt(a ** 3 / gm)
        grid = np.linspace(0.0, period, 41)
        ref = np.array([kepler_two_body(gm, rel0, vrel0, t)[0] if t > 0 else rel0 for t in grid])
        size = np.linalg.norm(ref, axis=-1)

        tr = integrate("newton", sys, period, rel_tol=1e-12, abs_tol=1e-14, t_eval=grid)
        p, _ = tr.cartesian()
        rel = p[:, 0] - p[:, 1]
        assert np.all(np.linalg.norm(rel - ref, axis=-1) <= 1e-6 * size)

        init = surrogate_initials(sys, 1, "vector")
        sur = integrate_surrogate_full(1.0, float(sys.masses.sum()), init, period, t_eval=grid)
        ps, _ = sur.cartesian()
        assert np.all(np.linalg.norm(ps[:, 0] - ref, axis=-1) <= 1e-6 * size)


# -- 8 -------------------------------------------------------------------


def driven_reference(p, times):
    """r'' = -G mu / r_a(t)^2 and theta'' = -2 r' theta' / r, integrated by scipy."""

    def rhs(t, y):
        r, rd, th, thd = y
        ra = r_a_closed(p, t)
        return [rd, -p.g_const * p.mu / (ra * ra), thd, -2.0 * rd * thd / r]

    y0 = [p.r_i0, p.rdot_i0, p.theta_i0, p.thetadot_i0]
    sol = solve_ivp(rhs, (p.t0, times[-1]), y0, method="DOP853", rtol=1e-13, atol=1e-15, t_eval=times)
    assert sol.success
    return sol.y


def test_c8_semi_analytic_self_consistency():
    with criterion(8, "semi-analytic vs driven ODE", 3.0):
        p = golden_params()
        times = [0.5, 2.0, 5.0]
        r_ref, rd_ref, th_ref, thd_ref = driven_reference(p, times)
        h0 = p.r_i0 ** 2 * p.thetadot_i0
        for q in (1e-6, 1e-8):
            for n, t in enumerate(times):
                r, rd = radius_semi_analytic(p, t, q)
                th = theta_semi_analytic(p, t, q)
                assert r == pytest.approx(r_ref[n], rel=10 * q)
                assert rd == pytest.approx(rd_ref[n], rel=10 * q)
                assert th == pytest.approx(th_ref[n], rel=10 * q)
                assert r * r * thd_ref[n] == pytest.approx(h0, rel=10 * q)
            res = solve_system(to_com_frame(demo_scenario().system_state()), mode="semi_analytic",
                               horizon=5.0, samples=11, quad_tol=q)
            tr = res.trajectories[0]
            np.testing.assert_allclose(tr.polar[:, 0, 0] ** 2 * tr.polar[:, 0, 3], h0, rtol=10 * q)


# -- 9 -------------------------------------------------------------------

# recorded on the first verified run (lower branch, demo triple, threshold 0.1)
LOWER_GOLDEN = {"max": 32102.807660089285, "rms": 14652.413875631506, "divergence": 0.1, "samples": 51}


def test_c9_printed_formula_discrepancy():
    with criterion(9, "printed-formula discrepancy report (both branches)", 5.0):
        sc = demo_scenario()
        for branch in ("lower", "principal"):
            s = replace(sc, solver=replace(sc.solver, branch=branch))
            res = run_scenario(s, ["paper_closed_form", "semi_analytic"], 0.1)
            assert res.metrics is not None and len(res.metrics.bodies) == 3
            a, b = (res.runs[m].trajectories for m in ("paper_closed_form", "semi_analytic"))
            for i in range(3):
                assert np.array_equal(a[i].polar[0], b[i].polar[0])
                assert a[i].times[0] == b[i].times[0] == res.system.t
            again = run_scenario(s, ["paper_closed_form", "semi_analytic"], 0.1)
            assert again.metrics == res.metrics
            if branch == "lower":
                for m in res.metrics.bodies:
                    assert m.max_position_error == pytest.approx(LOWER_GOLDEN["max"], rel=1e-8)
                    assert m.rms_position_error == pytest.approx(LOWER_GOLDEN["rms"], rel=1e-8)
                    assert m.divergence_time == LOWER_GOLDEN["divergence"]
                    assert m.samples_compared == LOWER_GOLDEN["samples"]
            else:
                # the principal root puts the separation near zero, the body radius
                # collapses before the first sample and only t0 is comparable
                for m in res.metrics.bodies:
                    assert (m.samples_compared, m.max_position_error) == (1, 0.0)
                assert all(e.startswith("QuadratureFailure") for e in res.runs["semi_analytic"].errors)


# -- 10 ------------------------------------------------------------------


def test_c10_validity_gating(tmp_path, capsys):
    with criterion(10, "validity gating and strict exit codes", 1.0):
        with pytest.raises(NonEscaping):
            golden_params(rdot_a0=0.5)  # B = 0.25 - 0.6 < 0
        # r_a0 = 2k exactly when rdot^2 = 2A / r_a0; just below it the start is already invalid
        with pytest.raises(AlreadyInvalid):
            validity_horizon(golden_params(rdot_a0=-math.sqrt(1.2) * (1 - 1e-9)))
        for r_a0, rdot in ((10.0, -2.0), (20.0, -1.5), (40.0, -3.0), (8.0, -1.3)):
            p = golden_params(r_a0=r_a0, rdot_a0=rdot)
            t_star = validity_horizon(p)
            assert r_a_closed(p, t_star) == pytest.approx(2 * p.k_const, rel=1e-9)
            k = p.k_const
            root = bisect(lambda t: f_of_t(p, t) - (2 * k - k * math.log(2 * k)), 0.0, 1e3)
            assert t_star == pytest.approx(root, rel=1e-9)

        sc = demo_scenario().to_dict()
        for b in sc["bodies"]:
            b["r_dot"] = 0.1
        path = tmp_path / "bound.json"
        import json

        path.write_text(json.dumps(sc))
        assert cli.main(["validate", "--scenario", str(path)]) == 0
        assert cli.main(["solve", "--scenario", str(path), "--out", str(tmp_path / "a")]) == 0
        assert cli.main(["solve", "--scenario", str(path), "--out", str(tmp_path / "b"), "--strict"]) == 2
        assert cli.main(["validate", "--scenario", str(path), "--strict"]) == 2
        assert cli.main(["lambertw", "lower", "0.5"]) == 3
        assert cli.main(["solve", "--scenario", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 4
        capsys.readouterr()


# -- 11 ------------------------------------------------------------------


def test_c11_interface_stability(tmp_path, capsys):
    with criterion(11, "byte-identical outputs and demo end to end", 1.0):
        demo = tmp_path / "demo.json"
        assert cli.main(["demo", "--out", str(demo)]) == 0
        sc = load_scenario(demo)
        assert sc == demo_scenario() and sc.dumps() == demo.read_text()
        rep = check_preconditions(to_com_frame(sc.system_state()))
        assert all(rep.angular_rate_ok) and all(rep.finite_positions_ok)

        dirs = []
        for n in range(2):
            out = tmp_path / f"run{n}"
            assert cli.main(["solve", "--scenario", str(demo), "--out", str(out)]) == 0
            res = run_scenario(load_scenario(demo), ["paper_closed_form", "oracle_newton"], 0.1)
            write_outputs(tmp_path / f"cmp{n}", res)
            dirs.append((out, tmp_path / f"cmp{n}"))
        for a, b in zip(*dirs):
            names = sorted(f.name for f in a.iterdir())
            assert names == sorted(f.name for f in b.iterdir()) and "report.json" in names
            for name in names:
                assert (a / name).read_bytes() == (b / name).read_bytes()
        capsys.readouterr()
