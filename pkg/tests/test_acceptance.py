"""End-to-end acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line; the lines are also
repeated in the pytest terminal summary.  Run directly with
``python tests/test_acceptance.py`` to get just those eight lines.
"""

from __future__ import annotations

import math
import random
import sys
import time
from functools import lru_cache

import numpy as np

from haltflow import tm
from haltflow.checks import (conjugacy_failures, geometry_deviations, max_circle_distance,
                             numeric_period, random_manifold_points, reachable_configs,
                             support_failures)
from haltflow.encoding import encode_config
from haltflow.integrate import IntegratorConfig, solve
from haltflow.machine import validate_layout
from haltflow.runtime import predict_blowup_time, run_mode

from conftest import SAMPLES, load, system_for

SQRT5 = math.sqrt(5.0)
RESULTS: list[str] = []


def report(n: int, title: str, ok: bool, detail: str, elapsed: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail}; {elapsed:.1f} s)"
    RESULTS.append(line)
    print(line)


@lru_cache(maxsize=None)
def run_cached(name: str, mode: str, tape: str = "[0]", horizon: float = 100.0, threshold: float = 1e6):
    system = system_for(name)
    return run_mode(system, mode, tm.parse_tape(tape), horizon, threshold)


def derived_tau(name: str) -> float:
    # oracle: exact simulation, independent of the runtime's own prediction
    spec = load(name)
    out = tm.run(spec, tm.initial(spec), 1000)
    assert isinstance(out, tm.Halted)
    return out.steps - 0.05


# ---- 1


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    for name in ("halt3.tm", "loop.tm", "bb-small.tm"):
        system = system_for(name)
        configs = reachable_configs(system.spec, random.Random(101), 100)
        bad += [f"{name}: {b}" for b in conjugacy_failures(system, configs)]
    dt = time.perf_counter() - t0
    ok = not bad and dt <= 10.0
    return ok, (bad[0] if bad else "300 configurations, zero tolerance"), dt


def test_criterion_1_exact_conjugacy():
    ok, detail, dt = criterion_1()
    report(1, "exact conjugacy", ok, detail, dt)
    assert ok, detail


# ---- 2


def criterion_2():
    t0 = time.perf_counter()
    worst = 0.0
    for name in ("halt3.tm", "loop.tm", "bb-small.tm"):
        system = system_for(name)
        for c in reachable_configs(system.spec, random.Random(202), 50):
            pt = encode_config(system.spec, c, system.layout)
            got = numeric_period(system, pt.as_floats())
            want = system.field.flow_period_exact(pt).as_floats()
            worst = max(worst, max_circle_distance(got, want))
    dt = time.perf_counter() - t0
    return worst <= 1e-6 and dt <= 120.0, f"max deviation {worst:.2e} over 150 periods", dt


def test_criterion_2_numeric_matches_exact():
    ok, detail, dt = criterion_2()
    report(2, "smooth/exact agreement", ok, detail, dt)
    assert ok, detail


# ---- 3


def criterion_3():
    t0 = time.perf_counter()
    notes, ok = [], True
    for name in ("halt3.tm", "one-step.tm"):
        tau = derived_tau(name)
        assert predict_blowup_time(load(name)).tau == tau
        for mode in ("intrinsic", "compactified"):
            r = run_cached(name, mode)
            hit = r.outcome == "PlateauHit" and tau - 0.02 <= r.tau_detect <= tau
            ok &= hit
            notes.append(f"{name} {mode} {r.tau_detect:.5f}" if r.tau_detect else f"{name} {mode} {r.outcome}")
        r = run_cached(name, "ambient", threshold=1e6)
        hit = r.outcome == "BlewUp" and tau - 0.02 <= r.tau_detect <= tau
        ok &= hit
        notes.append(f"{name} ambient {r.tau_detect:.5f}" if r.tau_detect else f"{name} ambient {r.outcome}")
    for mode in ("intrinsic", "compactified", "ambient"):
        r = run_cached("loop.tm", mode)
        ok &= r.outcome == "Bounded" and r.final_time == 100.0
        notes.append(f"loop {mode} {r.outcome}")
    dt = time.perf_counter() - t0
    return ok and dt <= 300.0, ", ".join(notes), dt


def test_criterion_3_blowup_iff_halting():
    ok, detail, dt = criterion_3()
    report(3, "blow-up iff halting", ok, detail, dt)
    assert ok, detail


# ---- 4


def criterion_4():
    t0 = time.perf_counter()
    sups = []
    for tape in ("[0]", "1[1]01"):
        r = run_cached("loop.tm", "ambient", tape)
        assert r.outcome == "Bounded"
        sups.append(r.sup_norm)
    excess = max(sups) - SQRT5
    dt = time.perf_counter() - t0
    return excess <= 1e-3, f"max sup|x| - sqrt 5 = {excess:.2e}", dt


def test_criterion_4_no_grow_up():
    ok, detail, dt = criterion_4()
    report(4, "no grow-up", ok, detail, dt)
    assert ok, detail


# ---- 5


def criterion_5():
    t0 = time.perf_counter()
    dev = geometry_deviations(system_for("halt3.tm"), np.random.default_rng(505), 100_000)
    dt = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in dev.values()) and dt <= 30.0
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in dev.items()), dt


def test_criterion_5_geometry_identities():
    ok, detail, dt = criterion_5()
    report(5, "geometry identities", ok, detail, dt)
    assert ok, detail


# ---- 6


def criterion_6():
    t0 = time.perf_counter()
    bad = []
    for name in SAMPLES:
        system = system_for(name)
        bad += [f"{name}: {v}" for v in validate_layout(system.layout)]
        bad += [f"{name}: {v}" for v in support_failures(system, random.Random(606), samples=100)]
    dt = time.perf_counter() - t0
    return not bad, bad[0] if bad else f"{len(SAMPLES)} machines, exact zeros", dt


def test_criterion_6_support_soundness():
    ok, detail, dt = criterion_6()
    report(6, "support soundness", ok, detail, dt)
    assert ok, detail


# ---- 7


def criterion_7():
    t0 = time.perf_counter()
    taus = []
    for X in (1e3, 1e4, 1e6):
        r = run_cached("halt3.tm", "ambient", threshold=X)
        taus.append(r.tau_detect if r.outcome == "BlewUp" else math.inf)
    ok = taus[0] <= taus[1] <= taus[2] <= 2.95 and all(2.88 <= t <= 2.95 for t in taus)
    dt = time.perf_counter() - t0
    return ok, "tau = " + ", ".join(f"{t:.5f}" for t in taus), dt


def test_criterion_7_monotone_thresholds():
    ok, detail, dt = criterion_7()
    report(7, "monotone thresholds", ok, detail, dt)
    assert ok, detail


# ---- 8


def _jvp_error(system, n: int) -> float:
    amb = system.ambient
    rng = np.random.default_rng(808)
    worst, used = 0.0, 0
    for p in random_manifold_points(rng, system, 4 * n):
        if used == n:
            break
        p = p.tolist()
        if amb.height.height_and_complement(p)[1] < 1e-3:
            continue  # a difference step could land on the plateau at infinity
        v = rng.normal(size=4).tolist()
        step = np.array(v + [1.0])
        d = 1e-6
        fd = (amb.forward_map((np.array(p) + d * step).tolist())
              - amb.forward_map((np.array(p) - d * step).tolist())) / (2 * d)
        jv = amb.tangent(p, v)
        worst = max(worst, float(np.linalg.norm(fd - jv) / np.linalg.norm(jv)))
        used += 1
    assert used == n
    return worst


def _trajectory_error(system, periods: float, samples: int) -> float:
    amb = system.ambient
    cfg = IntegratorConfig(atol=1e-12, rtol=1e-12)
    fwd = system.intrinsic_rhs

    def back(t, z):
        return -np.asarray(fwd(-t, z))

    def G_at(y, dt):
        if dt > 0:
            z = solve(fwd, y[4], y, y[4] + dt, cfg).y
        else:
            z = solve(back, -y[4], y, -y[4] - dt, cfg).y
        return amb.forward_map(z.tolist())

    pts = []
    p0 = system.manifold_start(tm.initial(system.spec))
    solve(fwd, 0.0, p0, periods, cfg, observer=lambda t, y: pts.append(y.copy()))
    worst = 0.0
    d = 3e-6  # bb-small has narrow windows; the stencil error scales as d^4
    for y in pts[:: max(1, len(pts) // samples)]:
        if amb.height.height_and_complement(y.tolist())[1] < 1e-3:
            continue
        fd = (G_at(y, -2 * d) - 8 * G_at(y, -d) + 8 * G_at(y, d) - G_at(y, 2 * d)) / (12 * d)
        F = np.array(amb.eval_F(amb.forward_map(y.tolist())))
        worst = max(worst, float(np.linalg.norm(fd - F) / np.linalg.norm(F)))
    return worst


def criterion_8():
    t0 = time.perf_counter()
    jvp = _jvp_error(system_for("halt3.tm"), 1000)
    traj = max(_trajectory_error(system_for("halt3.tm"), 2.9, 120),
               _trajectory_error(system_for("bb-small.tm"), 1.0, 60))
    dt = time.perf_counter() - t0
    return jvp <= 1e-5 and traj <= 1e-6, f"JVP rel {jvp:.1e}, F along flow rel {traj:.1e}", dt


def test_criterion_8_derivative_checks():
    ok, detail, dt = criterion_8()
    report(8, "derivative checks", ok, detail, dt)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for i, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4,
                            criterion_5, criterion_6, criterion_7, criterion_8), 1):
        ok, detail, dt = fn()
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {i}: {detail} ({dt:.1f} s)")
        failed += not ok
    sys.exit(1 if failed else 0)
