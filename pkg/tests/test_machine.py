from __future__ import annotations

import dataclasses
import random
from fractions import Fraction as Fr

import numpy as np
import pytest
from scipy.integrate import quad

from haltflow import bumps, tm
from haltflow.checks import (conjugacy_failures, max_circle_distance, numeric_period,
                             reachable_configs, support_failures)
from haltflow.encoding import Config4, classify_state, encode_config, encode_tape
from haltflow.machine import (RecipeOverflow, Square, Translate, build_layout, build_schedule,
                              validate_layout)

from conftest import SAMPLES, load, system_for


def many_states(n: int) -> tm.TMSpec:
    names = [f"Q{i}" for i in range(n - 2)]
    states = ["START", *names, "HALT"]
    lines = ["alphabet: 2", "states: " + ",".join(states)]
    for i, q in enumerate(states[:-1]):
        nxt = states[i + 1]
        lines += [f"{q} 0 -> {nxt} 1 R", f"{q} 1 -> {nxt} 0 L"]
    return tm.parse_tm("\n".join(lines))


# ---- layout


def test_halt3_layout_counts(halt3):
    names = list(halt3.layout.squares)
    assert sum(n.startswith("B[") for n in names) == 3
    assert sum(n.startswith("P[") for n in names) == 4
    assert sum(n.startswith("P2[") for n in names) <= 8
    assert validate_layout(halt3.layout) == []


@pytest.mark.parametrize("name", SAMPLES)
def test_default_layouts_validate(name):
    system = system_for(name)
    assert validate_layout(system.layout) == []
    assert system.field.schedule.check() == []


def test_recipe_bounds():
    assert validate_layout(build_layout(many_states(16))) == []
    with pytest.raises(RecipeOverflow):
        build_layout(many_states(17))


def test_coincident_squares_are_reported(halt3):
    lay = halt3.layout
    a, b = "P[START,0]", "P[START,1]"
    squares = dict(lay.squares)
    squares[b] = Square(b, squares[a].center, squares[b].half)
    bad = validate_layout(dataclasses.replace(lay, squares=squares))
    overlaps = [v for v in bad if v.kind == "overlap"]
    assert overlaps and any(a in v.subject and b in v.subject for v in overlaps)


def test_tube_through_foreign_square(halt3):
    lay = halt3.layout
    leg = lay.ingest[(0, 0)][1]
    victim = next(n for n in lay.squares if n.startswith("P[") and n not in leg.owners)
    mid = (leg.start[0] + leg.displacement[0] / 2, leg.start[1] + leg.displacement[1] / 2)
    squares = dict(lay.squares)
    squares[victim] = Square(victim, mid, squares[victim].half)
    bad = validate_layout(dataclasses.replace(lay, squares=squares))
    assert any(v.kind == "tube" and v.subject == leg.label and victim in v.detail for v in bad)


def test_layout_json_roundtrip(bb_small):
    lay = bb_small.layout
    again = type(lay).from_json(lay.to_json())
    assert again.to_json() == lay.to_json()
    assert validate_layout(again) == []


# ---- schedule


def test_window_counts(halt3, loop):
    assert len(halt3.field.schedule) <= 50
    assert all(p.target == loop.spec.start for p in loop.layout.pipelines)


def test_same_symbol_stay_has_no_write_or_shift():
    spec = tm.parse_tm("alphabet: 2\nstates: START,HALT\nSTART 0 -> HALT 0 N\nSTART 1 -> HALT 0 N\n")
    sched = build_schedule(spec, build_layout(spec))
    labels = [w.label for w in sched.windows]
    assert "write[START,0]" not in labels and "write[START,1]" in labels
    assert not any(l.startswith(("push", "pop")) for l in labels)


# ---- field


def test_idle_clock(halt3):
    rng = random.Random(0)
    for _ in range(200):
        p = [rng.random() for _ in range(4)]
        assert halt3.field.eval_V(p, 0.95) == [0.0] * 4
        assert halt3.field.eval_V(p, 0.05) == [0.0] * 4


def test_first_window_midpoint(halt3):
    spec, fld = halt3.spec, halt3.field
    w = fld.schedule.windows[0]
    assert isinstance(w.move, Translate) and not w.move.on_tape
    p = encode_config(spec, tm.initial(spec), halt3.layout).as_floats()
    mid = float((w.start + w.end) / 2)
    omega = 1.0 / ((1.0 - bumps.RAMP) * float(w.end - w.start))  # plateau is 1 at the midpoint
    d = [float(c) for c in w.move.displacement]
    assert fld.eval_V(p, mid) == pytest.approx([omega * d[0], omega * d[1], 0.0, 0.0], rel=1e-14)


@pytest.mark.parametrize("name", SAMPLES)
def test_support_soundness(name):
    system = system_for(name)
    assert support_failures(system, random.Random(1), samples=5) == []


def test_profile_integrates_to_one():
    for a, b in [(0.1, 0.11), (0.3, 0.3177), (0.5, 0.9)]:
        r = bumps.RAMP * (b - a)
        val, _ = quad(bumps.window_profile, a, b, args=(a, b), points=[a + r, b - r],
                      epsabs=1e-14, epsrel=1e-13, limit=200)
        assert abs(val - 1.0) <= 1e-12


def test_complement_is_accurate():
    p, q = bumps.plateau_with_complement(0.2 + 1e-9, 0.25, 0.5, 0.05)
    assert p + q == pytest.approx(1.0, abs=1e-15)
    assert q > 0.0


# ---- exact period map


def test_one_period_from_blank(halt3):
    spec, lay = halt3.spec, halt3.layout
    c = tm.initial(spec)
    got = halt3.field.flow_period_exact(encode_config(spec, c, lay))
    nxt = tm.step(spec, c)
    assert got.tape_pt == encode_tape(nxt.tape, 2)
    assert classify_state(lay, got) == nxt.state


def test_halt_square_is_fixed(halt3):
    lay = halt3.layout
    pt = Config4(lay.halt_square.center, encode_tape(tm.parse_tape("1[0]1"), 2))
    assert halt3.field.flow_period_exact(pt) == pt


def test_three_periods_reach_halt(halt3):
    spec, lay = halt3.spec, halt3.layout
    pt = encode_config(spec, tm.initial(spec), lay)
    for _ in range(3):
        pt = halt3.field.flow_period_exact(pt)
    assert classify_state(lay, pt) == spec.halt
    assert lay.halt_square.rect.contains(pt.state_pt)


@pytest.mark.parametrize("name", SAMPLES)
def test_conjugacy_reachable(name):
    system = system_for(name)
    configs = reachable_configs(system.spec, random.Random(2), 60)
    assert conjugacy_failures(system, configs) == []


@pytest.mark.parametrize("name", ["halt3.tm", "bb-small.tm"])
def test_numeric_matches_exact(name):
    system = system_for(name)
    for c in reachable_configs(system.spec, random.Random(3), 4):
        pt = encode_config(system.spec, c, system.layout)
        got = numeric_period(system, pt.as_floats())
        want = system.field.flow_period_exact(pt).as_floats()
        assert max_circle_distance(got, want) <= 1e-6


# ---- regularity


def _d2(f, x, h):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def test_smoothness_probe(halt3):
    fld = halt3.field
    rng = np.random.default_rng(4)
    ratios = []
    for w in fld.schedule.windows:
        a, b = float(w.start), float(w.end)
        ramp = bumps.RAMP * (b - a)
        x_lo, x_hi, y_lo, y_hi = w.move.core.as_floats()
        tape = [1 / 6, 1 / 6]
        for g in w.move.gates:
            tape[g.axis] = float(g.lo + g.hi) / 2
        base = np.array([(x_lo + x_hi) / 2, (y_lo + y_hi) / 2, *tape, 0.0])
        for _ in range(2):
            x0 = base.copy()
            x0[4] = a + ramp * rng.uniform(0.2, 0.8)
            x0[:4] += rng.normal(scale=1e-3, size=4)
            d = rng.normal(size=5)
            d /= np.linalg.norm(d)
            for k in range(4):
                def f(t, k=k):
                    y = x0 + t * d
                    return fld.eval_V(y[:4].tolist(), y[4])[k]

                h = ramp / 40
                d1, d2, d3 = _d2(f, 0.0, h), _d2(f, 0.0, h / 2), _d2(f, 0.0, h / 4)
                assert np.isfinite([d1, d2, d3]).all()
                if abs(d2 - d3) > 1e-6 * max(1.0, abs(d3)):
                    ratios.append((d1 - d2) / (d2 - d3))
    assert len(ratios) >= 50
    assert np.median(np.abs(ratios)) == pytest.approx(4.0, abs=0.5)


def test_no_equilibrium(halt3):
    rng = np.random.default_rng(5)
    pts = rng.random((20_000, 5))
    least = min(float(np.hypot(np.linalg.norm(halt3.field.eval_V(p[:4].tolist(), p[4])), 1.0)) for p in pts)
    assert least >= 1.0
