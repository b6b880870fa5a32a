"""Self-check suites run by ``haltflow check`` and by the test-suite."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import tm
from .encoding import classify_state, encode_config, encode_tape
from .geometry import SQRT6, embed, poincare, poincare_inv
from .integrate import IntegratorConfig, solve
from .machine import AmbiguousMembership, Rect, validate_layout
from .runtime import System


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"
        if self.details:
            head += ": " + "; ".join(self.details[:5])
            if len(self.details) > 5:
                head += f" (+{len(self.details) - 5} more)"
        return head


def random_tape(rng: random.Random, b: int, width: int = 6) -> tm.Tape:
    cells = {n: rng.randrange(b) for n in range(-width // 2, width - width // 2)}
    return tm.Tape.from_cells(cells)


def reachable_configs(spec: tm.TMSpec, rng: random.Random, n: int, max_steps: int = 20,
                      width: int = 6) -> list[tm.Configuration]:
    """``n`` non-halting configurations reached from random inputs within ``max_steps``."""
    out = []
    while len(out) < n:
        path = tm.trace(spec, tm.initial(spec, random_tape(rng, spec.alphabet_size, width)), max_steps)
        live = [c for c in path if c.state != spec.halt]
        out.append(rng.choice(live))
    return out


def conjugacy_failures(system: System, configs) -> list[str]:
    spec, layout, fld = system.spec, system.layout, system.field
    bad = []
    for c in configs:
        nxt = tm.step(spec, c)
        try:
            got = fld.flow_period_exact(encode_config(spec, c, layout))
        except AmbiguousMembership as e:
            bad.append(f"{c}: {e}")
            continue
        if got.tape_pt != encode_tape(nxt.tape, spec.alphabet_size):
            bad.append(f"{c.tape.literal()} in {spec.states[c.state]}: tape point mismatch")
        if classify_state(layout, got) != nxt.state:
            bad.append(f"{c.tape.literal()} in {spec.states[c.state]}: state point not in B[{spec.states[nxt.state]}]")
    return bad


def numeric_period(system: System, pt: list[float], cfg: IntegratorConfig | None = None) -> list[float]:
    """Integrate dp/ds = V(p, s) over one clock revolution from ``pt``."""
    fld = system.field
    sol = solve(lambda s, p: fld.eval_V(p.tolist(), s), 0.0, pt, 1.0, cfg)
    if sol.status != "horizon":
        raise RuntimeError(f"period integration stopped early: {sol.notes}")
    return sol.y.tolist()


def _sample_rect(rng: random.Random, r: Rect) -> tuple[float, float]:
    return (float(r.x0) + rng.random() * float(r.x1 - r.x0),
            float(r.y0) + rng.random() * float(r.y1 - r.y0))


def support_failures(system: System, rng: random.Random, samples: int = 100) -> list[str]:
    """eval_V must vanish exactly on parked squares foreign to the active window."""
    layout, fld = system.layout, system.field
    parked = [sq for name, sq in layout.squares.items() if not name.startswith("B[")]
    parked += list(layout.subcells.values())
    bad = []
    for w in fld.schedule.windows:
        core = w.move.core
        ss = [float(w.start + (w.end - w.start) * Fraction(k, 4)) for k in (1, 2, 3)]
        for sq in parked:
            if sq.rect.meets(core):
                continue
            for _ in range(samples):
                sx, sy = _sample_rect(rng, sq.rect)
                p = [sx, sy, rng.random(), rng.random()]
                v = fld.eval_V(p, rng.choice(ss))
                if any(c != 0.0 for c in v):
                    bad.append(f"window {w.label} moves foreign square {sq.name}")
                    break
    return bad


def random_manifold_points(rng: np.random.Generator, system: System, n: int) -> np.ndarray:
    """Uniform points of T^4 x S^1, a quarter of them forced into the halting region."""
    pts = rng.random((n, 5))
    core, _ = system.layout.halt_plateau()
    x0, x1, y0, y1 = core.as_floats()
    k = n // 4
    pts[:k, 0] = x0 + (x1 - x0) * rng.random(k)
    pts[:k, 1] = y0 + (y1 - y0) * rng.random(k)
    pts[:k, 4] = (0.9 + 0.2 * rng.random(k)) % 1.0
    return pts


def geometry_deviations(system: System, rng: np.random.Generator, n: int) -> dict[str, float]:
    hp = system.ambient.height
    shell = ball = roundtrip = 0.0
    for p in random_manifold_points(rng, system, n):
        pl = p.tolist()
        e = embed(pl)
        shell = max(shell, abs(float(e @ e) - 5.0))
        h = hp.height(pl)
        w = np.append(e, h) / SQRT6
        ball = max(ball, abs(float(w @ w) - (5.0 + h * h) / 6.0))
        if float(w @ w) < 1.0:  # h may round onto the sphere
            x = poincare(w)
            roundtrip = max(roundtrip, float(np.max(np.abs(poincare_inv(x) - w))))
    return {"shell": shell, "ball": ball, "roundtrip": roundtrip}


def run_suites(system: System, seed: int = 0, n_configs: int = 100, n_points: int = 10_000,
               samples: int = 20) -> list[SuiteResult]:
    rng = random.Random(seed)
    results = []

    problems = [str(v) for v in validate_layout(system.layout)] + system.field.schedule.check()
    results.append(SuiteResult("layout", not problems, problems))

    configs = reachable_configs(system.spec, rng, n_configs)
    bad = conjugacy_failures(system, configs)
    results.append(SuiteResult("conjugacy", not bad, bad or [f"{len(configs)} configurations exact"]))

    bad = support_failures(system, rng, samples)
    results.append(SuiteResult("support", not bad, bad))

    dev = geometry_deviations(system, np.random.default_rng(seed), n_points)
    ok = all(v <= 1e-12 for v in dev.values())
    results.append(SuiteResult("geometry", ok, [f"{k} {v:.2e}" for k, v in dev.items()]))
    return results


def max_circle_distance(a, b) -> float:
    """Largest per-coordinate distance on the circle R/Z."""
    d = 0.0
    for u, v in zip(a, b):
        e = (u - v) % 1.0
        d = max(d, min(e, 1.0 - e))
    return d
