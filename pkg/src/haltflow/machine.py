"""A time-periodic smooth field on T^4 whose period map steps a Turing machine.

Coordinates on the four-torus are (state x, state y, tape x, tape y).  Each
machine state owns a square ``B[q]`` in the state torus; a configuration is
the center of its square (or a sub-cell of it) times the tape encoding from
:mod:`haltflow.encoding`.

One clock revolution ``s in [0, 1)`` runs a fixed schedule of disjoint time
windows inside ``[0.1, 0.9]``.  Each window carries one move: a translation
of a state tube or of the tape, a hyperbolic saddle on the tape torus, or a
contraction of a parking square.  The move's linear field is multiplied by a
time profile of unit integral and by plateaus that are exactly 1 on the
region the move is meant to carry and exactly 0 on every other region that
may hold a configuration at that time.  The time-1 map of every window is
therefore an exact affine map on configuration points, composed in
:func:`flow_period_exact`.

Phase A (all ingests and tape surgery) precedes phase B (all deposits), so a
configuration delivered to ``B[q']`` is never picked up again in the same
period.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import bumps
from .encoding import (
    Config4,
    TapePoint,
    cylinder_interval,
    fixed_point,
    gap_width,
    hull,
    radix,
)
from .tm import TMSpec

F = Fraction
Point = tuple[Fraction, Fraction]

MAX_STATES = 16
MAX_ALPHABET = 4

ROW_B, ROW_P, ROW_P2 = F(1, 8), F(3, 8), F(5, 8)
LANE_INGEST, LANE_STAGE, LANE_SPARE = F(1, 4), F(1, 2), F(3, 4)
SCHEDULE_SPAN = (F(1, 10), F(9, 10))


class RecipeOverflow(ValueError):
    """The machine is too large for the default layout recipe."""


class AmbiguousMembership(ValueError):
    """A point sits in a plateau transition ring, so it is not a configuration point."""


@dataclass(frozen=True)
class Rect:
    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction

    @classmethod
    def around(cls, center: Point, half: Fraction) -> "Rect":
        cx, cy = center
        return cls(cx - half, cx + half, cy - half, cy + half)

    def inflate(self, m: Fraction) -> "Rect":
        return Rect(self.x0 - m, self.x1 + m, self.y0 - m, self.y1 + m)

    def hull(self, other: "Rect") -> "Rect":
        return Rect(min(self.x0, other.x0), max(self.x1, other.x1),
                    min(self.y0, other.y0), max(self.y1, other.y1))

    def contains(self, p) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    def contains_open(self, p) -> bool:
        return self.x0 < p[0] < self.x1 and self.y0 < p[1] < self.y1

    def meets(self, other: "Rect") -> bool:
        """Closed rectangles intersect."""
        return (self.x0 <= other.x1 and other.x0 <= self.x1
                and self.y0 <= other.y1 and other.y0 <= self.y1)

    def meets_open(self, other: "Rect") -> bool:
        """Open ``self`` meets closed ``other``."""
        return (self.x0 < other.x1 and other.x0 < self.x1
                and self.y0 < other.y1 and other.y0 < self.y1)

    def inside_open(self, other: "Rect") -> bool:
        return (other.x0 < self.x0 and self.x1 < other.x1
                and other.y0 < self.y0 and self.y1 < other.y1)

    def gap(self, other: "Rect") -> Fraction:
        """Chebyshev distance between the rectangles (0 if they meet)."""
        dx = max(other.x0 - self.x1, self.x0 - other.x1, F(0))
        dy = max(other.y0 - self.y1, self.y0 - other.y1, F(0))
        return max(dx, dy)

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.x0), float(self.x1), float(self.y0), float(self.y1)

    def to_json(self):
        return [str(v) for v in (self.x0, self.x1, self.y0, self.y1)]

    @classmethod
    def from_json(cls, data) -> "Rect":
        return cls(*(F(v) for v in data))


@dataclass(frozen=True)
class Square:
    name: str
    center: Point
    half: Fraction

    @property
    def rect(self) -> Rect:
        return Rect.around(self.center, self.half)

    def contains(self, p) -> bool:
        return self.rect.contains(p)


@dataclass(frozen=True)
class Gate:
    """Plateau on one tape axis (0 = tape x, 1 = tape y)."""

    axis: int
    lo: Fraction
    hi: Fraction
    margin: Fraction


@dataclass(frozen=True)
class Leg:
    """A straight move of a square along the state torus."""

    label: str
    phase: str
    start: Point
    displacement: Point
    half: Fraction
    margin: Fraction
    gate: Gate | None
    owners: frozenset
    target: int | None = None
    subcell: str | None = None

    @property
    def end(self) -> Point:
        return (self.start[0] + self.displacement[0], self.start[1] + self.displacement[1])

    @property
    def core(self) -> Rect:
        return Rect.around(self.start, self.half).hull(Rect.around(self.end, self.half))

    @property
    def support(self) -> Rect:
        return self.core.inflate(self.margin)


@dataclass(frozen=True)
class Pipeline:
    """One deposit path: a branch, or a branch plus popped digit for left moves."""

    label: str
    branch: tuple[int, int]
    pop_digit: int | None
    target: int
    park: str
    subcell: Square
    deposit: tuple[Leg, ...]


@dataclass
class Layout:
    alphabet_size: int
    states: tuple[str, ...]
    halt: int
    half: Fraction
    margin: Fraction
    lanes: tuple[Fraction, ...]
    squares: dict[str, Square]
    contraction: Fraction
    ingest: dict[tuple[int, int], tuple[Leg, ...]]
    staging: dict[tuple[int, int, int], tuple[Leg, ...]]
    pipelines: list[Pipeline]

    def state_square(self, q: int) -> Square:
        return self.squares[state_square_name(self.states[q])]

    @property
    def halt_square(self) -> Square:
        return self.state_square(self.halt)

    def legs(self) -> Iterable[Leg]:
        for legs in self.ingest.values():
            yield from legs
        for legs in self.staging.values():
            yield from legs
        for p in self.pipelines:
            yield from p.deposit

    @property
    def subcells(self) -> dict[str, Square]:
        return {p.subcell.name: p.subcell for p in self.pipelines}

    def halt_plateau(self) -> tuple[Rect, Fraction]:
        """Core and margin of the state part of the halting region."""
        return self.halt_square.rect.inflate(self.half / 2), self.half / 2

    # JSON round trip, so hand-edited layouts can be checked from the CLI
    def to_json(self) -> dict:
        def leg(l: Leg):
            return {
                "label": l.label, "phase": l.phase,
                "start": [str(v) for v in l.start],
                "displacement": [str(v) for v in l.displacement],
                "half": str(l.half), "margin": str(l.margin),
                "gate": None if l.gate is None else
                [l.gate.axis, str(l.gate.lo), str(l.gate.hi), str(l.gate.margin)],
                "owners": sorted(l.owners), "target": l.target, "subcell": l.subcell,
            }

        return {
            "alphabet_size": self.alphabet_size,
            "states": list(self.states),
            "halt": self.halt,
            "half": str(self.half),
            "margin": str(self.margin),
            "lanes": [str(v) for v in self.lanes],
            "contraction": str(self.contraction),
            "squares": {k: [[str(v) for v in s.center], str(s.half)] for k, s in self.squares.items()},
            "ingest": [[list(k), [leg(l) for l in v]] for k, v in self.ingest.items()],
            "staging": [[list(k), [leg(l) for l in v]] for k, v in self.staging.items()],
            "pipelines": [
                {
                    "label": p.label, "branch": list(p.branch), "pop_digit": p.pop_digit,
                    "target": p.target, "park": p.park,
                    "subcell": [p.subcell.name, [str(v) for v in p.subcell.center], str(p.subcell.half)],
                    "deposit": [leg(l) for l in p.deposit],
                }
                for p in self.pipelines
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Layout":
        def leg(d) -> Leg:
            g = d["gate"]
            return Leg(
                d["label"], d["phase"], tuple(F(v) for v in d["start"]),
                tuple(F(v) for v in d["displacement"]), F(d["half"]), F(d["margin"]),
                None if g is None else Gate(int(g[0]), F(g[1]), F(g[2]), F(g[3])),
                frozenset(d["owners"]), d["target"], d["subcell"],
            )

        squares = {k: Square(k, (F(c[0]), F(c[1])), F(h)) for k, (c, h) in data["squares"].items()}
        pipelines = []
        for p in data["pipelines"]:
            name, c, h = p["subcell"]
            pipelines.append(Pipeline(
                p["label"], tuple(p["branch"]), p["pop_digit"], p["target"], p["park"],
                Square(name, (F(c[0]), F(c[1])), F(h)), tuple(leg(l) for l in p["deposit"]),
            ))
        return cls(
            data["alphabet_size"], tuple(data["states"]), data["halt"], F(data["half"]),
            F(data["margin"]), tuple(F(v) for v in data["lanes"]), squares, F(data["contraction"]),
            {tuple(k): tuple(leg(l) for l in v) for k, v in data["ingest"]},
            {tuple(k): tuple(leg(l) for l in v) for k, v in data["staging"]},
            pipelines,
        )


def state_square_name(q: str) -> str:
    return f"B[{q}]"


def park_name(q: str, sigma: int) -> str:
    return f"P[{q},{sigma}]"


def stage_name(q: str, sigma: int, tau: int) -> str:
    return f"P2[{q},{sigma},{tau}]"


def _route(label, phase, waypoints: Sequence[Point], half, margin, gate, owners, **kw) -> tuple[Leg, ...]:
    legs = []
    for i, (a, b) in enumerate(zip(waypoints, waypoints[1:]), start=1):
        legs.append(Leg(f"{label}/{i}", phase, a, (b[0] - a[0], b[1] - a[1]),
                        half, margin, gate, frozenset(owners), **kw))
    return tuple(legs)


def build_layout(spec: TMSpec) -> Layout:
    """Default placement: one column per square, three rows, two travel lanes."""
    b = spec.alphabet_size
    if len(spec.states) > MAX_STATES:
        raise RecipeOverflow(f"{len(spec.states)} states exceed the recipe limit of {MAX_STATES}")
    if b > MAX_ALPHABET:
        raise RecipeOverflow(f"alphabet size {b} exceeds the recipe limit of {MAX_ALPHABET}")
    names = spec.states

    branches = list(spec.branches())
    left_moves = [(q, s) for q, s in branches if spec.delta[(q, s)][2] == -1]
    columns = [state_square_name(nm) for nm in names]
    columns += [park_name(names[q], s) for q, s in branches]
    columns += [stage_name(names[q], s, t) for q, s in left_moves for t in range(b)]

    pitch = F(1, len(columns))
    r = min(pitch / 8, F(1, 64))
    m = r
    xs = {name: (i + F(1, 2)) * pitch for i, name in enumerate(columns)}

    squares: dict[str, Square] = {}
    for name in columns:
        row = ROW_B if name.startswith("B[") else ROW_P if name.startswith("P[") else ROW_P2
        squares[name] = Square(name, (xs[name], row), r)

    # pipelines, in schedule order
    plan = []
    for q, s in branches:
        q2, _, eps = spec.delta[(q, s)]
        if eps == -1:
            for t in range(b):
                plan.append(((q, s), t, q2, stage_name(names[q], s, t)))
        else:
            plan.append(((q, s), None, q2, park_name(names[q], s)))
    incoming: dict[int, int] = {}
    for _, _, q2, _ in plan:
        incoming[q2] = incoming.get(q2, 0) + 1
    # floor of 2 keeps every sub-cell (and every deposit tube) off the square's center
    n_in = max([2, *incoming.values()])
    rho = F(1, 2 * n_in)
    sub_half = r * rho
    sub_pitch = 2 * r / n_in
    dep_margin = sub_half / 2

    gap = gap_width(b)
    ingest = {}
    for q, s in branches:
        lo, hi = cylinder_interval(s, b)
        src = squares[state_square_name(names[q])]
        dst = squares[park_name(names[q], s)]
        ingest[(q, s)] = _route(
            f"ingest[{names[q]},{s}]", "A",
            [src.center, (src.center[0], LANE_INGEST), (dst.center[0], LANE_INGEST), dst.center],
            r, m, Gate(0, lo, hi, gap / 4), {src.name, dst.name},
        )
    staging = {}
    for q, s in left_moves:
        src = squares[park_name(names[q], s)]
        for t in range(b):
            lo, hi = cylinder_interval(t, b)
            dst = squares[stage_name(names[q], s, t)]
            staging[(q, s, t)] = _route(
                f"stage[{names[q]},{s},{t}]", "A",
                [src.center, (src.center[0], LANE_STAGE), (dst.center[0], LANE_STAGE), dst.center],
                r, m, Gate(1, lo, hi, gap / 4), {src.name, dst.name},
            )

    pipelines = []
    slot: dict[int, int] = {}
    for (q, s), t, q2, park in plan:
        k = slot.get(q2, 0)
        slot[q2] = k + 1
        target = squares[state_square_name(names[q2])]
        cx, cy = target.center
        label = f"{names[q]},{s}" + ("" if t is None else f",{t}")
        sub = Square(f"sub[{label}]", (cx - r + (k + F(1, 2)) * sub_pitch, cy + r / 2), sub_half)
        src = squares[park].center
        deposit = _route(
            f"deposit[{label}]", "B",
            [src, (src[0], LANE_INGEST), (sub.center[0], LANE_INGEST), sub.center],
            sub_half, dep_margin, None, {park, target.name}, target=q2, subcell=sub.name,
        )
        pipelines.append(Pipeline(label, (q, s), t, q2, park, sub, deposit))

    return Layout(b, names, spec.halt, r, m, (LANE_INGEST, LANE_STAGE), squares, rho,
                  ingest, staging, pipelines)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.subject}: {self.detail}"


def validate_layout(layout: Layout) -> list[Violation]:
    """Exact rational check of every disjointness property the schedule relies on."""
    out: list[Violation] = []
    r, m = layout.half, layout.margin
    unit = Rect(F(0), F(1), F(0), F(1))
    squares = sorted(layout.squares.values(), key=lambda s: s.name)
    subcells = layout.subcells

    for i, a in enumerate(squares):
        if not a.rect.inflate(m).inside_open(unit):
            out.append(Violation("seam", a.name, "square plus margin leaves the unit square"))
        for bq in squares[i + 1:]:
            if a.rect.gap(bq.rect) < 2 * (r + m):
                out.append(Violation("overlap", f"{a.name} / {bq.name}",
                                     f"separation {a.rect.gap(bq.rect)} < tube width {2 * (r + m)}"))

    centers = {state_square_name(nm): layout.squares[state_square_name(nm)].center
               for nm in layout.states if state_square_name(nm) in layout.squares}
    for leg in layout.legs():
        sup = leg.support
        if not sup.inside_open(unit):
            out.append(Violation("seam", leg.label, "tube leaves the unit square"))
        for sq in squares:
            if sq.name in leg.owners:
                continue
            if sup.meets_open(sq.rect):
                out.append(Violation("tube", leg.label, f"tube crosses foreign square {sq.name}"))
        if leg.phase == "B":
            for name, sub in subcells.items():
                if name != leg.subcell and sup.meets_open(sub.rect):
                    out.append(Violation("tube", leg.label, f"tube crosses foreign sub-cell {name}"))
            for name, c in centers.items():
                if sup.contains_open(c):
                    out.append(Violation("tube", leg.label, f"tube covers the center of {name}"))
        if leg.gate is not None:
            g = leg.gate
            if not (0 < g.lo - g.margin and g.hi + g.margin < 1):
                out.append(Violation("gate", leg.label, "tape gate crosses the torus seam"))
            for d in range(layout.alphabet_size):
                lo, hi = cylinder_interval(d, layout.alphabet_size)
                if (lo, hi) == (g.lo, g.hi):
                    continue
                if lo < g.hi + g.margin and g.lo - g.margin < hi:
                    out.append(Violation("gate", leg.label, f"tape gate reaches cylinder of symbol {d}"))

    for p in layout.pipelines:
        target = layout.state_square(p.target)
        image = Rect.around(p.subcell.center, layout.squares[p.park].half * layout.contraction)
        if not image.inside_open(target.rect):
            out.append(Violation("subcell", p.subcell.name, f"contracted image not inside {target.name}"))
        if p.deposit and p.deposit[-1].end != p.subcell.center:
            out.append(Violation("subcell", p.subcell.name, "deposit route does not end at the sub-cell"))

    halt = layout.halt_square
    core, hm = layout.halt_plateau()
    hsup = core.inflate(hm)
    for lane in layout.lanes:
        strip = Rect(F(0), F(1), lane - r - m, lane + r + m)
        if hsup.meets(strip):
            out.append(Violation("halt", halt.name, f"halting plateau reaches lane {lane}"))
    for sq in squares:
        if sq.name != halt.name and hsup.meets(sq.rect):
            out.append(Violation("halt", halt.name, f"halting plateau reaches {sq.name}"))
    for leg in layout.legs():
        if leg.target == layout.halt:
            continue
        if hsup.meets(leg.support):
            out.append(Violation("halt", leg.label, "tube reaches the halting plateau"))
    return out


# --------------------------------------------------------------------------
# moves and schedule


@dataclass(frozen=True)
class Move:
    """Base: state-torus plateau on ``core`` plus optional tape gates."""

    core: Rect
    margin: Fraction
    gates: tuple[Gate, ...]

    def active(self, pt: Config4) -> bool:
        """Exact membership: True on the plateau core, False off its support."""
        sp = pt.state_pt
        if not self.core.contains(sp):
            if self.core.inflate(self.margin).contains_open(sp):
                raise AmbiguousMembership(f"state point {sp} in transition ring")
            return False
        tape = (pt.tape_pt.x, pt.tape_pt.y)
        for g in self.gates:
            v = tape[g.axis]
            if g.lo <= v <= g.hi:
                continue
            if g.lo - g.margin < v < g.hi + g.margin:
                raise AmbiguousMembership(f"tape coordinate {v} in transition ring")
            return False
        return True

    def apply(self, pt: Config4) -> Config4:
        raise NotImplementedError


@dataclass(frozen=True)
class Translate(Move):
    on_tape: bool = False
    displacement: Point = (F(0), F(0))

    def apply(self, pt):
        dx, dy = self.displacement
        if self.on_tape:
            return Config4(pt.state_pt, TapePoint(pt.tape_pt.x + dx, pt.tape_pt.y + dy))
        return Config4((pt.state_pt[0] + dx, pt.state_pt[1] + dy), pt.tape_pt)


@dataclass(frozen=True)
class Saddle(Move):
    """Expand tape ``axis`` by ``base`` about ``fixed``, contract the other axis."""

    axis: int = 0
    fixed: Fraction = F(0)
    base: int = 2

    def apply(self, pt):
        g, B = self.fixed, self.base
        x, y = pt.tape_pt.x, pt.tape_pt.y
        if self.axis == 0:
            x, y = g + B * (x - g), g + (y - g) / B
        else:
            x, y = g + (x - g) / B, g + B * (y - g)
        return Config4(pt.state_pt, TapePoint(x, y))


@dataclass(frozen=True)
class Contract(Move):
    center: Point = (F(0), F(0))
    ratio: Fraction = F(1, 2)

    def apply(self, pt):
        (cx, cy), rho = self.center, self.ratio
        x, y = pt.state_pt
        return Config4((cx + rho * (x - cx), cy + rho * (y - cy)), pt.tape_pt)


@dataclass(frozen=True)
class Window:
    label: str
    phase: str
    start: Fraction
    end: Fraction
    move: Move


@dataclass
class Schedule:
    windows: list[Window]

    def __len__(self):
        return len(self.windows)

    def check(self) -> list[str]:
        problems = []
        lo, hi = SCHEDULE_SPAN
        seen_b = False
        for i, w in enumerate(self.windows):
            if not (lo <= w.start < w.end <= hi):
                problems.append(f"{w.label}: window [{w.start}, {w.end}] outside [{lo}, {hi}]")
            if i and not self.windows[i - 1].end < w.start:
                problems.append(f"{w.label}: overlaps the previous window")
            if w.phase == "B":
                seen_b = True
            elif seen_b:
                problems.append(f"{w.label}: phase A window after a phase B window")
        return problems


def _station(layout: Layout, name: str) -> tuple[Rect, Fraction]:
    return layout.squares[name].rect, layout.margin


def build_schedule(spec: TMSpec, layout: Layout) -> Schedule:
    b = spec.alphabet_size
    B = radix(b)
    h_lo, h_hi = hull(b)
    hull_margin = gap_width(b) / 4
    tape_box = (Gate(0, h_lo, h_hi, hull_margin), Gate(1, h_lo, h_hi, hull_margin))
    names = spec.states

    def leg_move(leg: Leg) -> Translate:
        gates = () if leg.gate is None else (leg.gate,)
        return Translate(leg.core, leg.margin, gates, False, leg.displacement)

    phase_a: list[tuple[str, Move]] = []
    for q, s in spec.branches():
        q2, s2, eps = spec.delta[(q, s)]
        tag = f"{names[q]},{s}"
        park = park_name(names[q], s)
        for leg in layout.ingest[(q, s)]:
            phase_a.append((leg.label, leg_move(leg)))
        core, margin = _station(layout, park)
        if s2 != s:
            dx = (F(4 * s2 + 1, 2) - F(4 * s + 1, 2)) / B
            phase_a.append((f"write[{tag}]", Translate(core, margin, (), True, (dx, F(0)))))
        if eps == 1:
            phase_a.append((f"push[{tag}]", Saddle(core, margin, tape_box, 0, fixed_point(s2, b), B)))
        if eps in (0, 1):
            phase_a.append((f"contract[{tag}]",
                            Contract(core, margin, (), layout.squares[park].center, layout.contraction)))
        if eps == -1:
            for t in range(b):
                for leg in layout.staging[(q, s, t)]:
                    phase_a.append((leg.label, leg_move(leg)))
                st = stage_name(names[q], s, t)
                st_core, st_margin = _station(layout, st)
                phase_a.append((f"pop[{tag},{t}]",
                                Saddle(st_core, st_margin, tape_box, 1, fixed_point(t, b), B)))
                phase_a.append((f"contract[{tag},{t}]",
                                Contract(st_core, st_margin, (), layout.squares[st].center, layout.contraction)))

    phase_b = [(leg.label, leg_move(leg)) for p in layout.pipelines for leg in p.deposit]

    entries = [(lbl, "A", mv) for lbl, mv in phase_a] + [(lbl, "B", mv) for lbl, mv in phase_b]
    lo, hi = SCHEDULE_SPAN
    width = (hi - lo) / len(entries)
    inset = width / 20
    windows = [
        Window(lbl, ph, lo + k * width + inset, lo + (k + 1) * width - inset, mv)
        for k, (lbl, ph, mv) in enumerate(entries)
    ]
    return Schedule(windows)


def flow_period_exact(schedule: Schedule, pt: Config4) -> Config4:
    """Compose the exact time-1 maps of every window that carries ``pt``."""
    for w in schedule.windows:
        if w.move.active(pt):
            pt = w.move.apply(pt)
    return pt


def wrap_config(pt: Config4) -> Config4:
    """Reduce all four coordinates into [0, 1)."""
    return Config4((pt.state_pt[0] % 1, pt.state_pt[1] % 1), TapePoint(pt.tape_pt.x % 1, pt.tape_pt.y % 1))


# --------------------------------------------------------------------------
# float evaluation

_TRANSLATE_STATE, _TRANSLATE_TAPE, _SADDLE, _CONTRACT = range(4)


def _compile(w: Window) -> tuple:
    mv = w.move
    core = mv.core.as_floats()
    gates = tuple((g.axis, float(g.lo), float(g.hi), float(g.margin)) for g in mv.gates)
    if isinstance(mv, Translate):
        kind = _TRANSLATE_TAPE if mv.on_tape else _TRANSLATE_STATE
        params = (float(mv.displacement[0]), float(mv.displacement[1]))
    elif isinstance(mv, Saddle):
        kind = _SADDLE
        params = (mv.axis, float(mv.fixed), math.log(mv.base))
    elif isinstance(mv, Contract):
        kind = _CONTRACT
        params = (float(mv.center[0]), float(mv.center[1]), math.log(mv.ratio))
    else:
        raise TypeError(mv)
    return (float(w.start), float(w.end), kind, core, float(mv.margin), gates, params)


@dataclass
class SuspensionField:
    """Smooth field (V(p, s), 1) on T^4 x S^1."""

    spec: TMSpec
    layout: Layout
    schedule: Schedule
    _compiled: list = field(init=False, repr=False)
    _starts: list = field(init=False, repr=False)

    def __post_init__(self):
        self._compiled = [_compile(w) for w in self.schedule.windows]
        self._starts = [c[0] for c in self._compiled]

    def active_window(self, s: float) -> int | None:
        s %= 1.0
        i = bisect.bisect_right(self._starts, s) - 1
        if i >= 0 and s < self._compiled[i][1]:
            return i
        return None

    def eval_V(self, p: Sequence[float], s: float) -> list[float]:
        """V at torus point ``p`` (four angles, any representative) and clock ``s``."""
        s %= 1.0
        i = bisect.bisect_right(self._starts, s) - 1
        if i < 0:
            return [0.0, 0.0, 0.0, 0.0]
        a, b, kind, core, m, gates, params = self._compiled[i]
        if s >= b:
            return [0.0, 0.0, 0.0, 0.0]
        x0, x1, y0, y1 = core
        sx, sy = p[0] % 1.0, p[1] % 1.0
        weight = bumps.plateau(sx, x0, x1, m)
        if weight == 0.0:
            return [0.0, 0.0, 0.0, 0.0]
        weight *= bumps.plateau(sy, y0, y1, m)
        if weight == 0.0:
            return [0.0, 0.0, 0.0, 0.0]
        tx, ty = p[2] % 1.0, p[3] % 1.0
        for axis, lo, hi, gm in gates:
            weight *= bumps.plateau(ty if axis else tx, lo, hi, gm)
            if weight == 0.0:
                return [0.0, 0.0, 0.0, 0.0]
        weight *= bumps.window_profile(s, a, b)
        if weight == 0.0:
            return [0.0, 0.0, 0.0, 0.0]
        if kind == _TRANSLATE_STATE:
            return [weight * params[0], weight * params[1], 0.0, 0.0]
        if kind == _TRANSLATE_TAPE:
            return [0.0, 0.0, weight * params[0], weight * params[1]]
        if kind == _SADDLE:
            axis, g, rate = params
            k = weight * rate
            if axis == 0:
                return [0.0, 0.0, k * (tx - g), -k * (ty - g)]
            return [0.0, 0.0, -k * (tx - g), k * (ty - g)]
        cx, cy, rate = params
        k = weight * rate
        return [k * (sx - cx), k * (sy - cy), 0.0, 0.0]

    def flow_period_exact(self, pt: Config4) -> Config4:
        return flow_period_exact(self.schedule, pt)


def build_field(spec: TMSpec, layout: Layout | None = None) -> SuspensionField:
    layout = layout if layout is not None else build_layout(spec)
    return SuspensionField(spec, layout, build_schedule(spec, layout))
