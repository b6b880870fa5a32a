"""Deterministic single-tape Turing machines: file format, tapes, exact stepping.

Machine file format (UTF-8, order-insensitive, ``#`` starts a comment)::

    alphabet: 2
    states: START, A, HALT
    start: START
    halt: HALT
    START 0 -> A 1 R
    ...

Directions are head motions.  ``R`` moves the head one cell right, which is
the same as shifting the tape left (shift ``+1``); ``L`` is shift ``-1`` and
``N`` leaves the head in place.  ``start:`` and ``halt:`` default to the
states literally named ``START`` and ``HALT``.

The transition table must be total on every non-halting state and must not
mention the halting state on its left-hand side.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

MAX_ALPHABET = 10  # symbols are single decimal digits

HEAD_MOTION = {"R": 1, "L": -1, "N": 0}
MOTION_LETTER = {v: k for k, v in HEAD_MOTION.items()}


class TMFormatError(ValueError):
    """Malformed or inconsistent machine description."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class TMSpec:
    alphabet_size: int
    states: tuple[str, ...]
    start: int
    halt: int
    delta: Mapping[tuple[int, int], tuple[int, int, int]]

    def __post_init__(self):
        b = self.alphabet_size
        if not 2 <= b <= MAX_ALPHABET:
            raise TMFormatError(f"alphabet size {b} out of range 2..{MAX_ALPHABET}")
        n = len(self.states)
        if len(set(self.states)) != n:
            raise TMFormatError("duplicate state name")
        if not (0 <= self.start < n and 0 <= self.halt < n):
            raise TMFormatError("start/halt index out of range")
        if self.start == self.halt:
            raise TMFormatError("start state must differ from halt state")
        for (q, s), (q2, s2, eps) in self.delta.items():
            if q == self.halt:
                raise TMFormatError(f"transition declared for halt state {self.states[q]}")
            if not (0 <= q < n and 0 <= q2 < n):
                raise TMFormatError("transition references unknown state")
            if not (0 <= s < b and 0 <= s2 < b):
                raise TMFormatError(f"symbol out of range for alphabet size {b}")
            if eps not in (-1, 0, 1):
                raise TMFormatError(f"bad shift {eps}")
        for q in range(n):
            if q == self.halt:
                continue
            for s in range(b):
                if (q, s) not in self.delta:
                    raise TMFormatError(f"missing transition for ({self.states[q]}, {s})")

    @property
    def working_states(self) -> list[int]:
        return [q for q in range(len(self.states)) if q != self.halt]

    def branches(self) -> Iterator[tuple[int, int]]:
        """All (state, symbol) pairs with a transition, in canonical order."""
        for q in self.working_states:
            for s in range(self.alphabet_size):
                yield q, s

    def state_index(self, name: str) -> int:
        return self.states.index(name)


_TRANSITION = re.compile(
    r"^(?P<q>\S+)\s+(?P<s>\S+)\s*->\s*(?P<q2>\S+)\s+(?P<s2>\S+)\s+(?P<d>\S+)$"
)
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


def _parse_symbol(tok: str, b: int | None, line: int, col: int) -> int:
    if not tok.isdigit():
        raise TMFormatError(f"bad symbol {tok!r}", line, col)
    v = int(tok)
    if b is not None and v >= b:
        raise TMFormatError(f"symbol {v} ≥ alphabet size {b}", line, col)
    return v


def parse_tm(text: str) -> TMSpec:
    """Parse a machine description; raise :class:`TMFormatError` on anything off-grammar."""
    alphabet = None
    states: list[str] | None = None
    start_name = halt_name = None
    raw_transitions = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        body = body.strip()
        if "->" not in body and ":" in body:
            key, _, value = body.partition(":")
            key = key.strip().lower()
            value = value.strip()
            vcol = indent + body.index(":") + 2
            if key == "alphabet":
                if alphabet is not None:
                    raise TMFormatError("duplicate alphabet declaration", lineno)
                if not value.isdigit():
                    raise TMFormatError(f"alphabet size must be an integer, got {value!r}", lineno, vcol)
                alphabet = int(value)
                if not 2 <= alphabet <= MAX_ALPHABET:
                    raise TMFormatError(f"alphabet size {alphabet} out of range 2..{MAX_ALPHABET}", lineno, vcol)
            elif key == "states":
                if states is not None:
                    raise TMFormatError("duplicate states declaration", lineno)
                names = [t.strip() for t in value.split(",")]
                for nm in names:
                    if not _NAME.match(nm):
                        raise TMFormatError(f"bad state name {nm!r}", lineno, vcol)
                seen = set()
                for nm in names:
                    if nm in seen:
                        raise TMFormatError(f"duplicate state {nm!r}", lineno, vcol)
                    seen.add(nm)
                states = names
            elif key in ("start", "halt"):
                if not _NAME.match(value):
                    raise TMFormatError(f"bad state name {value!r}", lineno, vcol)
                if key == "start":
                    if start_name is not None:
                        raise TMFormatError("duplicate start declaration", lineno)
                    start_name = value
                else:
                    if halt_name is not None:
                        raise TMFormatError("duplicate halt declaration", lineno)
                    halt_name = value
            else:
                raise TMFormatError(f"unknown key {key!r}", lineno, indent + 1)
            continue
        m = _TRANSITION.match(body)
        if not m:
            raise TMFormatError(f"cannot parse {body!r}", lineno, indent + 1)
        raw_transitions.append((lineno, indent, m))

    if alphabet is None:
        raise TMFormatError("missing 'alphabet:' declaration")
    if states is None:
        raise TMFormatError("missing 'states:' declaration")
    start_name = start_name or "START"
    halt_name = halt_name or "HALT"
    for nm in (start_name, halt_name):
        if nm not in states:
            raise TMFormatError(f"unknown state {nm!r}")

    index = {nm: i for i, nm in enumerate(states)}
    halt = index[halt_name]
    delta: dict[tuple[int, int], tuple[int, int, int]] = {}
    for lineno, indent, m in raw_transitions:

        def col(group):
            return indent + m.start(group) + 1

        def state_ref(group):
            nm = m.group(group)
            if nm not in index:
                raise TMFormatError(f"unknown state {nm!r}", lineno, col(group))
            return index[nm]

        q = state_ref("q")
        s = _parse_symbol(m.group("s"), alphabet, lineno, col("s"))
        q2 = state_ref("q2")
        s2 = _parse_symbol(m.group("s2"), alphabet, lineno, col("s2"))
        d = m.group("d").upper()
        if d not in HEAD_MOTION:
            raise TMFormatError(f"direction must be R, L or N, got {m.group('d')!r}", lineno, col("d"))
        if q == halt:
            raise TMFormatError(f"transition declared for halt state {halt_name!r}", lineno, col("q"))
        if (q, s) in delta:
            raise TMFormatError(f"duplicate transition for ({states[q]}, {s})", lineno, col("q"))
        delta[(q, s)] = (q2, s2, HEAD_MOTION[d])

    return TMSpec(alphabet, tuple(states), index[start_name], halt, delta)


def format_tm(spec: TMSpec) -> str:
    """Canonical text form; ``parse_tm(format_tm(s)) == s``."""
    lines = [
        f"alphabet: {spec.alphabet_size}",
        "states: " + ", ".join(spec.states),
        f"start: {spec.states[spec.start]}",
        f"halt: {spec.states[spec.halt]}",
    ]
    for q, s in spec.branches():
        q2, s2, eps = spec.delta[(q, s)]
        lines.append(f"{spec.states[q]} {s} -> {spec.states[q2]} {s2} {MOTION_LETTER[eps]}")
    return "\n".join(lines) + "\n"


def _strip(cells: tuple[int, ...]) -> tuple[int, ...]:
    end = len(cells)
    while end and cells[end - 1] == 0:
        end -= 1
    return cells[:end]


@dataclass(frozen=True)
class Tape:
    """Finitely supported bi-infinite tape with blank symbol 0.

    ``left[i]`` is cell ``-(i+1)``, ``right[i]`` is cell ``i+1``.  Both are
    stored without trailing blanks, so equal tapes compare equal.
    """

    left: tuple[int, ...] = ()
    head: int = 0
    right: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "left", _strip(tuple(self.left)))
        object.__setattr__(self, "right", _strip(tuple(self.right)))

    @classmethod
    def from_cells(cls, cells: Mapping[int, int]) -> "Tape":
        if not cells:
            return cls()
        lo, hi = min(min(cells), 0), max(max(cells), 0)
        left = tuple(cells.get(-i, 0) for i in range(1, -lo + 1))
        right = tuple(cells.get(i, 0) for i in range(1, hi + 1))
        return cls(left, cells.get(0, 0), right)

    def __getitem__(self, n: int) -> int:
        if n == 0:
            return self.head
        if n > 0:
            return self.right[n - 1] if n <= len(self.right) else 0
        return self.left[-n - 1] if -n <= len(self.left) else 0

    def cells(self) -> dict[int, int]:
        """Nonblank cells as a dict."""
        out = {-(i + 1): v for i, v in enumerate(self.left) if v}
        if self.head:
            out[0] = self.head
        out.update({i + 1: v for i, v in enumerate(self.right) if v})
        return out

    def write(self, symbol: int) -> "Tape":
        return Tape(self.left, symbol, self.right)

    def shift(self, eps: int) -> "Tape":
        """Shift the tape by ``eps``: ``+1`` is a left-shift (head moves right)."""
        if eps == 1:
            new_head = self.right[0] if self.right else 0
            return Tape((self.head,) + self.left, new_head, self.right[1:])
        if eps == -1:
            new_head = self.left[0] if self.left else 0
            return Tape(self.left[1:], new_head, (self.head,) + self.right)
        if eps == 0:
            return self
        raise ValueError(f"bad shift {eps}")

    @property
    def support_width(self) -> int:
        return len(self.left) + 1 + len(self.right)

    def literal(self) -> str:
        left = "".join(str(v) for v in reversed(self.left))
        right = "".join(str(v) for v in self.right)
        return f"{left}[{self.head}]{right}"


_TAPE_LITERAL = re.compile(
    r"^(?:\.\.\.|…)?(?P<left>\d*)\[(?P<head>\d)\](?P<right>\d*)(?:\.\.\.|…)?$"
)


def parse_tape(literal: str, alphabet_size: int | None = None) -> Tape:
    """Parse ``"...01[1]0..."``; the bracketed digit is the head cell 0.

    Leading/trailing ellipses are optional and mean blank continuation.
    """
    m = _TAPE_LITERAL.match(literal.strip())
    if not m:
        raise TMFormatError(f"bad tape literal {literal!r}; expected e.g. '01[1]0'")
    digits = [int(c) for c in m.group("left") + m.group("head") + m.group("right")]
    if alphabet_size is not None and any(d >= alphabet_size for d in digits):
        raise TMFormatError(f"tape symbol ≥ alphabet size {alphabet_size} in {literal!r}")
    left = tuple(int(c) for c in reversed(m.group("left")))
    right = tuple(int(c) for c in m.group("right"))
    return Tape(left, int(m.group("head")), right)


@dataclass(frozen=True)
class Configuration:
    state: int
    tape: Tape = field(default_factory=Tape)


class _HaltedMarker:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "HALTED"


HALTED = _HaltedMarker()


def step(spec: TMSpec, c: Configuration) -> Union[Configuration, _HaltedMarker]:
    if c.state == spec.halt:
        return HALTED
    q2, s2, eps = spec.delta[(c.state, c.tape.head)]
    return Configuration(q2, c.tape.write(s2).shift(eps))


@dataclass(frozen=True)
class Halted:
    steps: int
    tape: Tape


@dataclass(frozen=True)
class StillRunning:
    steps: int
    config: Configuration


def run(spec: TMSpec, c0: Configuration, max_steps: int) -> Halted | StillRunning:
    """Apply the step map until HALT or until ``max_steps`` applications."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    c = c0
    for n in range(max_steps + 1):
        if c.state == spec.halt:
            return Halted(n, c.tape)
        if n == max_steps:
            break
        c = step(spec, c)
    return StillRunning(max_steps, c)


def trace(spec: TMSpec, c0: Configuration, max_steps: int) -> list[Configuration]:
    """Configurations visited, starting with ``c0``, stopping at HALT."""
    out = [c0]
    c = c0
    for _ in range(max_steps):
        nxt = step(spec, c)
        if nxt is HALTED:
            break
        out.append(nxt)
        c = nxt
    return out


def initial(spec: TMSpec, tape: Tape | None = None) -> Configuration:
    return Configuration(spec.start, tape if tape is not None else Tape())
