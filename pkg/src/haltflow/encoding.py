"""Exact Cantor-set encoding of tapes into the unit square.

A tape over ``b`` symbols becomes a pair of radix ``B = 2b`` expansions with
digit values ``c(d) = 2d + 1/2``:

    x = sum_{n>=0} c(t_n) B^-(n+1)        (head and cells to the right)
    y = sum_{n>=1} c(t_-n) B^-n           (cells to the left)

Every encoding sits in ``[h_min, h_max]`` with margin ``1/(2(B-1))`` to the
seam of the torus, and the hulls of the first-digit cylinders are separated
by gaps of width ``1/(B-1)``.  Pushing or popping a digit is an exact affine
map, which is what the saddle moves in :mod:`haltflow.machine` realize.

All arithmetic here is in :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .tm import Tape

Rational = Fraction


class PointNotInCantorSet(ValueError):
    pass


class NonterminatingTape(ValueError):
    pass


def radix(b: int) -> int:
    return 2 * b


def digit_value(d: int) -> Fraction:
    return Fraction(4 * d + 1, 2)


def hull(b: int) -> tuple[Fraction, Fraction]:
    """``[h_min, h_max]``: closed hull of all tape encodings."""
    B = radix(b)
    return Fraction(1, 2 * (B - 1)), Fraction(4 * b - 3, 2 * (B - 1))


def gap_width(b: int) -> Fraction:
    return Fraction(1, radix(b) - 1)


def fixed_point(d: int, b: int) -> Fraction:
    """Fixed point of the digit push ``x -> Bx - c(d)``."""
    return digit_value(d) / (radix(b) - 1)


def cylinder_interval(sigma: int, b: int) -> tuple[Fraction, Fraction]:
    """Hull of the x-encodings of all tapes whose head cell holds ``sigma``."""
    if not 0 <= sigma < b:
        raise ValueError(f"symbol {sigma} out of range for alphabet size {b}")
    B = radix(b)
    lo, hi = hull(b)
    c = digit_value(sigma)
    return (c + lo) / B, (c + hi) / B


def _expand(digits: tuple[int, ...], b: int) -> Fraction:
    B = radix(b)
    lo, _ = hull(b)
    acc = lo  # blank tail in closed form
    for d in reversed(digits):
        acc = (digit_value(d) + acc) / B
    return acc


@dataclass(frozen=True)
class TapePoint:
    x: Fraction
    y: Fraction

    def as_floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)


def encode_tape(t: Tape, b: int) -> TapePoint:
    return TapePoint(_expand((t.head,) + t.right, b), _expand(t.left, b))


def _digits(v: Fraction, b: int, max_cells: int) -> tuple[int, ...]:
    B = radix(b)
    lo, hi = hull(b)
    if not lo <= v <= hi:
        raise PointNotInCantorSet(f"{v} outside the encoding hull [{lo}, {hi}]")
    out = []
    while v != lo:
        if len(out) >= max_cells:
            raise NonterminatingTape(f"support exceeds {max_cells} cells")
        w = B * v
        for d in range(b):
            rest = w - digit_value(d)
            if lo <= rest <= hi:
                out.append(d)
                v = rest
                break
        else:
            raise PointNotInCantorSet(f"digit {len(out)} falls in a gap")
    return tuple(out)


def decode_tape(p: TapePoint, b: int, max_cells: int = 10_000) -> Tape:
    right = _digits(p.x, b, max_cells)
    left = _digits(p.y, b, max_cells)
    if not right:
        # x == h_min: all blank from the head on
        return Tape(left, 0, ())
    return Tape(left, right[0], right[1:])


def push_map(d: int, b: int):
    """Affine map of a left shift that pushes the written head digit ``d`` onto y."""
    B = radix(b)
    c = digit_value(d)
    return lambda x, y: (B * x - c, (y + c) / B)


def pop_map(d: int, b: int):
    """Affine map of a right shift that pops digit ``d`` off y into the head cell."""
    B = radix(b)
    c = digit_value(d)
    return lambda x, y: ((x + c) / B, B * y - c)


@dataclass(frozen=True)
class Config4:
    """Point of the four-torus carrying a configuration."""

    state_pt: tuple[Fraction, Fraction]
    tape_pt: TapePoint

    def as_floats(self) -> list[float]:
        return [float(self.state_pt[0]), float(self.state_pt[1]), float(self.tape_pt.x), float(self.tape_pt.y)]


def encode_config(spec, c, layout) -> Config4:
    """State goes to the center of its square, tape to :func:`encode_tape`."""
    sq = layout.state_square(c.state)
    return Config4(sq.center, encode_tape(c.tape, spec.alphabet_size))


def classify_state(layout, pt: Config4) -> int | None:
    """Index of the state square containing the state point, or None."""
    for q in range(len(layout.states)):
        if layout.state_square(q).contains(pt.state_pt):
            return q
    return None
