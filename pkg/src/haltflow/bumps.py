"""Smooth steps and plateaus built from exp(-1/t).

``step(t)`` is 0 for t <= 0, 1 for t >= 1 and C-infinity everywhere.  A
plateau on ``[lo, hi]`` with margin ``m`` is exactly 1 on the closed interval
and exactly 0 outside ``(lo - m, hi + m)``.  Functions here work on plain
floats; they sit on the hot path of every field evaluation.
"""

from __future__ import annotations

import math

_EXP_CAP = 700.0


def step(t: float) -> float:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    e = 1.0 / t - 1.0 / (1.0 - t)
    if e > _EXP_CAP:
        return 0.0
    return 1.0 / (1.0 + math.exp(e))


def step_deriv(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    e = 1.0 / t - 1.0 / (1.0 - t)
    if abs(e) > _EXP_CAP:
        return 0.0
    s = 1.0 / (1.0 + math.exp(e))
    return s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))


def plateau(x: float, lo: float, hi: float, m: float) -> float:
    if x <= lo - m or x >= hi + m:
        return 0.0
    return step((x - lo + m) / m) * step((hi + m - x) / m)


def plateau_with_complement(x: float, lo: float, hi: float, m: float) -> tuple[float, float]:
    """``(p, 1 - p)`` with the complement computed without cancellation."""
    if x <= lo - m or x >= hi + m:
        return 0.0, 1.0
    u = (x - lo + m) / m
    v = (hi + m - x) / m
    a, b = step(u), step(v)
    # 1 - ab = (1 - a) + a (1 - b), and 1 - step(t) = step(1 - t)
    return a * b, step(1.0 - u) + a * step(1.0 - v)


def plateau_and_deriv(x: float, lo: float, hi: float, m: float) -> tuple[float, float]:
    if x <= lo - m or x >= hi + m:
        return 0.0, 0.0
    u = (x - lo + m) / m
    v = (hi + m - x) / m
    a, b = step(u), step(v)
    return a * b, (step_deriv(u) * b - a * step_deriv(v)) / m


RAMP = 0.25  # fraction of a window spent ramping up (and again down)


def window_profile(s: float, a: float, b: float) -> float:
    """Time profile on ``[a, b]`` with unit integral.

    A plateau on the middle of the window with ramps of relative width RAMP.
    Since ``step(t) + step(1 - t) = 1`` each ramp integrates to half its
    width, so the unnormalized integral is ``(1 - RAMP) (b - a)``.
    """
    if s <= a or s >= b:
        return 0.0
    w = b - a
    u = (s - a) / w
    return step(u / RAMP) * step((1.0 - u) / RAMP) / ((1.0 - RAMP) * w)
