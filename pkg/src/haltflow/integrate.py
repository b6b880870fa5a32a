"""Explicit Runge-Kutta integrators with threshold events.

``dopri5`` is the Dormand-Prince 5(4) pair with FSAL and standard step-size
control; ``rk4`` is the classical fixed-step scheme.  An event is a predicate
``crossed(t, y)`` that is False at the start; when an accepted step makes it
True, the step length is bisected (re-stepping from the last accepted state)
until the crossing time is bracketed to ``event_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Dormand & Prince (1980) coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

METHODS = ("dopri5", "rk4")


@dataclass
class IntegratorConfig:
    method: str = "dopri5"
    atol: float = 1e-10
    rtol: float = 1e-10
    max_step: float = 1e-3
    event_tol: float = 1e-9
    first_step: float = 1e-4
    min_step: float = 1e-14

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not (self.atol > 0 and self.rtol > 0 and self.max_step > 0 and self.event_tol > 0):
            raise ValueError("tolerances and step sizes must be positive")

    def halved(self) -> "IntegratorConfig":
        return IntegratorConfig(self.method, self.atol / 2, self.rtol / 2, self.max_step,
                                self.event_tol, self.first_step, self.min_step)


@dataclass
class Solution:
    t: float
    y: np.ndarray
    status: str  # "horizon" | "event" | "underflow"
    accepted: int = 0
    rejected: int = 0
    evals: int = 0
    event_time: Optional[float] = None
    notes: list = field(default_factory=list)


Rhs = Callable[[float, np.ndarray], np.ndarray]
Event = Callable[[float, np.ndarray], bool]
Observer = Callable[[float, np.ndarray], None]


def _as_rhs(f):
    def rhs(t, y):
        return np.asarray(f(t, y), dtype=float)

    return rhs


class _Counter:
    def __init__(self, f):
        self.f = f
        self.n = 0

    def __call__(self, t, y):
        self.n += 1
        return self.f(t, y)


def _dopri_step(f, t, y, h, k1):
    n = y.shape[0]
    K = np.empty((7, n))
    K[0] = k1
    for i in range(1, 7):
        K[i] = f(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
    y_new = y + h * (_B5 @ K)  # stage 7 is evaluated at y_new (FSAL)
    err = h * (_E @ K)
    return y_new, err, K[6]


def _rk4_step(f, t, y, h, k1):
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    y_new = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y_new


def solve(f, t0: float, y0, t_end: float, cfg: IntegratorConfig | None = None,
          event: Event | None = None, observer: Observer | None = None) -> Solution:
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t_end`` or to the first event."""
    cfg = cfg or IntegratorConfig()
    rhs = _Counter(_as_rhs(f))
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    if observer:
        observer(t, y)
    if event is not None and event(t, y):
        return Solution(t, y, "event", evals=rhs.n, event_time=t)
    if cfg.method == "rk4":
        return _solve_rk4(rhs, t, y, t_end, cfg, event, observer)

    k1 = rhs(t, y)
    h = min(cfg.first_step, cfg.max_step, t_end - t)
    acc = rej = 0
    while t < t_end:
        h = min(h, cfg.max_step, t_end - t)
        if h < cfg.min_step * max(1.0, abs(t)):
            return Solution(t, y, "underflow", acc, rej, rhs.n,
                            notes=[f"step size underflow at t={t:.12g}"])
        y_new, err, k_last = _dopri_step(rhs, t, y, h, k1)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = math.sqrt(float(np.mean((err / scale) ** 2)))
        if not math.isfinite(en):
            en = 1e10
        if en > 1.0:
            rej += 1
            h *= max(0.2, 0.9 * en ** -0.2)
            continue
        t_new = t + h
        if event is not None and event(t_new, y_new):
            lo, hi = 0.0, h
            y_hit = y_new
            while hi - lo > cfg.event_tol:
                mid = 0.5 * (lo + hi)
                y_mid = _dopri_step(rhs, t, y, mid, k1)[0]
                if event(t + mid, y_mid):
                    hi, y_hit = mid, y_mid
                else:
                    lo = mid
            acc += 1
            if observer:
                observer(t + hi, y_hit)
            return Solution(t + hi, y_hit, "event", acc, rej, rhs.n, event_time=t + hi)
        acc += 1
        t, y, k1 = t_new, y_new, k_last
        if observer:
            observer(t, y)
        h *= min(5.0, 0.9 * en ** -0.2) if en > 0 else 5.0
    return Solution(t, y, "horizon", acc, rej, rhs.n)


def _solve_rk4(rhs, t, y, t_end, cfg, event, observer) -> Solution:
    h0 = cfg.max_step
    n_steps = max(1, math.ceil((t_end - t) / h0 - 1e-12))
    h = (t_end - t) / n_steps
    t0 = t
    acc = 0
    for i in range(n_steps):
        k1 = rhs(t, y)
        y_new = _rk4_step(rhs, t, y, h, k1)
        t_new = t0 + (i + 1) * h
        if not np.all(np.isfinite(y_new)):
            return Solution(t, y, "underflow", acc, 0, rhs.n, notes=["non-finite state"])
        if event is not None and event(t_new, y_new):
            lo, hi = 0.0, h
            y_hit = y_new
            while hi - lo > cfg.event_tol:
                mid = 0.5 * (lo + hi)
                y_mid = _rk4_step(rhs, t, y, mid, k1)
                if event(t + mid, y_mid):
                    hi, y_hit = mid, y_mid
                else:
                    lo = mid
            acc += 1
            if observer:
                observer(t + hi, y_hit)
            return Solution(t + hi, y_hit, "event", acc, 0, rhs.n, event_time=t + hi)
        acc += 1
        t, y = t_new, y_new
        if observer:
            observer(t, y)
    return Solution(t, y, "horizon", acc, 0, rhs.n)
