"""From the suspension T^4 x S^1 to a smooth field on R^11.

Pipeline of maps, for a manifold point p = (theta_1..theta_4, s):

    E(p)   each of the five circles -> (cos 2 pi theta, sin 2 pi theta), so |E|^2 = 5
    E_h(p) = (E(p), h(p)) in R^11, h the halting height
    psi(w) = w / sqrt(6)                     maps E_h(N) into the closed unit ball,
                                             |psi(E_h)|^2 = (5 + h^2) / 6
    T(w)   = w / sqrt(1 - |w|^2)             open unit ball -> R^11

so G = T . psi . E_h sends the halting region h = 1 to infinity and
|G(p)|^2 = (5 + h^2) / (1 - h^2).

The field in ball coordinates is Z(w) = chi(dist) * d(psi E_h) (V, 1) evaluated
at the nearest manifold point (angles read off by atan2, height recomputed
from the angles), and F = T_* Z.  Both vanish identically outside a tube of
radius 0.1 around the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bumps
from .machine import SuspensionField

TWO_PI = 2.0 * math.pi
SQRT6 = math.sqrt(6.0)
DIM = 11

CLOCK_CORE = (0.95, 1.05)  # taken mod 1
CLOCK_MARGIN = 0.02
CLOCK_HALF_WIDTH = 0.05


class DomainError(ValueError):
    pass


class AtInfinity(ValueError):
    pass


class OutsideTube(ValueError):
    pass


@dataclass(frozen=True)
class ManifoldPoint:
    theta: tuple[float, float, float, float]
    s: float

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(t % 1.0 for t in self.theta))
        object.__setattr__(self, "s", self.s % 1.0)

    def as_list(self) -> list[float]:
        return [*self.theta, self.s]


def embed(pt: Sequence[float]) -> np.ndarray:
    """Product embedding of five circles; ``pt`` is (theta_1..theta_4, s)."""
    out = np.empty(10)
    for i, a in enumerate(pt[:5]):
        out[2 * i] = math.cos(TWO_PI * a)
        out[2 * i + 1] = math.sin(TWO_PI * a)
    return out


def ball_scale(w):
    return np.asarray(w, dtype=float) / SQRT6


def ball_unscale(w):
    return np.asarray(w, dtype=float) * SQRT6


def poincare(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    n2 = float(w @ w)
    if n2 >= 1.0:
        raise DomainError(f"|w| = {math.sqrt(n2)} is not inside the open unit ball")
    return w / math.sqrt(1.0 - n2)


def poincare_inv(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / math.sqrt(1.0 + float(x @ x))


def poincare_jvp(w, dw) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    dw = np.asarray(dw, dtype=float)
    n2 = float(w @ w)
    if n2 >= 1.0:
        raise DomainError("outside the open unit ball")
    d = math.sqrt(1.0 - n2)
    return dw / d + w * (float(w @ dw) / d**3)


def poincare_inv_jvp(x, dx) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    dx = np.asarray(dx, dtype=float)
    q = 1.0 + float(x @ x)
    return dx / math.sqrt(q) - x * (float(x @ dx) / q**1.5)


@dataclass(frozen=True)
class HeightParams:
    """h = plateau over B[HALT] (inflated) times a clock plateau around s = 0."""

    core: tuple[float, float, float, float]
    margin: float
    clock_core: tuple[float, float] = CLOCK_CORE
    clock_margin: float = CLOCK_MARGIN

    @classmethod
    def for_layout(cls, layout) -> "HeightParams":
        core, margin = layout.halt_plateau()
        return cls(core.as_floats(), float(margin))

    def _clock(self, s: float) -> float:
        return (s - 0.5) % 1.0 + 0.5

    def height(self, pt: Sequence[float]) -> float:
        return self.height_and_complement(pt)[0]

    def height_and_complement(self, pt: Sequence[float]) -> tuple[float, float]:
        """(h, 1 - h), the complement accurate near h = 1."""
        x0, x1, y0, y1 = self.core
        ax, cax = bumps.plateau_with_complement(pt[0] % 1.0, x0, x1, self.margin)
        if ax == 0.0:
            return 0.0, 1.0
        ay, cay = bumps.plateau_with_complement(pt[1] % 1.0, y0, y1, self.margin)
        if ay == 0.0:
            return 0.0, 1.0
        lo, hi = self.clock_core
        ac, cac = bumps.plateau_with_complement(self._clock(pt[4]), lo, hi, self.clock_margin)
        h = ax * ay * ac
        # 1 - abc = (1-a) + a(1-b) + ab(1-c)
        return h, cax + ax * cay + ax * ay * cac

    def height_jet(self, pt: Sequence[float], v: Sequence[float]) -> tuple[float, float, float]:
        """(h, 1 - h, dh . (v, 1)) with ``v`` the torus velocity."""
        x0, x1, y0, y1 = self.core
        m = self.margin
        sx, sy = pt[0] % 1.0, pt[1] % 1.0
        if not (x0 - m < sx < x1 + m and y0 - m < sy < y1 + m):
            return 0.0, 1.0, 0.0
        lo, hi = self.clock_core
        c = self._clock(pt[4])
        if not (lo - self.clock_margin < c < hi + self.clock_margin):
            return 0.0, 1.0, 0.0
        h, comp = self.height_and_complement(pt)
        ax, dax = bumps.plateau_and_deriv(sx, x0, x1, m)
        ay, day = bumps.plateau_and_deriv(sy, y0, y1, m)
        ac, dac = bumps.plateau_and_deriv(c, lo, hi, self.clock_margin)
        dh = (dax * ay * v[0] + ax * day * v[1]) * ac + ax * ay * dac
        return h, comp, dh


@dataclass(frozen=True)
class Retraction:
    point: list[float]
    distance: float
    height: float
    complement: float


class AmbientField:
    """F on R^11 and its ball-coordinate counterpart Z."""

    def __init__(self, field: SuspensionField, height: HeightParams | None = None,
                 eps1: float = 0.05, eps2: float = 0.1, pair_floor: float = 0.5):
        self.field = field
        self.height = height if height is not None else HeightParams.for_layout(field.layout)
        self.eps1, self.eps2, self.pair_floor = eps1, eps2, pair_floor

    # ---- manifold side

    def torus_velocity(self, pt: Sequence[float]) -> list[float]:
        return self.field.eval_V(pt, pt[4])

    def lift(self, pt: Sequence[float]) -> np.ndarray:
        """E_h(p) in R^11."""
        h = self.height.height(pt)
        return np.append(embed(pt), h)

    def ball_point(self, pt: Sequence[float]) -> np.ndarray:
        return self.lift(pt) / SQRT6

    def forward_map(self, pt: Sequence[float]) -> np.ndarray:
        """G(p) = T(psi(E_h(p)))."""
        h, comp = self.height.height_and_complement(pt)
        if comp <= 0.0:
            raise AtInfinity("h = 1: the point is mapped to infinity")
        w = np.append(embed(pt), h) / SQRT6
        # 1 - |w|^2 = (1 - h^2) / 6 since |E|^2 = 5
        return w / math.sqrt(comp * (1.0 + h) / 6.0)

    def _lift_tangent(self, pt, v) -> tuple[list[float], float, float, float]:
        """d(E_h)(v, 1) as a list, plus h, 1 - h."""
        h, comp, dh = self.height.height_jet(pt, v)
        out = []
        for i in range(5):
            a = TWO_PI * pt[i]
            rate = TWO_PI * (v[i] if i < 4 else 1.0)
            out.append(-rate * math.sin(a))
            out.append(rate * math.cos(a))
        out.append(dh)
        return out, h, comp, dh

    def tangent(self, pt: Sequence[float], v: Sequence[float] | None = None) -> np.ndarray:
        """dG_p (v, 1); ``v`` defaults to V(p)."""
        if v is None:
            v = self.torus_velocity(pt)
        dE, h, comp, dh = self._lift_tangent(pt, v)
        if comp <= 0.0:
            raise AtInfinity("h = 1")
        w = np.append(embed(pt), h) / SQRT6
        dw = np.asarray(dE) / SQRT6
        d = math.sqrt(comp * (1.0 + h) / 6.0)
        # E . dE = 0 on the circles, so w . dw = h dh / 6
        return dw / d + w * (h * dh / 6.0 / d**3)

    # ---- ambient side

    def retract_ball(self, w: Sequence[float]) -> Retraction:
        """Nearest manifold data for a ball-coordinate point."""
        u = [SQRT6 * c for c in w]
        pt = []
        dist2 = 0.0
        for i in range(5):
            a, b = u[2 * i], u[2 * i + 1]
            rho = math.hypot(a, b)
            if rho < self.pair_floor:
                raise OutsideTube(f"circle {i + 1} pair norm {rho:.3g} below {self.pair_floor}")
            pt.append((math.atan2(b, a) / TWO_PI) % 1.0)
            dist2 += (rho - 1.0) ** 2
        h, comp = self.height.height_and_complement(pt)
        dist2 += (u[10] - h) ** 2
        return Retraction(pt, math.sqrt(dist2), h, comp)

    def retract(self, x: Sequence[float]) -> tuple[list[float], float]:
        w = poincare_inv(x)
        r = self.retract_ball(w)
        return r.point, r.distance

    def cutoff(self, dist: float) -> float:
        return bumps.step((self.eps2 - dist) / (self.eps2 - self.eps1))

    def eval_Z(self, w: Sequence[float]) -> list[float]:
        """Field in ball coordinates (the compactified system)."""
        try:
            r = self.retract_ball(w)
        except OutsideTube:
            return [0.0] * DIM
        chi = self.cutoff(r.distance)
        if chi == 0.0:
            return [0.0] * DIM
        v = self.field.eval_V(r.point, r.point[4])
        dE = self._lift_tangent(r.point, v)[0]
        k = chi / SQRT6
        return [k * c for c in dE]

    def eval_F(self, x: Sequence[float]) -> list[float]:
        x = [float(c) for c in x]
        n2 = sum(c * c for c in x)
        q = math.sqrt(1.0 + n2)
        w = [c / q for c in x]
        z = self.eval_Z(w)
        xz = sum(a * b for a, b in zip(x, z))
        # dT at T^-1(x) is sqrt(1 + |x|^2) (I + x x^T)
        return [q * (zc + xc * xz) for zc, xc in zip(z, x)]
