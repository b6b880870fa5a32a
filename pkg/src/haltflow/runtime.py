"""Run the three dynamical pictures of a machine and report what happened.

* intrinsic: (theta, s) on T^4 x S^1, event when the height reaches 1;
* compactified: ball coordinates w = psi(E_h(p)), event when |w| reaches 1;
* ambient: the ODE x' = F(x) on R^11, event when |x| passes a threshold.

The symbolic prediction for a machine that halts after n steps is
tau* = n - 0.05: the deposit into B[HALT] happens during period n and the
clock plateau reaches 1 at s = 0.95 of that period.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import tm
from .encoding import encode_config
from .geometry import CLOCK_HALF_WIDTH, AmbientField, OutsideTube, poincare_inv
from .integrate import IntegratorConfig, solve
from .machine import Layout, SuspensionField, build_layout, build_schedule

MODES = ("intrinsic", "compactified", "ambient")
HEIGHT_EVENT = 1e-9
BALL_EVENT = 1e-9


@dataclass
class System:
    """Everything built from one machine: layout, schedule, fields."""

    spec: tm.TMSpec
    layout: Layout
    field: SuspensionField
    ambient: AmbientField

    @classmethod
    def build(cls, spec: tm.TMSpec, layout: Layout | None = None) -> "System":
        layout = layout if layout is not None else build_layout(spec)
        fld = SuspensionField(spec, layout, build_schedule(spec, layout))
        return cls(spec, layout, fld, AmbientField(fld))

    def manifold_start(self, c0: tm.Configuration) -> list[float]:
        return encode_config(self.spec, c0, self.layout).as_floats() + [0.0]

    def ambient_start(self, c0: tm.Configuration) -> np.ndarray:
        return self.ambient.forward_map(self.manifold_start(c0))

    def ball_start(self, c0: tm.Configuration) -> np.ndarray:
        return self.ambient.ball_point(self.manifold_start(c0))

    def intrinsic_rhs(self, t, y):
        y = y.tolist()
        v = self.field.eval_V(y, y[4])
        v.append(1.0)
        return v


@dataclass
class Prediction:
    tau: Optional[float]
    steps: Optional[int]
    budget: int

    @property
    def halts(self) -> bool:
        return self.tau is not None


def predict_blowup_time(spec: tm.TMSpec, tape: tm.Tape | None = None, budget: int = 10_000) -> Prediction:
    """tau* = n - 0.05 from exact simulation, or no prediction within ``budget`` steps."""
    out = tm.run(spec, tm.initial(spec, tape), budget)
    if isinstance(out, tm.Halted):
        return Prediction(out.steps - CLOCK_HALF_WIDTH, out.steps, budget)
    return Prediction(None, None, budget)


@dataclass
class RunReport:
    mode: str
    outcome: str  # BlewUp | PlateauHit | Bounded | StepSizeUnderflow
    horizon: float
    tau_detect: Optional[float] = None
    threshold: Optional[float] = None
    predicted_tau: Optional[float] = None
    halting_steps: Optional[int] = None
    sup_norm: Optional[float] = None
    sup_height: float = 0.0
    initial_norm: Optional[float] = None
    accepted: int = 0
    rejected: int = 0
    evals: int = 0
    final_time: float = 0.0
    notes: list = field(default_factory=list)
    trajectory: Optional[list] = field(default=None, repr=False)
    columns: Optional[list] = field(default=None, repr=False)

    @property
    def t_min(self) -> float:
        return -math.inf

    @property
    def t_max_estimate(self) -> Optional[float]:
        """Detected end of the maximal interval, None if not observed."""
        return self.tau_detect if self.outcome in ("BlewUp", "PlateauHit") else None

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("trajectory")
        d.pop("columns")
        d["t_min"] = "-inf"
        d["t_max_estimate"] = self.t_max_estimate
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


class _Tracker:
    """Observer recording sup norms, height and (optionally) the trajectory.

    ``measure(t, y)`` returns ``(row, height, norm)``.
    """

    def __init__(self, measure, record: bool, stride: int = 1):
        self.measure = measure
        self.record = record
        self.stride = stride
        self.rows = []
        self.sup_norm = 0.0
        self.sup_height = 0.0
        self._n = 0

    def __call__(self, t, y):
        r, h, norm = self.measure(t, y)
        if h == h:
            self.sup_height = max(self.sup_height, h)
        self.sup_norm = max(self.sup_norm, norm)
        if self.record and self._n % self.stride == 0:
            self.rows.append(r)
        self._n += 1


def _report(mode, sol, tracker, horizon, event_outcome, threshold, prediction, columns, initial_norm):
    if sol.status == "event":
        outcome, tau = event_outcome, sol.event_time
    elif sol.status == "underflow":
        outcome, tau = "StepSizeUnderflow", None
    else:
        outcome, tau = "Bounded", None
    if tracker.record and tracker.rows and tracker.rows[-1][0] != sol.t:
        tracker.rows.append(tracker.measure(sol.t, sol.y)[0])
    return RunReport(
        mode=mode, outcome=outcome, horizon=horizon, tau_detect=tau, threshold=threshold,
        predicted_tau=prediction.tau if prediction else None,
        halting_steps=prediction.steps if prediction else None,
        sup_norm=tracker.sup_norm if mode != "intrinsic" else None,
        sup_height=tracker.sup_height, initial_norm=initial_norm,
        accepted=sol.accepted, rejected=sol.rejected, evals=sol.evals, final_time=sol.t,
        notes=list(sol.notes), trajectory=tracker.rows if tracker.record else None,
        columns=columns,
    )


INTRINSIC_COLUMNS = ["tau", "theta1", "theta2", "theta3", "theta4", "s", "h"]
AMBIENT_COLUMNS = ["tau"] + [f"x{i}" for i in range(1, 12)] + ["h", "norm"]
BALL_COLUMNS = ["tau"] + [f"w{i}" for i in range(1, 12)] + ["h", "norm"]


def integrate_intrinsic(system: System, c0: tm.Configuration, horizon: float,
                        cfg: IntegratorConfig | None = None, record: bool = False,
                        prediction: Prediction | None = None, stride: int = 1) -> RunReport:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    hp = system.ambient.height
    y0 = system.manifold_start(c0)

    def measure(t, y):
        yl = y.tolist()
        h = hp.height(yl)
        return [t, *(c % 1.0 for c in yl[:4]), yl[4] % 1.0, h], h, 0.0

    tracker = _Tracker(measure, record, stride)
    sol = solve(system.intrinsic_rhs, 0.0, y0, horizon, cfg,
                event=lambda t, y: hp.height_and_complement(y.tolist())[1] <= HEIGHT_EVENT,
                observer=tracker)
    return _report("intrinsic", sol, tracker, horizon, "PlateauHit", 1 - HEIGHT_EVENT, prediction,
                   INTRINSIC_COLUMNS, None)


def integrate_compactified(system: System, c0: tm.Configuration, horizon: float,
                           cfg: IntegratorConfig | None = None, record: bool = False,
                           prediction: Prediction | None = None, stride: int = 1) -> RunReport:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    amb = system.ambient
    w0 = system.ball_start(c0)

    def measure(t, w):
        h, n = _height_of(amb, w.tolist(), ball=True), float(np.linalg.norm(w))
        return [t, *w.tolist(), h, n], h, n

    tracker = _Tracker(measure, record, stride)
    sol = solve(lambda t, w: amb.eval_Z(w.tolist()), 0.0, w0, horizon, cfg,
                event=lambda t, w: float(w @ w) >= (1.0 - BALL_EVENT) ** 2,
                observer=tracker)
    return _report("compactified", sol, tracker, horizon, "PlateauHit", 1 - BALL_EVENT, prediction,
                   BALL_COLUMNS, float(np.linalg.norm(w0)))


def integrate_ambient(system: System, x0, horizon: float, threshold: float = 1e6,
                      cfg: IntegratorConfig | None = None, record: bool = False,
                      prediction: Prediction | None = None, stride: int = 1) -> RunReport:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    x0 = np.asarray(x0, dtype=float)
    if not threshold > float(np.linalg.norm(x0)):
        raise ValueError("blow-up threshold must exceed |x0|")
    amb = system.ambient

    def measure(t, x):
        h, n = _height_of(amb, x.tolist(), ball=False), float(np.linalg.norm(x))
        return [t, *x.tolist(), h, n], h, n

    tracker = _Tracker(measure, record, stride)
    sol = solve(lambda t, x: amb.eval_F(x.tolist()), 0.0, x0, horizon, cfg,
                event=lambda t, x: float(x @ x) >= threshold * threshold,
                observer=tracker)
    return _report("ambient", sol, tracker, horizon, "BlewUp", threshold, prediction,
                   AMBIENT_COLUMNS, float(np.linalg.norm(x0)))


def _height_of(amb: AmbientField, v, ball: bool) -> float:
    w = v if ball else poincare_inv(v).tolist()
    try:
        return amb.retract_ball(w).height
    except OutsideTube:
        return float("nan")


def run_mode(system: System, mode: str, tape: tm.Tape | None = None, horizon: float = 100.0,
             threshold: float = 1e6, cfg: IntegratorConfig | None = None, record: bool = False,
             budget: int = 10_000, stride: int = 1) -> RunReport:
    """Run one mode from START on ``tape`` and attach the symbolic prediction."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    c0 = tm.initial(system.spec, tape)
    pred = predict_blowup_time(system.spec, tape, budget)
    if mode == "intrinsic":
        return integrate_intrinsic(system, c0, horizon, cfg, record, pred, stride)
    if mode == "compactified":
        return integrate_compactified(system, c0, horizon, cfg, record, pred, stride)
    return integrate_ambient(system, system.ambient_start(c0), horizon, threshold, cfg, record, pred, stride)
