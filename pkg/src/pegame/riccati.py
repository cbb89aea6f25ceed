"""Backward integration of the game's matrix Riccati flows.

Three flows share one quadratic form ``X' + F'X + XF + D + X N X = 0``
integrated backward from a terminal condition:

* value flow:        F = A,             D = Q,                N = evader power - pursuer power,
                     terminal Q_f.  Its solution prices the game and feeds
                     the equilibrium gains.
* error-value flow:  F = A + S P(t),    D = -P B R_p^-1 B' P, N = -S,
                     terminal 0 at the end of a sensing interval, where
                     S = C R_e^-1 C'.  Prices what the evader can extract
                     from estimation error on one interval.
* gap flow:          F = A,             D = -Q,               N = -S,
                     terminal -P(t1).  Equals error-value minus value, has
                     constant coefficients, and blows up exactly when the
                     error-value flow does; drives the scheduler.

Integration uses an explicit Dormand-Prince 4(5) pair with per-step
symmetrization, a spectral-norm blow-up guard, and stored derivatives for
cubic-Hermite dense output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FiniteEscape, OutOfRange, StepUnderflow
from .game_model import GameSpec

DEFAULT_BLOWUP = 1e9
H_MAX_REL = 1e-3   # keeps the Hermite interpolant's ODE residual near 1e-8
H_MIN_REL = 1e-12


def _sym(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def _guard_norm(X: np.ndarray, threshold: float) -> float:
    """Spectral norm, evaluated exactly only when the cheap Frobenius
    bound says the threshold could be crossed."""
    fro = float(np.linalg.norm(X))
    if fro < threshold:
        return fro  # ||X||_2 <= ||X||_F, cannot have crossed
    return float(np.linalg.norm(X, 2))


@dataclass(frozen=True)
class StepControl:
    """Adaptive-step configuration.

    ``h_max``/``h_min`` default to ``1e-3`` and ``1e-12`` times the
    integration span when left unset.  ``blowup`` is the spectral-norm
    guard above which the flow is declared escaped.
    """

    rtol: float = 1e-10
    atol: float = 1e-13
    h_max: float | None = None
    h_min: float | None = None
    blowup: float = DEFAULT_BLOWUP

    def resolve(self, span: float) -> tuple[float, float]:
        h_max = self.h_max if self.h_max is not None else H_MAX_REL * span
        h_min = self.h_min if self.h_min is not None else H_MIN_REL * span
        return h_max, h_min


@dataclass(frozen=True)
class RiccatiProblem:
    """One backward terminal-value problem in the shared quadratic form."""

    kind: str  # "value" | "error_value" | "gap"
    drift: Callable[[float], np.ndarray]   # F(t)
    load: Callable[[float], np.ndarray]    # D(t)
    quad: np.ndarray                       # N, constant
    terminal_time: float
    terminal_value: np.ndarray
    n: int

    def rhs(self, t: float, X: np.ndarray) -> np.ndarray:
        F = self.drift(t)
        return -(F.T @ X + X @ F + self.load(t) + X @ self.quad @ X)


def make_value_problem(spec: GameSpec) -> RiccatiProblem:
    A, Q, Qf = spec.A, spec.Q, spec.Q_f
    gap = spec.controllability_gap()
    return RiccatiProblem(
        kind="value",
        drift=lambda t: A,
        load=lambda t: Q,
        quad=gap,
        terminal_time=spec.tf,
        terminal_value=_sym(Qf),
        n=spec.n_x,
    )


def make_error_value_problem(
    spec: GameSpec, value_sol: "RiccatiSolution", terminal_time: float
) -> RiccatiProblem:
    """Error-value flow on a sensing interval ending at ``terminal_time``."""
    A = spec.A
    S = spec.evader_power()
    W = spec.pursuer_power()

    def drift(t: float) -> np.ndarray:
        return A + S @ eval_solution(value_sol, t)

    def load(t: float) -> np.ndarray:
        P = eval_solution(value_sol, t)
        return -(P @ W @ P)

    return RiccatiProblem(
        kind="error_value",
        drift=drift,
        load=load,
        quad=-S,
        terminal_time=float(terminal_time),
        terminal_value=np.zeros((spec.n_x, spec.n_x)),
        n=spec.n_x,
    )


def make_gap_problem(
    spec: GameSpec, value_sol: "RiccatiSolution", terminal_time: float
) -> RiccatiProblem:
    """Gap flow (error-value minus value) ending at ``terminal_time``.

    All coefficients are constant; only the terminal condition samples the
    value flow.
    """
    A, Q = spec.A, spec.Q
    S = spec.evader_power()
    Y = -eval_solution(value_sol, terminal_time)
    return RiccatiProblem(
        kind="gap",
        drift=lambda t: A,
        load=lambda t: -Q,
        quad=-S,
        terminal_time=float(terminal_time),
        terminal_value=Y,
        n=spec.n_x,
    )


@dataclass(frozen=True)
class RiccatiSolution:
    """Dense backward solution on a strictly decreasing grid.

    ``values[k]`` and ``derivs[k]`` hold the matrix and its time
    derivative at ``grid[k]``; evaluation between nodes is cubic Hermite.
    """

    kind: str
    grid: np.ndarray      # strictly decreasing, grid[0] = terminal_time
    values: np.ndarray    # (K, n, n)
    derivs: np.ndarray    # (K, n, n)
    reached_floor: bool
    floor: float

    @property
    def terminal_time(self) -> float:
        return float(self.grid[0])

    @property
    def reached_time(self) -> float:
        return float(self.grid[-1])


def eval_solution(sol: RiccatiSolution, t: float) -> np.ndarray:
    """Cubic-Hermite interpolant; exact at grid nodes, symmetrized."""
    t = float(t)
    lo, hi = sol.reached_time, sol.terminal_time
    slack = 1e-12 * max(1.0, abs(hi - lo), abs(hi), abs(lo))
    if t < lo - slack or t > hi + slack:
        raise OutOfRange(f"t={t} outside solved interval [{lo}, {hi}]")
    t = min(max(t, lo), hi)

    asc_t = sol.grid[::-1]
    k_asc = int(np.searchsorted(asc_t, t, side="right")) - 1
    k_asc = min(max(k_asc, 0), len(asc_t) - 2)
    K = len(sol.grid)
    # ascending index -> descending storage: interval [grid[j+1], grid[j]]
    j = K - 2 - k_asc
    t1, t0_ = sol.grid[j], sol.grid[j + 1]
    h = t1 - t0_
    s = (t - t0_) / h
    y0, y1 = sol.values[j + 1], sol.values[j]
    f0, f1 = sol.derivs[j + 1], sol.derivs[j]
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
    return _sym(out)


def _eval_derivative(sol: RiccatiSolution, t: float) -> np.ndarray:
    """Time derivative of the Hermite interpolant (for residual checks)."""
    asc_t = sol.grid[::-1]
    k_asc = int(np.searchsorted(asc_t, t, side="right")) - 1
    k_asc = min(max(k_asc, 0), len(asc_t) - 2)
    j = len(sol.grid) - 2 - k_asc
    t1, t0_ = sol.grid[j], sol.grid[j + 1]
    h = t1 - t0_
    s = (t - t0_) / h
    y0, y1 = sol.values[j + 1], sol.values[j]
    f0, f1 = sol.derivs[j + 1], sol.derivs[j]
    d00 = 6 * s * (s - 1) / h
    d10 = (3 * s - 1) * (s - 1)
    d01 = -6 * s * (s - 1) / h
    d11 = s * (3 * s - 2)
    return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1


@dataclass(frozen=True)
class IntegrationRun:
    """Raw backward-integration record, before packaging as a solution."""

    ts: np.ndarray
    xs: np.ndarray
    fs: np.ndarray
    status: str                 # "reached" | "blowup"
    t_trip: float | None
    norm_trip: float | None


def _dp_step(rhs, t, X, h):
    k1 = rhs(t, X)
    k2 = rhs(t + 0.2 * h, X + h * (0.2 * k1))
    k3 = rhs(t + 0.3 * h, X + h * (0.075 * k1 + 0.225 * k2))
    k4 = rhs(
        t + 0.8 * h,
        X + h * ((44 / 45) * k1 + (-56 / 15) * k2 + (32 / 9) * k3),
    )
    k5 = rhs(
        t + (8 / 9) * h,
        X
        + h
        * (
            (19372 / 6561) * k1
            + (-25360 / 2187) * k2
            + (64448 / 6561) * k3
            + (-212 / 729) * k4
        ),
    )
    k6 = rhs(
        t + h,
        X
        + h
        * (
            (9017 / 3168) * k1
            + (-355 / 33) * k2
            + (46732 / 5247) * k3
            + (49 / 176) * k4
            + (-5103 / 18656) * k5
        ),
    )
    X5 = X + h * (
        (35 / 384) * k1
        + (500 / 1113) * k3
        + (125 / 192) * k4
        + (-2187 / 6784) * k5
        + (11 / 84) * k6
    )
    k7 = rhs(t + h, X5)
    err = h * (
        (71 / 57600) * k1
        + (-71 / 16695) * k3
        + (71 / 1920) * k4
        + (-17253 / 339200) * k5
        + (22 / 525) * k6
        + (-1 / 40) * k7
    )
    return X5, err


def _integrate_backward(
    rhs,
    t_start: float,
    X_start: np.ndarray,
    floor: float,
    ctrl: StepControl,
    span_hint: float | None = None,
) -> IntegrationRun:
    """March backward from (t_start, X_start) toward ``floor``.

    Stops early with status "blowup" when the spectral norm crosses the
    guard, or when the pole squeezes the step below h_min while the norm
    already exceeds sqrt(guard).  Every recorded node is finite and below
    the guard.
    """
    span = span_hint if span_hint is not None else max(t_start - floor, 1e-300)
    h_max, h_min = ctrl.resolve(span)
    time_eps = 1e-14 * max(1.0, abs(t_start), abs(floor))

    t = float(t_start)
    X = _sym(np.array(X_start, dtype=float))
    with np.errstate(over="ignore", invalid="ignore"):
        f = rhs(t, X)
    ts = [t]
    xs = [X]
    fs = [f]
    status = "reached"
    t_trip = norm_trip = None

    h = min(h_max, t_start - floor)
    while t - floor > time_eps:
        h_try = min(h, t - floor)
        last = abs((t - h_try) - floor) <= time_eps
        with np.errstate(over="ignore", invalid="ignore"):
            X_new, err = _dp_step(rhs, t, X, -h_try)
        finite = bool(np.isfinite(X_new).all() and np.isfinite(err).all())
        if finite:
            denom = ctrl.atol + ctrl.rtol * np.maximum(np.abs(X), np.abs(X_new))
            enorm = float(np.sqrt(np.mean((err / denom) ** 2)))
        else:
            enorm = np.inf

        if enorm <= 1.0:
            t = floor if last else t - h_try
            X = _sym(X_new)
            nrm = _guard_norm(X, ctrl.blowup)
            if nrm >= ctrl.blowup:
                status = "blowup"
                t_trip = t
                norm_trip = nrm
                break
            with np.errstate(over="ignore", invalid="ignore"):
                f = rhs(t, X)
            ts.append(t)
            xs.append(X)
            fs.append(f)
            grow = 5.0 if enorm == 0.0 else min(5.0, 0.9 * enorm ** -0.2)
            h = min(h_try * max(grow, 0.2), h_max)
        else:
            shrink = 0.2 if not np.isfinite(enorm) else max(0.2, 0.9 * enorm ** -0.2)
            h = h_try * min(shrink, 0.9)
            if h < h_min:
                nrm = _guard_norm(X, ctrl.blowup)
                if nrm >= np.sqrt(ctrl.blowup):
                    # The pole itself is strangling the step: count it as escape.
                    status = "blowup"
                    t_trip = t
                    norm_trip = nrm
                    break
                raise StepUnderflow(
                    f"step {h:.3e} below h_min {h_min:.3e} at t={t} (norm {nrm:.3e})"
                )

    return IntegrationRun(
        ts=np.array(ts),
        xs=np.array(xs),
        fs=np.array(fs),
        status=status,
        t_trip=t_trip,
        norm_trip=norm_trip,
    )


def solve_riccati(
    problem: RiccatiProblem,
    floor: float,
    step_control: StepControl | None = None,
) -> RiccatiSolution:
    """Integrate ``problem`` backward to ``floor``; dense output.

    Raises FiniteEscape when the blow-up guard trips before the floor.
    """
    ctrl = step_control or StepControl()
    run = _integrate_backward(
        problem.rhs, problem.terminal_time, problem.terminal_value, floor, ctrl
    )
    if run.status == "blowup":
        from .escape import EscapeReport  # deferred: escape builds on this module

        hi = float(run.ts[-1])
        lo = float(run.t_trip)
        report = EscapeReport(
            found=True,
            t_escape=0.5 * (lo + hi),
            bracket=(lo, hi),
            method="norm_blowup",
            norm_at_detection=float(run.norm_trip),
            floor=float(floor),
            terminal_time=problem.terminal_time,
        )
        raise FiniteEscape(
            f"{problem.kind} flow escaped near t={report.t_escape:.9g} "
            f"(norm {run.norm_trip:.3e})",
            report=report,
        )
    return RiccatiSolution(
        kind=problem.kind,
        grid=run.ts,
        values=run.xs,
        derivs=run.fs,
        reached_floor=True,
        floor=float(floor),
    )


def solve_value_riccati(
    spec: GameSpec, step_control: StepControl | None = None
) -> RiccatiSolution:
    """Value flow from Q_f at tf down to t0."""
    return solve_riccati(make_value_problem(spec), spec.t0, step_control)


def riccati_residual(
    sol: RiccatiSolution, problem: RiccatiProblem, samples: int = 100
) -> float:
    """Max normalized ODE residual of the interpolant at interval midpoints."""
    K = len(sol.grid)
    if K < 2:
        return 0.0
    idx = np.unique(np.linspace(0, K - 2, min(samples, K - 1)).round().astype(int))
    worst = 0.0
    for j in idx:
        tm = 0.5 * (sol.grid[j] + sol.grid[j + 1])
        X = eval_solution(sol, tm)
        dX = _eval_derivative(sol, tm)
        res = dX - problem.rhs(tm, X)
        worst = max(
            worst, float(np.linalg.norm(res) / (1.0 + np.linalg.norm(X)))
        )
    return worst
