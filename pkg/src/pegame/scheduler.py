"""Minimum-cardinality communication scheduling.

The pursuer must refresh its state estimate before the gap flow, run
backward from the next communication time with boundary -P there, escapes.
The backward recursion places each instant at the detected escape time of
the following interval plus a safety margin, which maximizes every
inter-communication duration and therefore minimizes the count.

Escape exactly at an interval's left endpoint is allowed: the estimate
resets there, so the half-open interval semantics exclude it.  A small
boundary tolerance absorbs detector noise at that endpoint.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateSchedule, NoFeasibleInstance, UnsortedInstants
from .escape import EscapeReport, detect_escape_norm, detect_escape_radon
from .game_model import GameSpec
from .riccati import RiccatiSolution, StepControl, eval_solution, make_gap_problem

MARGIN_REL = 1e-6
BISECT_TOL_REL = 1e-4


def _boundary_tol(spec: GameSpec, time_tol: float | None) -> float:
    base = 1e-8 * spec.horizon
    if time_tol is not None:
        base = max(base, 10.0 * time_tol)
    return base


def _gap_escape(
    spec: GameSpec,
    value_sol: RiccatiSolution,
    terminal_time: float,
    floor: float,
    method: str,
    time_tol: float | None,
    step_control: StepControl | None,
) -> EscapeReport:
    if method == "radon":
        boundary = -eval_solution(value_sol, terminal_time)
        return detect_escape_radon(spec, terminal_time, boundary, floor, time_tol)
    if method == "norm":
        problem = make_gap_problem(spec, value_sol, terminal_time)
        return detect_escape_norm(problem, floor, time_tol, step_control)
    raise ValueError(f"unknown escape method {method!r}")


@dataclass(frozen=True)
class IntervalCertificate:
    """Escape check for one inter-communication interval [t_start, t_end)."""

    t_start: float
    t_end: float
    escape_found: bool
    t_escape: float | None = None

    @property
    def passed(self) -> bool:
        return not self.escape_found


@dataclass(frozen=True)
class CommSchedule:
    """Ordered communication instants with per-interval certificates.

    ``slack_sup[i]`` is the supremum to which instant ``i`` could be
    delayed, holding its neighbours fixed, without creating an escape in
    the preceding interval; the schedule must stay strictly below it.
    """

    instants: tuple[float, ...]
    margin: float
    certificates: tuple[IntervalCertificate, ...]
    slack_sup: tuple[float, ...] = ()

    @property
    def N(self) -> int:
        return len(self.instants)

    @property
    def admissible(self) -> bool:
        return all(c.passed for c in self.certificates)


def check_admissibility(
    spec: GameSpec,
    value_sol: RiccatiSolution,
    instants,
    *,
    method: str = "radon",
    time_tol: float | None = None,
    boundary_tol: float | None = None,
    step_control: StepControl | None = None,
    fail_fast: bool = False,
) -> tuple[IntervalCertificate, ...]:
    """Certify every interval of a schedule, including the leading one.

    An interval fails when the gap flow run backward from its right
    endpoint escapes strictly inside it; an escape at the left endpoint
    (within the boundary tolerance) does not count against it.  With
    ``fail_fast`` the certificate list stops at the first failure.
    """
    instants = [float(t) for t in instants]
    if any(b <= a for a, b in zip(instants, instants[1:])):
        raise UnsortedInstants(f"instants not strictly increasing: {instants}")
    if instants and not (spec.t0 < instants[0] and instants[-1] < spec.tf):
        raise UnsortedInstants(
            f"instants must lie strictly inside ({spec.t0}, {spec.tf}): {instants}"
        )
    btol = (
        boundary_tol
        if boundary_tol is not None
        else _boundary_tol(spec, time_tol)
    )
    bounds = [spec.t0, *instants, spec.tf]
    certificates = []
    for a, b in zip(bounds, bounds[1:]):
        rep = _gap_escape(spec, value_sol, b, a, method, time_tol, step_control)
        inside = bool(rep.found and rep.t_escape > a + btol)
        certificates.append(
            IntervalCertificate(
                t_start=float(a),
                t_end=float(b),
                escape_found=inside,
                t_escape=float(rep.t_escape) if rep.found else None,
            )
        )
        if fail_fast and inside:
            break
    return tuple(certificates)


def optimal_schedule(
    spec: GameSpec,
    value_sol: RiccatiSolution,
    margin: float | None = None,
    *,
    method: str = "radon",
    time_tol: float | None = None,
    compute_slack: bool = True,
    step_control: StepControl | None = None,
) -> CommSchedule:
    """Backward recursion: each instant sits just above the escape time of
    the interval it opens.

    Stops when the next escape falls below the start of the game.  Raises
    DegenerateSchedule when an escape lands within the margin of the start
    time, where the required slack collapses.
    """
    margin = float(margin) if margin is not None else MARGIN_REL * spec.horizon
    if margin < 0:
        raise ValueError("margin must be nonnegative")

    instants: list[float] = []
    t_next = spec.tf
    for _ in range(10000):
        rep = _gap_escape(
            spec, value_sol, t_next, spec.t0, method, time_tol, step_control
        )
        if not rep.found:
            break
        t_star = float(rep.t_escape)
        if t_star <= spec.t0 + margin:
            raise DegenerateSchedule(
                f"escape at {t_star:.9g} within margin of t0={spec.t0}"
            )
        t_i = t_star + margin
        if t_i >= t_next:
            raise DegenerateSchedule(
                f"margin {margin:.3e} exceeds the slack below t={t_next:.9g}"
            )
        instants.insert(0, t_i)
        t_next = t_i
    else:
        raise DegenerateSchedule("backward recursion failed to terminate")

    certificates = check_admissibility(
        spec,
        value_sol,
        instants,
        method=method,
        time_tol=time_tol,
        step_control=step_control,
    )
    slack: tuple[float, ...] = ()
    if compute_slack:
        bounds = [spec.t0, *instants, spec.tf]
        slack = tuple(
            max_next_instance(
                spec,
                value_sol,
                bounds[i],
                bounds[i + 2],
                method=method,
                time_tol=time_tol,
                step_control=step_control,
            )
            for i in range(len(instants))
        )
    return CommSchedule(
        instants=tuple(instants),
        margin=margin,
        certificates=certificates,
        slack_sup=slack,
    )


def max_next_instance(
    spec: GameSpec,
    value_sol: RiccatiSolution,
    t_prev: float,
    upper: float,
    *,
    method: str = "radon",
    time_tol: float | None = None,
    bisect_tol: float | None = None,
    boundary_tol: float | None = None,
    step_control: StepControl | None = None,
) -> float:
    """Supremum of admissible next communication times after ``t_prev``.

    A candidate time is feasible when the gap flow run backward from it
    stays finite strictly above ``t_prev``; the supremum is located by
    bisection and is itself a strict bound for the schedule.
    """
    t_prev, upper = float(t_prev), float(upper)
    if not (spec.t0 <= t_prev < upper <= spec.tf):
        raise ValueError(
            f"need t0 <= t_prev < upper <= tf, got t_prev={t_prev}, upper={upper}"
        )
    btol = (
        boundary_tol
        if boundary_tol is not None
        else _boundary_tol(spec, time_tol)
    )
    tol = (
        float(bisect_tol)
        if bisect_tol is not None
        else BISECT_TOL_REL * spec.horizon
    )

    def feasible(tau: float) -> bool:
        rep = _gap_escape(
            spec, value_sol, tau, t_prev, method, time_tol, step_control
        )
        return (not rep.found) or rep.t_escape <= t_prev + btol

    if feasible(upper):
        return upper
    probe = t_prev + max(tol * 1e-2, 1e-8 * spec.horizon)
    if probe >= upper or not feasible(probe):
        raise NoFeasibleInstance(
            f"no admissible instant just above t_prev={t_prev}; numerical fault"
        )
    lo, hi = probe, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
