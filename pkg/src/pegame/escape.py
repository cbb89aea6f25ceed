"""Finite escape-time detection for backward Riccati flows.

Two independent detectors cross-validate each other:

* norm blow-up: integrate the nonlinear flow backward and bracket the time
  where the spectral norm crosses the guard threshold.
* linear-flow determinant: write the constant-coefficient gap flow as
  Y(t) X(t)^-1 where [X; Y] obeys a linear ODE with the block matrix
  H = [[A, -C R_e^-1 C'], [Q, -A']]; escapes are the zeros of det X(t).
  The linear flow has no finite-time singularity in exact arithmetic,
  which makes this the oracle of record.

det X can touch zero without a sign change (its roots carry the
multiplicity of the number of simultaneously diverging eigendirections,
and the bundled example's root is a double one), so zeros are located by
scanning the smallest singular value of X for dips and refining each dip
by golden-section; a dip counts as an escape only when the reconstructed
flow value there exceeds the blow-up guard.  LU sign changes of det X are
kept as an additional candidate source.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .game_model import GameSpec
from .riccati import (
    DEFAULT_BLOWUP,
    RiccatiProblem,
    StepControl,
    _integrate_backward,
)

TIME_TOL_REL = 1e-9
_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class EscapeReport:
    """Outcome of one escape search on [floor, terminal_time]."""

    found: bool
    t_escape: float | None
    bracket: tuple[float, float] | None
    method: str  # "norm_blowup" | "radon_determinant"
    norm_at_detection: float | None
    floor: float
    terminal_time: float


def _default_time_tol(terminal_time: float, floor: float) -> float:
    return TIME_TOL_REL * max(terminal_time - floor, 1e-12)


def detect_escape_norm(
    problem: RiccatiProblem,
    floor: float,
    time_tol: float | None = None,
    step_control: StepControl | None = None,
) -> EscapeReport:
    """Escape search by backward integration with a blow-up guard.

    On a guard trip the crossing time is bracketed by re-integration from
    the last finite node; the adaptive step near a pole is usually already
    far below ``time_tol`` so refinement rarely iterates.
    """
    ctrl = step_control or StepControl()
    t1 = problem.terminal_time
    if not floor < t1:
        raise ValueError("floor must lie below the terminal time")
    tol = time_tol if time_tol is not None else _default_time_tol(t1, floor)

    run = _integrate_backward(problem.rhs, t1, problem.terminal_value, floor, ctrl)
    if run.status == "reached":
        return EscapeReport(
            found=False,
            t_escape=None,
            bracket=None,
            method="norm_blowup",
            norm_at_detection=None,
            floor=float(floor),
            terminal_time=t1,
        )

    lo = float(run.t_trip)
    hi = float(run.ts[-1])
    X_hi = run.xs[-1]
    norm_det = float(run.norm_trip)
    span = t1 - floor

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sub = _integrate_backward(problem.rhs, hi, X_hi, mid, ctrl, span_hint=span)
        if sub.status == "reached":
            hi = float(sub.ts[-1])
            X_hi = sub.xs[-1]
        else:
            lo = float(sub.t_trip)
            hi = float(sub.ts[-1])
            X_hi = sub.xs[-1]
            norm_det = float(sub.norm_trip)

    t_star = 0.5 * (lo + hi)
    return EscapeReport(
        found=True,
        t_escape=max(t_star, floor),
        bracket=(max(lo, floor), hi),
        method="norm_blowup",
        norm_at_detection=norm_det,
        floor=float(floor),
        terminal_time=t1,
    )


def _hamiltonian_block(spec: GameSpec) -> np.ndarray:
    A, Q = spec.A, spec.Q
    S = spec.evader_power()
    n = spec.n_x
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = A
    H[:n, n:] = -S
    H[n:, :n] = Q
    H[n:, n:] = -A.T
    return H


def _normalize(Z: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(Z)
    return Z / nrm if nrm > 0 else Z


def _flow_norm(Z: np.ndarray, n: int) -> float:
    """Spectral norm of Y X^-1 reconstructed from the stacked flow."""
    X, Y = Z[:n], Z[n:]
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.linalg.solve(X.T, Y.T).T
    except np.linalg.LinAlgError:
        return np.inf
    if not np.isfinite(val).all():
        return np.inf
    return float(np.linalg.norm(val, 2))


class _StackedFlow:
    """Evaluator for exp(H (t - t1)) @ Z0, normalized.

    Uses the eigendecomposition of H when it is well conditioned; falls
    back to the scaling-and-squaring exponential otherwise (the bundled
    example's H is nilpotent, hence defective)."""

    def __init__(self, H: np.ndarray, Z0: np.ndarray, t1: float):
        self.H = H
        self.Z0 = Z0
        self.t1 = t1
        self._eig = None
        try:
            w, V = np.linalg.eig(H)
            cond = np.linalg.cond(V)
            if np.isfinite(cond) and cond < 1e8:
                self._eig = (w, V, np.linalg.solve(V, Z0.astype(complex)))
        except np.linalg.LinAlgError:
            pass

    def __call__(self, t: float) -> np.ndarray:
        dt = t - self.t1
        if self._eig is not None:
            w, V, VZ = self._eig
            Z = (V @ (np.exp(w * dt)[:, None] * VZ)).real
        else:
            Z = la.expm(self.H * dt) @ self.Z0
        return _normalize(Z)


def detect_escape_radon(
    spec: GameSpec,
    terminal_time: float,
    terminal_value: np.ndarray,
    floor: float,
    time_tol: float | None = None,
    *,
    scan_points: int = 2001,
    blowup: float = DEFAULT_BLOWUP,
) -> EscapeReport:
    """Escape search for the constant-coefficient gap flow via its
    linear representation; reports the largest singularity below the
    terminal time."""
    terminal_time = float(terminal_time)
    if not floor < terminal_time:
        raise ValueError("floor must lie below the terminal time")
    tol = (
        time_tol
        if time_tol is not None
        else _default_time_tol(terminal_time, floor)
    )
    n = spec.n_x
    H = _hamiltonian_block(spec)
    Z0 = np.vstack([np.eye(n), np.array(terminal_value, dtype=float)])
    Z0n = _normalize(Z0)

    ts = np.linspace(terminal_time, floor, scan_points)
    delta = ts[0] - ts[1]
    E = la.expm(-H * delta)

    # chunked propagation: the chain Z_{k+1} = E Z_k evaluated in batched
    # blocks, renormalizing at chunk boundaries only
    chunk = 64
    E_pows = np.empty((chunk + 1, 2 * n, 2 * n))
    E_pows[0] = np.eye(2 * n)
    for j in range(1, chunk + 1):
        E_pows[j] = E_pows[j - 1] @ E
    Z_start = Z0n.copy()
    X_blocks = np.empty((scan_points, n, n))
    scales = np.empty(scan_points)
    k = 0
    while k < scan_points:
        m = min(chunk, scan_points - k)
        block = E_pows[:m] @ Z_start
        X_blocks[k : k + m] = block[:, :n, :]
        scales[k : k + m] = np.linalg.norm(block, axis=(1, 2))
        Z_start = _normalize(E_pows[m] @ Z_start)
        k += m
    sigmas = np.linalg.svd(X_blocks, compute_uv=False)[:, -1] / scales
    signs = np.linalg.slogdet(X_blocks)[0]

    stacked = _StackedFlow(H, Z0n, terminal_time)

    def sigma_min(t: float) -> float:
        return float(np.linalg.svd(stacked(t)[:n], compute_uv=False)[-1])

    # Candidate dips, walked from the terminal time downward.  Flat noise
    # produces endless shallow "local minima"; only prominent or deep dips
    # are worth refining (sign changes always are).
    deep = 0.3 * float(np.median(sigmas))
    candidates: list[tuple[float, float]] = []  # (t_high, t_low) brackets
    for k in range(1, scan_points):
        sign_change = signs[k - 1] * signs[k] < 0
        if k + 1 < scan_points:
            neighbor = min(sigmas[k - 1], sigmas[k + 1])
            local_min = sigmas[k] <= neighbor
        else:
            neighbor = sigmas[k - 1]
            local_min = sigmas[k] <= neighbor
        prominent = local_min and (
            sigmas[k] <= 0.9 * neighbor or sigmas[k] <= deep
        )
        if sign_change or prominent:
            t_high = ts[k - 1]
            t_low = ts[k + 1] if k + 1 < scan_points else ts[k]
            candidates.append((t_high, t_low))
            if len(candidates) >= 200:
                break

    width_target = max(1e-2 * tol, 1e-15 * (terminal_time - floor))
    for t_high, t_low in candidates:
        a, b = t_low, t_high  # ascending for the golden search
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = sigma_min(c), sigma_min(d)
        while b - a > width_target:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = sigma_min(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = sigma_min(d)
        t_hat = 0.5 * (a + b)
        nrm = _flow_norm(stacked(t_hat), n)
        if nrm >= blowup:
            t_hat = float(min(max(t_hat, floor), terminal_time))
            half = float(0.5 * max(b - a, tol))
            return EscapeReport(
                found=True,
                t_escape=t_hat,
                bracket=(
                    float(max(t_hat - half, floor)),
                    float(min(t_hat + half, terminal_time)),
                ),
                method="radon_determinant",
                norm_at_detection=float(min(nrm, np.finfo(float).max)),
                floor=float(floor),
                terminal_time=terminal_time,
            )

    return EscapeReport(
        found=False,
        t_escape=None,
        bracket=None,
        method="radon_determinant",
        norm_at_detection=None,
        floor=float(floor),
        terminal_time=terminal_time,
    )
