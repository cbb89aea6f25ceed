"""Game definition and well-posedness checks.

A game couples a minimizing pursuer and a maximizing evader through the
linear dynamics ``x' = A x + B u_p + C u_e`` and the quadratic payoff

    J = int_{t0}^{tf} (x'Qx + u_p'R_p u_p - u_e'R_e u_e) dt + x(tf)'Q_f x(tf).

Validation measures the sign conventions on the weights and the
controllability-dominance condition: the gap matrix
``C R_e^-1 C' - B R_p^-1 B'`` must be negative definite for the game value
to be guaranteed finite on the whole horizon.  Dominance failures are
reported as warnings rather than hard errors because the value can stay
finite anyway; the Riccati solver detects blow-up independently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DimensionMismatch, NonSymmetric

TOL_SYM = 1e-10  # relative Frobenius asymmetry
TOL_PSD = 1e-10  # absolute eigenvalue floor


def _as_array(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Immutable description of one pursuit-evasion game."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    Q_f: np.ndarray
    R_p: np.ndarray
    R_e: np.ndarray
    t0: float
    tf: float
    x0: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "C", "Q", "Q_f", "R_p", "R_e"):
            arr = np.atleast_2d(_as_array(getattr(self, name), name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        x0 = np.atleast_1d(_as_array(self.x0, "x0"))
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "tf", float(self.tf))

    def __eq__(self, other):
        if not isinstance(other, GameSpec):
            return NotImplemented
        return (
            all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("A", "B", "C", "Q", "Q_f", "R_p", "R_e", "x0")
            )
            and self.t0 == other.t0
            and self.tf == other.tf
        )

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_p(self) -> int:
        return self.B.shape[1]

    @property
    def n_e(self) -> int:
        return self.C.shape[1]

    @property
    def horizon(self) -> float:
        return self.tf - self.t0

    def pursuer_power(self) -> np.ndarray:
        """B R_p^-1 B', the rate at which the pursuer can steer the state."""
        return self.B @ la.solve(self.R_p, self.B.T, assume_a="sym")

    def evader_power(self) -> np.ndarray:
        """C R_e^-1 C', the rate at which the evader can steer the state."""
        return self.C @ la.solve(self.R_e, self.C.T, assume_a="sym")

    def controllability_gap(self) -> np.ndarray:
        """Evader power minus pursuer power; must be negative definite."""
        return self.evader_power() - self.pursuer_power()


@dataclass(frozen=True)
class Violation:
    """One failed validation check with its measured margin."""

    name: str
    measured: float
    message: str
    severity: str = "error"  # "error" | "warning"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    assumption1_max_eig: float
    violations: tuple[Violation, ...]


def _check_dimensions(spec: GameSpec) -> None:
    n, p, e = spec.n_x, spec.n_p, spec.n_e
    expected = {
        "A": (n, n),
        "B": (n, p),
        "C": (n, e),
        "Q": (n, n),
        "Q_f": (n, n),
        "R_p": (p, p),
        "R_e": (e, e),
    }
    for name, shape in expected.items():
        got = getattr(spec, name).shape
        if got != shape:
            raise DimensionMismatch(f"{name} has shape {got}, expected {shape}")
    if spec.x0.shape != (n,):
        raise DimensionMismatch(f"x0 has shape {spec.x0.shape}, expected ({n},)")


def _asymmetry(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - M.T) / (1.0 + np.linalg.norm(M)))


def validate_spec(
    spec: GameSpec, *, tol_sym: float = TOL_SYM, tol_psd: float = TOL_PSD
) -> ValidationReport:
    """Check the game's sign and well-posedness conventions.

    Raises on structural defects (shape mismatch, asymmetric weights);
    returns a report listing every soft check with its measured margin.
    The controllability-dominance check is reported as a warning because
    the game value can remain finite even when it fails.
    """
    _check_dimensions(spec)
    for name in ("Q", "Q_f", "R_p", "R_e"):
        asym = _asymmetry(getattr(spec, name))
        if asym > tol_sym:
            raise NonSymmetric(f"{name} asymmetric: relative Frobenius {asym:.3e}")

    violations: list[Violation] = []
    for name in ("Q", "Q_f"):
        min_eig = float(np.linalg.eigvalsh(getattr(spec, name))[0])
        if min_eig < -tol_psd:
            violations.append(
                Violation(
                    name=f"{name}_psd",
                    measured=min_eig,
                    message=f"{name} not positive semidefinite (min eig {min_eig:.3e})",
                )
            )
    for name in ("R_p", "R_e"):
        min_eig = float(np.linalg.eigvalsh(getattr(spec, name))[0])
        if min_eig <= 0.0:
            violations.append(
                Violation(
                    name=f"{name}_pd",
                    measured=min_eig,
                    message=f"{name} not positive definite (min eig {min_eig:.3e})",
                )
            )
    if not spec.t0 < spec.tf:
        violations.append(
            Violation(
                name="time_order",
                measured=spec.tf - spec.t0,
                message=f"t0 must precede tf (got t0={spec.t0}, tf={spec.tf})",
            )
        )

    max_eig = float(np.linalg.eigvalsh(spec.controllability_gap())[-1])
    if max_eig >= -tol_psd:
        violations.append(
            Violation(
                name="controllability_dominance",
                measured=max_eig,
                message=(
                    "controllability gap not negative definite "
                    f"(max eig {max_eig:.3e}); not satisfied "
                    "(solution may still exist)"
                ),
                severity="warning",
            )
        )

    return ValidationReport(
        passed=not violations,
        assumption1_max_eig=max_eig,
        violations=tuple(violations),
    )


def example_one_spec() -> GameSpec:
    """The bundled worked example (CLI preset ``example1``).

    Planar pursuer and evader, both single integrators, unit horizon,
    terminal miss penalty ``|x_p(1) - x_e(1)|^2`` and effort weights 1/4
    (pursuer) and 1/2 (evader).  The evader input map is taken with
    positive sign so that the evader state integrates its own input
    directly; payoffs are invariant to that sign choice.
    """
    I2 = np.eye(2)
    Z2 = np.zeros((2, 2))
    return GameSpec(
        A=np.zeros((4, 4)),
        B=np.vstack([I2, Z2]),
        C=np.vstack([Z2, I2]),
        Q=np.zeros((4, 4)),
        Q_f=np.block([[I2, -I2], [-I2, I2]]),
        R_p=0.25 * I2,
        R_e=0.5 * I2,
        t0=0.0,
        tf=1.0,
        x0=np.array([0.0, 0.0, 1.0, 0.0]),
    )
