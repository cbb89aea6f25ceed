import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pegame.errors import DimensionMismatch, NonSymmetric
from pegame.game_model import GameSpec, example_one_spec, validate_spec


def test_example_one_matrices():
    spec = example_one_spec()
    I2 = np.eye(2)
    assert np.array_equal(spec.A, np.zeros((4, 4)))
    assert np.array_equal(spec.B, np.vstack([I2, np.zeros((2, 2))]))
    assert np.array_equal(spec.C, np.vstack([np.zeros((2, 2)), I2]))
    assert np.array_equal(spec.Q, np.zeros((4, 4)))
    assert np.array_equal(spec.Q_f, np.block([[I2, -I2], [-I2, I2]]))
    assert np.array_equal(spec.R_p, 0.25 * I2)
    assert np.array_equal(spec.R_e, 0.5 * I2)
    assert spec.t0 == 0.0 and spec.tf == 1.0
    assert spec.tf - spec.t0 == 1.0
    assert np.array_equal(spec.x0, [0.0, 0.0, 1.0, 0.0])


def test_example_one_terminal_weight_eigenvalues():
    eigs = np.linalg.eigvalsh(example_one_spec().Q_f)
    assert np.allclose(sorted(eigs), [0.0, 0.0, 2.0, 2.0], atol=1e-12)


def test_controllability_gap_example_one():
    spec = example_one_spec()
    gap = spec.controllability_gap()
    expected = np.diag([-4.0, -4.0, 2.0, 2.0])
    assert np.allclose(gap, expected, atol=1e-12)


def test_validate_example_one_flags_only_dominance():
    report = validate_spec(example_one_spec())
    assert not report.passed
    assert report.assumption1_max_eig == pytest.approx(2.0, abs=1e-12)
    assert [v.name for v in report.violations] == ["controllability_dominance"]
    v = report.violations[0]
    assert v.severity == "warning"
    assert "may still exist" in v.message


def test_validate_pursuer_only_controllability_passes():
    spec = example_one_spec()
    no_evader = GameSpec(
        A=spec.A,
        B=np.eye(4),
        C=np.zeros((4, 2)),
        Q=spec.Q,
        Q_f=spec.Q_f,
        R_p=np.eye(4),
        R_e=spec.R_e,
        t0=0.0,
        tf=1.0,
        x0=spec.x0,
    )
    report = validate_spec(no_evader)
    assert report.passed
    assert report.assumption1_max_eig < 0


def test_validate_evader_only_controllability_fails():
    spec = example_one_spec()
    no_pursuer = GameSpec(
        A=spec.A,
        B=np.zeros((4, 2)),
        C=spec.C,
        Q=spec.Q,
        Q_f=spec.Q_f,
        R_p=spec.R_p,
        R_e=np.eye(2),
        t0=0.0,
        tf=1.0,
        x0=spec.x0,
    )
    report = validate_spec(no_pursuer)
    assert not report.passed
    assert report.assumption1_max_eig >= 0
    assert any(v.name == "controllability_dominance" for v in report.violations)


def test_dimension_mismatch_raises():
    spec = example_one_spec()
    bad = GameSpec(
        A=spec.A,
        B=np.zeros((3, 2)),
        C=spec.C,
        Q=spec.Q,
        Q_f=spec.Q_f,
        R_p=spec.R_p,
        R_e=spec.R_e,
        t0=0.0,
        tf=1.0,
        x0=spec.x0,
    )
    with pytest.raises(DimensionMismatch):
        validate_spec(bad)


def test_non_symmetric_weight_raises():
    spec = example_one_spec()
    Qf = spec.Q_f.copy()
    Qf[0, 1] += 1e-3
    bad = GameSpec(
        A=spec.A,
        B=spec.B,
        C=spec.C,
        Q=spec.Q,
        Q_f=Qf,
        R_p=spec.R_p,
        R_e=spec.R_e,
        t0=0.0,
        tf=1.0,
        x0=spec.x0,
    )
    with pytest.raises(NonSymmetric):
        validate_spec(bad)


def test_time_order_violation_reported():
    spec = example_one_spec()
    bad = GameSpec(
        A=spec.A,
        B=spec.B,
        C=spec.C,
        Q=spec.Q,
        Q_f=spec.Q_f,
        R_p=spec.R_p,
        R_e=spec.R_e,
        t0=1.0,
        tf=0.0,
        x0=spec.x0,
    )
    report = validate_spec(bad)
    assert any(v.name == "time_order" for v in report.violations)


def test_validate_is_pure():
    spec = example_one_spec()
    assert validate_spec(spec) == validate_spec(spec)


def test_spec_equality_and_immutability():
    a, b = example_one_spec(), example_one_spec()
    assert a == b
    with pytest.raises(Exception):
        a.A[0, 0] = 1.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
def test_random_clean_specs_validate(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    B = np.eye(n)
    L = rng.standard_normal((n, n))
    Q = L @ L.T
    M = rng.standard_normal((n, n))
    Q_f = M @ M.T
    spec = GameSpec(
        A=A,
        B=B,
        C=np.zeros((n, 1)),
        Q=Q,
        Q_f=Q_f,
        R_p=np.eye(n),
        R_e=np.eye(1),
        t0=0.0,
        tf=1.0,
        x0=rng.standard_normal(n),
    )
    report = validate_spec(spec)
    assert report.passed
    assert report.assumption1_max_eig < 0
