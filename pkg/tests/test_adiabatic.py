import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_sparse_symmetric, schedule_ode
from rbfqlsa.quantum.adiabatic import ScheduleSpec, aqc_evolve, default_steps, hamiltonian, schedule_f
from rbfqlsa.quantum.encoding import build_H0, build_H1
from rbfqlsa.quantum.state import normalize


def spd_unit(n, kappa, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(np.geomspace(1 / kappa, 1, n)) @ Q.T


def test_schedule_frozen_value():
    # kappa = 4, p = 1.5: f(1/2) = 4/3 (1 - 1.5^-2)
    assert schedule_f(0.5, 4.0, 1.5) == pytest.approx(4 / 3 * (1 - 1 / 2.25), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.5, 500), st.floats(1.05, 1.95))
def test_schedule_endpoints_and_monotone(kappa, p):
    assert schedule_f(0.0, kappa, p) == 0.0
    assert schedule_f(1.0, kappa, p) == 1.0
    assert np.all(np.diff(schedule_f(np.linspace(0, 1, 200), kappa, p)) > 0)


def test_schedule_matches_ode():
    v = np.linspace(0, 1, 21)
    np.testing.assert_allclose(schedule_f(v, 20.0, 1.3), schedule_ode(v, 20.0, 1.3), atol=1e-9)


def test_schedule_rejects_bad_parameters():
    for args in [(0.5, 1.0, 1.5), (0.5, 10.0, 2.0), (1.5, 10.0, 1.5)]:
        with pytest.raises(ValueError):
            schedule_f(*args)


def test_schedule_spec_defaults():
    spec = ScheduleSpec(kappa=7.0)
    assert spec.T == 70.0 and spec.steps == default_steps(70.0)
    np.testing.assert_array_equal(ScheduleSpec(kappa=1.0).f(np.array([0.25])), [0.25])


def test_hamiltonian_null_vector():
    A = spd_unit(4, 5, 0)
    b = normalize(np.ones(4)).real
    for f in (0.0, 0.4, 1.0):
        H = hamiltonian(f, build_H0(b), build_H1(A, b))
        np.testing.assert_allclose(H @ np.concatenate([np.zeros(4), b]), 0, atol=1e-14)


def test_aqc_reaches_solution():
    A = spd_unit(8, 5, 1)
    b = normalize(np.arange(1.0, 9.0)).real
    res = aqc_evolve(A, b)
    assert abs(res.mu0) > 0.99
    assert abs(res.mu1) < 1e-8
    assert 0 < res.eps_int < 1e-3
    assert res.state.layout == (("flag", 1), ("sys", 3))


def test_aqc_longer_time_is_better():
    A = spd_unit(4, 10, 2)
    b = normalize(np.ones(4)).real
    short = aqc_evolve(A, b, T=5.0, estimate_error=False)
    long = aqc_evolve(A, b, T=200.0, estimate_error=False)
    assert abs(long.mu0) > abs(short.mu0)


def test_aqc_input_checks():
    with pytest.raises(ValueError):
        aqc_evolve(np.eye(3), np.ones(3) / np.sqrt(3))
    with pytest.raises(ValueError):
        aqc_evolve(np.eye(4), np.ones(4))
    with pytest.raises(ValueError):
        aqc_evolve(random_sparse_symmetric(4, 1.0, np.random.default_rng(0), 5.0) - 10 * np.eye(4),
                   np.ones(4) / 2)


def test_identity_system_keeps_b():
    b = normalize(np.arange(1.0, 5.0)).real
    res = aqc_evolve(np.eye(4), b, T=3.0)
    assert abs(res.mu0) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kappa,seed", [(2, 0), (10, 1), (40, 2)])
def test_overlap_calibration_on_desk_systems(kappa, seed):
    # T = 10 kappa is calibrated so that |mu0|^2 >= 1/4 on desk systems
    A = spd_unit(8, kappa, seed)
    b = normalize(np.random.default_rng(seed).normal(size=8)).real
    res = aqc_evolve(A, b, estimate_error=False)
    assert abs(res.mu0) ** 2 >= 0.25
