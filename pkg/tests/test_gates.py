import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfsphoton.errors import GateRegimeError, GateRegimeWarning, InputError
from dfsphoton.gates import (
    GateSpec,
    avg_gate_fidelity,
    collective_amplitudes,
    drive_profile,
    gate_schedule,
    ideal_gate,
    predicted_error_model,
    simulate_gate,
    y_half,
)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_drive_profiles():
    assert np.allclose(drive_profile("D", 1.0, 0.0), [1 / np.sqrt(2), 0, -1 / np.sqrt(2)])
    assert np.allclose(drive_profile("A", 1.0, np.pi), -np.array([1, -2, 1]) / np.sqrt(6))
    b = drive_profile("B", 1.0)
    assert np.allclose(b, np.ones(3) / np.sqrt(3))
    assert abs(np.vdot(drive_profile("D", 1.0), b)) < 1e-15
    assert abs(np.vdot(drive_profile("A", 1.0), b)) < 1e-15


@given(st.sampled_from("DAB"), st.floats(0, 3), angles)
def test_drive_profile_addresses_one_mode(target, omega, phi):
    amps = collective_amplitudes(drive_profile(target, omega, phi))
    k = "DAB".index(target)
    assert amps[k] == pytest.approx(omega * np.exp(1j * phi), abs=1e-12)
    assert np.allclose(np.delete(amps, k), 0, atol=1e-12)


def test_y_half_rotation_on_ground():
    U = ideal_gate(GateSpec("R_DG", np.pi / 4, -np.pi / 2, omega=0.05))
    out = U @ np.array([0, 1, 0])
    # (|G> - |D>)/sqrt(2) in this sign convention; phi = +pi/2 gives the + sign
    assert np.allclose(out[:2], [-1 / np.sqrt(2), 1 / np.sqrt(2)])
    U2 = ideal_gate(GateSpec("R_DG", np.pi / 4, np.pi / 2, omega=0.05))
    assert np.allclose((U2 @ [0, 1, 0])[:2], [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_zero_angle_rotation_identity_with_bystander():
    spec = GateSpec("R_DG", 0.0, 0.3, duration=2.0, J=10.0)
    assert np.allclose(ideal_gate(spec), np.diag([1, 1, np.exp(1j * 40.0)]))


def test_p_d_matrix():
    assert np.allclose(ideal_gate(GateSpec("P_D", phi=0.7, Delta=20.0)), np.diag(np.exp(-0.7j * np.array([1, 0, 1]))))


def test_p_g_matrix():
    U = ideal_gate(GateSpec("P_G", phi=0.6, omega=1.0, drive_detuning=100.0))
    assert np.allclose(np.diag(U), np.exp(-1j * np.array([0.2, 0.6, 0.2])))


@given(st.sampled_from(["R_DG", "R_GA", "P_A", "P_D", "P_G"]), angles, angles)
def test_ideal_gates_unitary(kind, theta, phi):
    spec = GateSpec(kind, theta, phi, omega=0.1, J=10.0, Delta=20.0, drive_detuning=100.0)
    U = ideal_gate(spec)
    assert np.linalg.norm(U.conj().T @ U - np.eye(3)) < 1e-12


@given(angles, angles)
def test_p_a_composition(p1, p2):
    a = ideal_gate(GateSpec("P_A", phi=p1)) @ ideal_gate(GateSpec("P_A", phi=p2))
    assert np.allclose(a, ideal_gate(GateSpec("P_A", phi=p1 + p2)), atol=1e-14)


def test_avg_gate_fidelity_examples():
    assert avg_gate_fidelity(np.eye(2), np.eye(2), 2) == pytest.approx(1.0)
    assert avg_gate_fidelity(np.eye(4), np.zeros((4, 4)), 4) == pytest.approx(0.2)
    assert avg_gate_fidelity(np.eye(2), np.diag([1, -1]), 2) == pytest.approx(1 / 3)
    with pytest.raises(InputError):
        avg_gate_fidelity(np.eye(2), np.eye(3))


def test_gate_time_conventions():
    assert GateSpec("R_DG", np.pi / 4, omega=0.05).gate_time() == pytest.approx(np.pi / 0.2)
    assert GateSpec("P_A", phi=1.0, J=10.0).gate_time() == pytest.approx(0.05)
    assert GateSpec("P_D", phi=1.0, Delta=-20.0).gate_time() == pytest.approx((2 * np.pi - 1) / 20)
    assert GateSpec("P_G", phi=0.5, omega=2.0, drive_detuning=200.0).gate_time() == pytest.approx(25.0)
    with pytest.raises(InputError):
        GateSpec("R_DG", 0.3).gate_time()
    with pytest.raises(InputError):
        GateSpec("X")


def test_zero_drive_is_identity_up_to_bystander():
    res = simulate_gate(GateSpec("R_DG", 0.0, 0.0, duration=3.0, J=10.0))
    assert 1 - res.fidelity < 1e-12
    assert res.achieved[2, 2] == pytest.approx(np.exp(2j * 10.0 * 3.0), abs=1e-6)


def test_y_half_high_fidelity():
    res = simulate_gate(y_half(0.05, 10.0))
    assert 1 - res.fidelity < 1e-3
    assert res.dimension == 2


def test_exchange_doubling_reduces_error_fourfold():
    T = 10.0
    e10 = 1 - simulate_gate(GateSpec("R_DG", np.pi / 4, -np.pi / 2, duration=T, J=10.0)).fidelity
    e20 = 1 - simulate_gate(GateSpec("R_DG", np.pi / 4, -np.pi / 2, duration=T, J=20.0)).fidelity
    assert 3.2 < e10 / e20 < 4.8


def test_error_scales_inverse_with_time():
    e = [1 - simulate_gate(GateSpec("R_DG", np.pi / 4, -np.pi / 2, duration=T)).fidelity for T in (10.0, 100.0)]
    assert 8 < e[0] / e[1] < 12.5


def test_error_model_factor_two():
    F_sim = simulate_gate(y_half(0.05, 10.0)).fidelity
    _, _, F_mod = predicted_error_model(0.05, 10.0)
    assert 0.5 <= (1 - F_mod) / (1 - F_sim) <= 2.0


def test_error_model_limits():
    g, d, F = predicted_error_model(0.1, 1e6)
    assert g < 1e-12 and abs(d) < 1e-6 and F == pytest.approx(1.0)
    for J in (0.0, 0.5, 10.0):
        assert predicted_error_model(0.1, J)[0] > 0
    with pytest.raises(InputError):
        predicted_error_model(0.0, 10.0)


def test_r_ga_bystander_phase():
    res = simulate_gate(GateSpec("R_GA", np.pi / 2, 0.0, omega=0.02, J=10.0))
    T = res.duration
    expect = np.angle(np.exp(-2j * 10.0 * T))
    err = np.angle(np.exp(1j * (res.bystander_phase - expect)))
    assert abs(err) < 1e-3


def test_r_ga_transfer():
    res = simulate_gate(GateSpec("R_GA", np.pi / 2, 0.0, omega=0.05, J=10.0))
    assert res.fidelity > 0.999
    # |G> -> -i |A>
    assert res.achieved[2, 1] == pytest.approx(-1j, abs=0.05)


@pytest.mark.parametrize("phi", [0.3, 2.0, -1.0])
def test_phase_gates_simulate_exactly(phi):
    assert 1 - simulate_gate(GateSpec("P_A", phi=phi, J=10.0)).fidelity < 1e-9
    assert 1 - simulate_gate(GateSpec("P_D", phi=phi, Delta=20.0)).fidelity < 1e-9


def test_p_g_far_detuned():
    res = simulate_gate(GateSpec("P_G", phi=0.5, omega=5.0, drive_detuning=1000.0))
    assert 1 - res.fidelity < 5e-3


def test_p_g_regime_guard():
    with pytest.raises(GateRegimeError):
        gate_schedule(GateSpec("P_G", phi=0.5, omega=2.0, drive_detuning=5.0))


def test_zeno_leakage_monotone():
    leaks = [simulate_gate(y_half(w, 10.0)).leakage for w in (0.4, 0.2, 0.1, 0.04)]
    assert all(a > b for a, b in zip(leaks, leaks[1:]))


def test_strong_drive_warns_and_fails():
    with pytest.warns(GateRegimeWarning):
        simulate_gate(y_half(3.5, 10.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GateRegimeWarning)
        with pytest.raises(GateRegimeError):
            simulate_gate(GateSpec("R_DG", 2 * np.pi, 0.0, omega=3.0, J=2.0))


def test_non_strict_reports_heavy_leakage():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GateRegimeWarning)
        res = simulate_gate(GateSpec("R_DG", 2 * np.pi, 0.0, omega=3.0, J=2.0), strict=False)
    assert res.leakage > 0.5
    assert 0.0 <= res.fidelity < 0.5


def test_gamma_prime_increases_error():
    base = 1 - simulate_gate(y_half(0.05)).fidelity
    lossy = 1 - simulate_gate(y_half(0.05), gamma_prime=1e-3).fidelity
    assert lossy > base
