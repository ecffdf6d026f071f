"""Parameter sweeps behind the error-scaling figures.

Every sweep is a list of independent points evaluated through ``mapper``
(builtin ``map`` or an executor's ordered ``map``), so results always come
back in input order.
"""

import warnings

import numpy as np

from .errors import GateRegimeWarning
from .gates import GateSpec, predicted_error_model, simulate_gate
from .robustness import (
    MODES,
    ROBUST_GATE,
    Perturbation,
    emission_infidelity_under,
    gate_infidelity_under,
)
from .scattering import constant_J_for_bandwidth, cz_fidelity, cz_floor, cz_floor_quoted, packet_for_bandwidth


def fit_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _gate_point(args):
    T, J, gamma_prime, dt = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GateRegimeWarning)
        y = simulate_gate(GateSpec("R_DG", theta=np.pi / 4, phi=-np.pi / 2, duration=T, J=J), gamma_prime=gamma_prime, dt=dt, strict=False)
        ga = simulate_gate(GateSpec("R_GA", theta=np.pi / 2, phi=0.0, duration=T, J=J), gamma_prime=gamma_prime, dt=dt, strict=False)
    omega = np.pi / (4 * T)
    model = 1.0 - predicted_error_model(omega, J)[2]
    return {
        "T": T,
        "J": J,
        "gamma_prime": gamma_prime,
        "omega": omega,
        "infidelity_Y": 1.0 - y.fidelity,
        "infidelity_CPE_transfer": 1.0 - ga.fidelity,
        "model_infidelity_Y": model,
        "leakage_Y": y.leakage,
    }


def sweep_gate_infidelity(T_values, J_values, gamma_prime=0.0, dt=1e-3, mapper=map):
    """Y_pi/2 and G -> A transfer infidelities over the grid ``T x J``."""
    pts = [(float(T), float(J), float(gamma_prime), dt) for J in J_values for T in T_values]
    return list(mapper(_gate_point, pts))


def _cz_point(args):
    B, J, kind, dt, pad = args
    wp = packet_for_bandwidth(B, kind, dt=dt)
    res = cz_fidelity(wp, J, pad=pad)
    floor = cz_floor(J)
    return {
        "kind": kind,
        "B": B,
        "J": J,
        "Jtilde": constant_J_for_bandwidth(B) if kind == "constant_J" else float("nan"),
        "infidelity": 1.0 - res.fidelity,
        "infidelity_closed_form": 1.0 - res.closed_form["fidelity"],
        "floor": floor,
        "floor_quoted": cz_floor_quoted(J),
        "excess": 1.0 - res.fidelity - floor,
        "O_G_re": res.O_G.real,
        "O_G_im": res.O_G.imag,
        "O_D_re": res.O_D.real,
        "O_D_im": res.O_D.imag,
    }


def sweep_cz_bandwidth(B_values, J=10.0, kinds=("gaussian", "constant_J"), dt=0.02, pad=8, mapper=map):
    """CZ infidelity against photon bandwidth for each packet family."""
    pts = [(float(B), float(J), k, dt, pad) for k in kinds for B in B_values]
    return list(mapper(_cz_point, pts))


def _robust_point(args):
    observable, mode, eps, R, seed, dt = args
    p = Perturbation(mode, eps, seed=seed, realizations=R)
    if observable == "gate":
        res = gate_infidelity_under(p, ROBUST_GATE, dt=dt)
    else:
        res = emission_infidelity_under(p)
    return {"observable": observable, **res.row()}


def sweep_robustness(epsilons, modes=MODES, gate_realizations=100, emission_realizations=50, seed=1234,
                     dt=1e-3, observables=("gate", "emission"), mapper=map):
    """Mean infidelity and standard error per (observable, mode, epsilon)."""
    pts = []
    for obs in observables:
        R = gate_realizations if obs == "gate" else emission_realizations
        for mode in modes:
            for eps in epsilons:
                pts.append((obs, mode, float(eps), R, seed, dt))
    return list(mapper(_robust_point, pts))
