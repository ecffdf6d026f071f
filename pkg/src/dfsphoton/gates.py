"""Gates on the decoherence-free qutrit ``(|D>, |G>, |A>)``.

Rotation angles follow the ``cos(theta)`` convention: a drive of amplitude
``Omega`` applied for ``T = theta / Omega`` rotates by ``theta``, so the
pi/2 rotation about y is ``R_DG(pi/4, -pi/2)``.
"""

import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .dynamics import DEFAULT_DT, ControlSchedule, Segment, nonhermitian_propagator
from .errors import GateRegimeError, GateRegimeWarning, InputError
from .geometry import EmitterArray, collective_basis
from .hilbert import PROFILE_A, PROFILE_B, PROFILE_D, collective_lowering, dfs_states

KINDS = ("R_DG", "R_GA", "P_A", "P_D", "P_G")
_PROFILES = {"D": PROFILE_D, "A": PROFILE_A, "B": PROFILE_B}


@dataclass(frozen=True)
class GateSpec:
    """Parameters of one DFS gate.

    Parameters
    ----------
    kind : str
        One of ``R_DG``, ``R_GA``, ``P_A``, ``P_D``, ``P_G``.
    theta : float
        Rotation angle (rotations only).
    phi : float
        Drive phase for rotations, target phase for phase gates.
    duration : float, optional
        Gate time. Rotations derive ``Omega = theta / T`` when it is given
        instead of ``omega``; phase gates derive it from ``phi``.
    omega : float, optional
        Drive amplitude (rotations and ``P_G``).
    J : float
        Exchange coupling held during the gate.
    Delta : float, optional
        Global detuning for ``P_D``.
    drive_detuning : float, optional
        Drive detuning for ``P_G``.
    stark_compensation : bool
        Cancel the drive-induced Stark shift with a global detuning.
    """

    kind: str
    theta: float = 0.0
    phi: float = 0.0
    duration: float = None
    omega: float = None
    J: float = 10.0
    Delta: float = None
    drive_detuning: float = None
    stark_compensation: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown gate kind {self.kind!r}; expected one of {KINDS}")
        if self.omega is not None and self.omega < 0:
            raise InputError("omega must be non-negative")
        if self.duration is not None and self.duration < 0:
            raise InputError("duration must be non-negative")

    def gate_time(self):
        """Duration implied by the spec."""
        k = self.kind
        if k in ("R_DG", "R_GA"):
            if self.duration is not None:
                return float(self.duration)
            if not self.omega:
                if self.theta == 0:
                    return 0.0
                raise InputError("rotation needs omega or duration")
            return abs(self.theta) / self.omega
        if self.duration is not None:
            return float(self.duration)
        if k == "P_A":
            if self.J <= 0:
                raise InputError("P_A needs J > 0")
            return _wrap(self.phi) / (2.0 * self.J)
        if k == "P_D":
            if not self.Delta:
                raise InputError("P_D needs a non-zero Delta")
            return _wrap(self.phi * np.sign(self.Delta)) / abs(self.Delta)
        # P_G: phi = Omega^2 T / drive_detuning
        if not self.omega or not self.drive_detuning:
            raise InputError("P_G needs omega and drive_detuning")
        return _wrap(self.phi * np.sign(self.drive_detuning)) * abs(self.drive_detuning) / self.omega**2

    def accumulated_phase(self):
        """Ground-state phase ``Omega^2 T / drive_detuning`` actually imprinted by ``P_G``.

        Differs from ``phi`` by a multiple of 2 pi, which matters for the
        ``phi / 3`` phase on ``|D>`` and ``|A>``.
        """
        return self.omega**2 * self.gate_time() / self.drive_detuning

    def rabi(self):
        T = self.gate_time()
        if self.omega is not None:
            return float(self.omega)
        return abs(self.theta) / T if T > 0 else 0.0

    def to_dict(self):
        return asdict(self)


def _wrap(phi):
    return float(np.mod(phi, 2.0 * np.pi))


@dataclass
class GateResult:
    spec: GateSpec
    ideal: np.ndarray
    achieved: np.ndarray
    fidelity: float
    leakage: float
    dimension: int
    duration: float
    bystander_phase: float = None

    def to_dict(self):
        def cplx(m):
            return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}

        return {
            "spec": self.spec.to_dict(),
            "fidelity": self.fidelity,
            "infidelity": 1.0 - self.fidelity,
            "leakage": self.leakage,
            "dimension": self.dimension,
            "duration": self.duration,
            "bystander_phase": self.bystander_phase,
            "ideal": cplx(self.ideal),
            "achieved": cplx(self.achieved),
        }


def drive_profile(target, omega, phi=0.0):
    """Per-emitter Rabi amplitudes addressing one collective mode.

    The collective projection onto ``target`` is ``omega * exp(i phi)`` and
    the projection onto the other two modes vanishes.
    """
    if target not in _PROFILES:
        raise InputError(f"target must be D, A or B, got {target!r}")
    if omega < 0:
        raise InputError("omega must be non-negative")
    return omega * np.exp(1j * phi) * _PROFILES[target].astype(complex)


def rotation(theta, phi, chi, pair):
    """Rotation on a pair of DFS levels with bystander factor ``exp(i chi)``."""
    c, s = np.cos(theta), np.sin(theta)
    U = np.zeros((3, 3), dtype=complex)
    if pair == "DG":
        U[:2, :2] = [[c, -1j * np.exp(1j * phi) * s], [-1j * np.exp(-1j * phi) * s, c]]
        U[2, 2] = np.exp(1j * chi)
    else:
        U[1:, 1:] = [[c, -1j * np.exp(1j * phi) * s], [-1j * np.exp(-1j * phi) * s, c]]
        U[0, 0] = np.exp(1j * chi)
    return U


def phase_A(phi):
    return np.diag([1.0, 1.0, np.exp(1j * phi)])


def phase_D(phi):
    return np.diag([np.exp(-1j * phi), 1.0, np.exp(-1j * phi)])


def phase_G(phi):
    return np.diag([np.exp(-1j * phi / 3), np.exp(-1j * phi), np.exp(-1j * phi / 3)])


def ideal_gate(spec):
    """Ideal 3x3 unitary on ``(|D>, |G>, |A>)``.

    The bystander level picks up ``exp(i chi)`` with ``chi = 2JT`` for
    ``R_DG`` (on ``|A>``) and ``chi = -2JT`` for ``R_GA`` (on ``|D>``).
    """
    k = spec.kind
    if k == "R_DG":
        return rotation(spec.theta, spec.phi, 2.0 * spec.J * spec.gate_time(), "DG")
    if k == "R_GA":
        return rotation(spec.theta, spec.phi, -2.0 * spec.J * spec.gate_time(), "GA")
    if k == "P_A":
        return phase_A(spec.phi)
    if k == "P_D":
        return phase_D(spec.phi)
    return phase_G(spec.accumulated_phase())


def avg_gate_fidelity(U, Utilde, d=None):
    """``(1 + |tr(U^dag Utilde)|^2 / d) / (d + 1)``."""
    U = np.asarray(U)
    Utilde = np.asarray(Utilde)
    if U.shape != Utilde.shape or U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InputError(f"shape mismatch {U.shape} vs {Utilde.shape}")
    if d is None:
        d = U.shape[0]
    if d != U.shape[0]:
        raise InputError(f"d = {d} does not match matrix dimension {U.shape[0]}")
    return float((1.0 + abs(np.trace(U.conj().T @ Utilde)) ** 2 / d) / (d + 1))


@lru_cache(maxsize=256)
def _basis(J, gamma0):
    return collective_basis(EmitterArray.mirror(3, gamma0), J)


def _idealized_shift(omega, weights, energies):
    # adiabatic elimination: complex shift = -sum Omega^2 |c_k|^2 / E_k
    return -sum(omega**2 * w / e for w, e in zip(weights, energies))


def predicted_error_model(omega, J, gamma0=1.0):
    """Leading-order error of the D <-> G rotation.

    Returns
    -------
    gamma_d, delta_d, F_leading : float
        Drive-induced decay and shift of ``|D>`` and the leading fidelity
        ``1 - pi gamma_d / (12 Omega)``.
    """
    if omega <= 0:
        raise InputError("omega must be positive")
    xi2 = np.abs(_basis(float(J), float(gamma0)).xi) ** 2
    a1 = 4 * J**2 + gamma0**2 / 4
    a2 = J**2 + 4 * gamma0**2
    gamma_d = omega**2 * gamma0 * (xi2[0] / a1 + 4 * xi2[1] / a2)
    delta_d = omega**2 * J * (2 * xi2[0] / a1 - xi2[1] / a2)
    return gamma_d, delta_d, 1.0 - np.pi * gamma_d / (12 * omega)


def stark_shift_dg(omega, J, gamma0=1.0):
    """Shift of ``|D>`` under the D-profile drive."""
    return predicted_error_model(omega, J, gamma0)[1] if omega > 0 else 0.0


def stark_shift_ga(omega, J, gamma0=1.0):
    """Shift of ``|A>`` under the A-profile drive at ``Delta = 2J``.

    ``|A>`` couples to the two symmetric two-excitation states, detuned by
    ``2J`` and ``5J`` with widths ``gamma0`` and ``4 gamma0``.
    """
    if omega <= 0:
        return 0.0
    eta2 = np.abs(_basis(float(J), float(gamma0)).eta) ** 2
    s = _idealized_shift(omega, eta2, [2 * J - 0.5j * gamma0, 5 * J - 2j * gamma0])
    return float(s.real)


def gate_schedule(spec, n_emitters=3):
    """Control schedule realizing ``spec``; empty when the gate is trivial."""
    T = spec.gate_time()
    if T <= 0:
        return ControlSchedule(())
    k = spec.kind
    J = spec.J
    if k in ("R_DG", "R_GA"):
        omega = spec.rabi()
        phi = spec.phi + (np.pi if spec.theta < 0 else 0.0)
        if k == "R_DG":
            Delta = -stark_shift_dg(omega, J) if spec.stark_compensation else 0.0
            drive = drive_profile("D", omega, phi)
        else:
            Delta = 2 * J - (stark_shift_ga(omega, J) if spec.stark_compensation else 0.0)
            drive = drive_profile("A", omega, phi)
        seg = Segment(T, Delta=Delta, delta2=-J, J=J, Omega=tuple(drive))
    elif k == "P_A":
        seg = Segment(T, delta2=-J, J=J)
    elif k == "P_D":
        seg = Segment(T, Delta=spec.Delta)
    else:
        omega = spec.omega
        dw = spec.drive_detuning
        if abs(dw) < 10 * max(omega, 1.0):
            raise GateRegimeError(
                f"P_G needs |drive_detuning| >= 10 max(Omega, gamma0); got {dw} for Omega={omega}"
            )
        seg = Segment(T, Omega=tuple(drive_profile("B", omega)), drive_detuning=dw)
    return ControlSchedule((seg,))


def gate_map(schedule, array, dt=DEFAULT_DT):
    """Project the simulated propagator onto the DFS: ``V^dag U V``."""
    V = dfs_states()
    if not len(schedule):
        return np.eye(3, dtype=complex), np.zeros(3)
    U = nonhermitian_propagator(array, schedule, dt)
    cols = U @ V
    M = V.conj().T @ cols
    # everything that left the DFS: populated elsewhere or emitted
    leak = 1.0 - np.sum(np.abs(M) ** 2, axis=0)
    return M, leak


def simulate_gate(spec, array=None, gamma_prime=None, dt=DEFAULT_DT, strict=True):
    """Simulate one gate with the full three-emitter non-Hermitian dynamics.

    Each DFS basis state is propagated through the gate schedule, and the
    final states are projected back onto the DFS to form the achieved map.
    ``R_DG`` is compared on the ``(D, G)`` block (d = 2), every other gate on
    the full qutrit (d = 3). With ``strict=False`` a leakage above one half
    is reported in the result instead of raising, so sweeps can chart the
    breakdown.
    """
    if array is None:
        array = EmitterArray.mirror(3)
    if array.n != 3:
        raise InputError("gates are defined for three emitters")
    if gamma_prime is not None:
        array = array.with_gamma_prime(gamma_prime)
    omega = spec.rabi() if spec.kind in ("R_DG", "R_GA", "P_G") else 0.0
    if omega**2 > 0.1 * (array.gamma0**2 + spec.J**2) and spec.kind != "P_G":
        warnings.warn(
            f"Omega^2 = {omega**2:.3g} is not small against gamma0^2 + J^2; "
            "gate is outside the weak-drive regime",
            GateRegimeWarning,
            stacklevel=2,
        )
    schedule = gate_schedule(spec)
    M, leak = gate_map(schedule, array, dt)
    U = ideal_gate(spec)
    if spec.kind == "R_DG":
        d, block = 2, slice(0, 2)
        leakage = float(np.mean(leak[:2]))
        bystander = float(np.angle(M[2, 2]))
    else:
        d, block = 3, slice(0, 3)
        leakage = float(np.mean(leak))
        bystander = float(np.angle(M[0, 0])) if spec.kind == "R_GA" else None
    if strict and leakage > 0.5:
        raise GateRegimeError(f"leakage {leakage:.3f} out of the DFS: drive too strong")
    F = avg_gate_fidelity(U[block, block], M[block, block], d)
    return GateResult(spec, U, M, F, leakage, d, schedule.duration, bystander)


def y_half(omega, J=10.0, **kw):
    """``Y_{pi/2} = R_DG(pi/4, -pi/2)``."""
    return GateSpec("R_DG", theta=np.pi / 4, phi=-np.pi / 2, omega=omega, J=J, **kw)


def collective_amplitudes(omega_vector):
    """Project per-emitter Rabi amplitudes onto ``(Omega_D, Omega_A, Omega_B)``."""
    w = np.asarray(omega_vector, dtype=complex)
    return np.array([PROFILE_D @ w, PROFILE_A @ w, PROFILE_B @ w])


__all__ = [
    "GateSpec",
    "GateResult",
    "drive_profile",
    "ideal_gate",
    "simulate_gate",
    "predicted_error_model",
    "avg_gate_fidelity",
    "stark_shift_dg",
    "stark_shift_ga",
    "gate_schedule",
    "collective_lowering",
    "y_half",
]
