"""Conditional photon emission: ``d|D>|0> + g|G>|0> -> d|D>|0> + g|G>|1>``.

The gate is assembled from a G -> A transfer, shaped emission from ``|A>``
and a ``P_D`` phase correction. The disentangling variant inserts a ``Y_pi``
after the transfer so that both branches end in ``|G>``.

Every stage is represented as a linear map on the qutrit ``(D, G, A)``:
``no_photon`` is the 3x3 map onto the zero-photon sector, ``photon`` is the
row vector giving the amplitude of ``|G>|1>`` with the photon in the target
mode. Both are exact matrices in ideal mode and simulated maps otherwise.
"""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_DT, evolve_linear_in_control, effective_hamiltonian, nonhermitian_propagator, Segment
from .emission import emit, optimal_coupling_sequence
from .errors import InputError
from .gates import GateSpec, gate_schedule, ideal_gate, simulate_gate, avg_gate_fidelity
from .geometry import EmitterArray, jump_operator
from .hilbert import dfs_states

E_A = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CPESettings:
    """Operating point of the CPE gate (canonical units)."""

    J_GA: float = 10.0
    omega_GA: float = 0.05
    Delta_D: float = 20.0
    J_Y: float = 10.0
    omega_Y: float = 0.05
    stark_compensation: bool = True


@dataclass
class CPEMap:
    no_photon: np.ndarray
    photon: np.ndarray
    durations: dict = field(default_factory=dict)
    xi: float = 0.0
    stages: dict = field(default_factory=dict)
    emitted: object = None

    def apply(self, v):
        """Return ``(matter amplitudes without photon, amplitude of |G>|1>)``."""
        v = np.asarray(v, dtype=complex)
        return self.no_photon @ v, complex(self.photon @ v)

    def fidelity(self, disentangle=False):
        """Average fidelity on the logical ``(D, G)`` inputs against the ideal isometry."""
        ideal = ideal_cpe_map(disentangle)
        tr = 0j
        for j in (0, 1):
            tr += np.vdot(ideal.no_photon[:, j], self.no_photon[:, j])
            tr += np.conj(ideal.photon[j]) * self.photon[j]
        return float((1 + abs(tr) ** 2 / 2) / 3)


def ideal_cpe_map(disentangle=False, chi_GA=0.0):
    """Exact CPE map; ``chi_GA`` is the common phase of the disentangling variant."""
    M0 = np.zeros((3, 3), dtype=complex)
    m1 = np.zeros(3, dtype=complex)
    if not disentangle:
        M0[0, 0] = 1.0
        M0[1, 2] = -1j  # A -> -iG without a photon (never populated at checkpoints)
        m1[1] = 1.0
    else:
        ph = np.exp(1j * chi_GA)
        M0[1, 0] = -ph
        M0[0, 2] = 1j * ph  # A -> transferred then rotated
        m1[1] = ph
    return CPEMap(M0, m1)


def _emission_stage(target, settings, array, gamma0):
    """Emission as a no-photon 3x3 map and photon row vector on ``(D, G, A)``."""
    seq = optimal_coupling_sequence(target, gamma0)
    gp = array.gamma_prime
    res_d = emit(1.0, 0.0, seq, gamma0, gp)
    res_a = emit(0.0, -1j, seq, gamma0, gp)
    E0 = np.zeros((3, 3), dtype=complex)
    E0[0, 0] = res_d.d
    E0[1, 1] = 1.0
    E0[2, 2] = res_a.a / (-1j)
    kappa = 1j * target.overlap(res_a.wavepacket) / np.sqrt(target.norm())
    e1 = np.array([0.0, 0.0, kappa])
    return E0, e1, seq, res_a


def _emission_stage_full(target, settings, array, gamma0, dt_unused=None):
    """Same as :func:`_emission_stage` but integrated in the full 8-dim space."""
    seq = optimal_coupling_sequence(target, gamma0)
    H0 = effective_hamiltonian(array, Segment(1.0))
    H1 = effective_hamiltonian(array, Segment(1.0, Delta=-4.0, delta2=8.0, J=1.0)) - H0
    V = dfs_states()
    traj = evolve_linear_in_control(-1j * H0, -1j * H1, seq.values, seq.dt, V)
    S, rate = jump_operator(array)
    field_amp = np.sqrt(rate) * np.einsum("i,tij->tj", S[0, :], traj)  # <G|S|psi(t)> per input
    E0 = V.conj().T @ traj[-1]
    t = target.samples
    e1 = np.zeros(3, dtype=complex)
    for j in range(3):
        n = min(len(t), field_amp.shape[0])
        e1[j] = np.trapezoid(np.conj(t[:n]) * field_amp[:n, j], dx=target.dt) / np.sqrt(target.norm())
    return E0, e1, seq, None


def cpe_map(target, settings=CPESettings(), array=None, gamma_prime=None, disentangle=False,
            simulate=True, inline=False, dt=DEFAULT_DT, gamma0=1.0):
    """Build the CPE map for one time bin.

    Parameters
    ----------
    target : Wavepacket
        Real target packet; the photon amplitude is measured in this mode.
    simulate : bool
        Use simulated stage maps (``True``) or exact matrices.
    inline : bool
        Integrate the emission stage in the full 8-dim space instead of the
        reduced three-amplitude model (slow; cross-check only).
    """
    if array is None:
        array = EmitterArray.mirror(3, gamma0)
    if gamma_prime is not None:
        array = array.with_gamma_prime(gamma_prime)

    ga = GateSpec("R_GA", theta=np.pi / 2, phi=0.0, omega=settings.omega_GA, J=settings.J_GA,
                  stark_compensation=settings.stark_compensation)
    T_GA = ga.gate_time()
    chi_GA = -2.0 * settings.J_GA * T_GA
    durations = {"T_GA": T_GA, "T_em": target.duration}
    stages = {}

    if simulate:
        M_GA = simulate_gate(ga, array, dt=dt).achieved
        E0, e1, seq, res = (_emission_stage_full if inline else _emission_stage)(target, settings, array, gamma0)
        phi_em = 4.0 * seq.integral()
    else:
        M_GA = ideal_gate(ga)
        seq = optimal_coupling_sequence(target, gamma0)
        phi_em = 4.0 * seq.integral()
        E0 = np.diag([np.exp(1j * phi_em), 1.0, 0.0]).astype(complex)
        e1 = np.array([0.0, 0.0, 1j])
        res = None
    stages["R_GA"] = M_GA

    if not disentangle:
        xi = chi_GA + phi_em
        pd = GateSpec("P_D", phi=float(np.mod(xi, 2 * np.pi)), Delta=settings.Delta_D)
        durations["T_D"] = pd.gate_time()
        P = simulate_gate(pd, array, dt=dt).achieved if simulate else ideal_gate(pd)
        stages["P_D"] = P
        M0 = P @ E0 @ M_GA
        m1 = P[1, 1] * (e1 @ M_GA)
    else:
        xi = chi_GA
        y = GateSpec("R_DG", theta=np.pi / 2, phi=np.pi / 2, omega=settings.omega_Y, J=settings.J_Y,
                     stark_compensation=settings.stark_compensation)
        T_Y = y.gate_time()
        pa = GateSpec("P_A", phi=float(np.mod(chi_GA - 2.0 * settings.J_Y * T_Y, 2 * np.pi)), J=settings.J_Y)
        durations["T_Y"] = T_Y
        durations["T_A"] = pa.gate_time()
        if simulate:
            Y = simulate_gate(y, array, dt=dt).achieved
            PA = simulate_gate(pa, array, dt=dt).achieved
        else:
            Y, PA = ideal_gate(y), ideal_gate(pa)
        stages["Y_pi"] = Y
        stages["P_A"] = PA
        pre = PA @ Y @ M_GA
        M0 = E0 @ pre
        m1 = e1 @ pre
    durations["T_p"] = float(sum(durations.values()) - durations["T_em"] + target.duration)
    return CPEMap(M0, m1, durations, float(xi), stages, res)


@dataclass
class CPEResult:
    no_photon: np.ndarray
    photon_amplitude: complex
    map: CPEMap


def cpe_gate(d0, g0, target, settings=CPESettings(), disentangle=False, simulate=True, **kw):
    """Apply the CPE gate to ``d0|D> + g0|G>``."""
    if abs(abs(d0) ** 2 + abs(g0) ** 2 - 1) > 1e-9:
        raise InputError("|d0|^2 + |g0|^2 must equal 1")
    cmap = cpe_map(target, settings, disentangle=disentangle, simulate=simulate, **kw)
    no_ph, amp = cmap.apply([d0, g0, 0.0])
    return CPEResult(no_ph, amp, cmap)
