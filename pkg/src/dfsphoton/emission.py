"""Shaped single-photon emission from the auxiliary dark state.

With ``Delta = -4J`` and ``delta = 8J`` the single-excitation amplitudes
``(d, a, b)`` of ``|D>, |A>, |B>`` obey

    d' = 4iJ d,   a' = 3 sqrt(2) i J b,   b' = -(3 gamma0 / 2) b + 3 sqrt(2) i J a,

and the emitted field is ``sqrt(3 gamma0) b``. ``J(t)`` is the only control.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfcx

from .dynamics import DEFAULT_DT, evolve_linear_in_control
from .errors import ControlSingularityError, InputError

SQ18 = np.sqrt(18.0)
COUPLING_AB = 3.0 * np.sqrt(2.0)


@dataclass
class Wavepacket:
    """Photon amplitude on a uniform grid ``t0 + k dt``.

    ``kind`` tags packets that have closed-form scattering overlaps
    (``"gaussian"`` or ``"constant_J"``); ``params`` holds their parameters.
    """

    t0: float
    dt: float
    samples: np.ndarray
    kind: str = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or len(self.samples) < 2:
            raise InputError("a wavepacket needs a 1-D array of at least two samples")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InputError("wavepacket dt must be positive")

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def duration(self):
        return self.dt * (len(self.samples) - 1)

    def norm(self):
        """Trapezoidal integral of ``|psi|^2``."""
        return float(np.trapezoid(np.abs(self.samples) ** 2, dx=self.dt))

    def overlap(self, other):
        """``int conj(self) other dt`` on a shared grid (shorter one zero-extended)."""
        if abs(self.dt - other.dt) > 1e-12 * self.dt or abs(self.t0 - other.t0) > 1e-9:
            raise InputError("overlap needs wavepackets on the same grid")
        n = max(len(self.samples), len(other.samples))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self.samples)] = self.samples
        b[: len(other.samples)] = other.samples
        return complex(np.trapezoid(a.conj() * b, dx=self.dt))

    def fidelity(self, other):
        return abs(self.overlap(other)) ** 2

    def normalized(self):
        return Wavepacket(self.t0, self.dt, self.samples / np.sqrt(self.norm()), self.kind, dict(self.params))

    def moments(self):
        """Centre ``t_av`` and second-moment width ``tau`` of ``|psi|^2``."""
        w = np.abs(self.samples) ** 2
        t = self.times
        n0 = np.trapezoid(w, dx=self.dt)
        t_av = np.trapezoid(w * t, dx=self.dt) / n0
        var = np.trapezoid(w * (t - t_av) ** 2, dx=self.dt) / n0
        return float(t_av), float(np.sqrt(var))

    def bandwidth(self):
        """``1 / tau``; the Gaussian width parameter when tagged, else the second-moment width."""
        if self.kind == "gaussian":
            return 1.0 / self.params["tau"], "gaussian_tau"
        return 1.0 / self.moments()[1], "second_moment"


def gaussian_wavepacket(tau, dt=DEFAULT_DT, t0=None, duration=None):
    """Normalized Gaussian ``exp(-(t - t0)^2 / 2 tau^2) / (tau^(1/2) pi^(1/4))``.

    Defaults centre the packet at ``5 tau`` on a window of ``10 tau``.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    t0 = 5.0 * tau if t0 is None else t0
    duration = 2.0 * t0 if duration is None else duration
    n = int(round(duration / dt))
    t = dt * np.arange(n + 1)
    psi = np.exp(-((t - t0) ** 2) / (2 * tau**2)) / (np.sqrt(tau) * np.pi**0.25)
    return Wavepacket(0.0, dt, psi, "gaussian", {"tau": tau, "t0": t0})


def constant_J_closed_form(t, J, gamma0=1.0):
    """Packet emitted from ``-i|A>`` at constant ``J`` (damped or oscillating branch)."""
    t = np.asarray(t, dtype=float)
    tp = np.clip(t, 0.0, None)
    alpha = 0.75 * gamma0
    s2 = 9 * gamma0**2 / 16 - 18 * J**2
    s = np.sqrt(abs(s2))
    pref = J * np.sqrt(3 * gamma0) * SQ18
    if s2 > 0:
        # sinh(s t) exp(-alpha t) / s written without overflow
        shape = (np.exp((s - alpha) * tp) - np.exp(-(s + alpha) * tp)) / (2 * s)
    elif s2 < 0:
        shape = np.sin(s * tp) / s * np.exp(-alpha * tp)
    else:
        shape = tp * np.exp(-alpha * tp)
    return np.where(t >= 0, pref * shape, 0.0)


def constant_J_wavepacket(J, dt=DEFAULT_DT, duration=None, gamma0=1.0):
    """Closed-form constant-``J`` packet, tagged for closed-form scattering overlaps."""
    if J <= 0:
        raise InputError("J must be positive")
    if duration is None:
        # slowest decay rate of |psi|^2 sets the window
        s2 = 9 * gamma0**2 / 16 - 18 * J**2
        slow = 1.5 * gamma0 - 2 * np.sqrt(s2) if s2 > 0 else 1.5 * gamma0
        duration = 40.0 / slow
    n = int(round(duration / dt))
    t = dt * np.arange(n + 1)
    return Wavepacket(0.0, dt, constant_J_closed_form(t, J, gamma0), "constant_J", {"J": J})


@dataclass
class CouplingSequence:
    """Piecewise-constant ``J``: value ``values[k]`` holds on ``[k dt, (k+1) dt)``."""

    dt: float
    values: np.ndarray

    @property
    def duration(self):
        return self.dt * len(self.values)

    def integral(self):
        return float(np.sum(self.values) * self.dt)


@dataclass
class EmissionResult:
    """Outcome of one emission window.

    ``d, a, b`` are the final amplitudes, ``phase_D`` is the phase picked up
    by ``|D>`` (``4 int J dt``) and ``amplitudes`` the full ``(d, a, b)`` history.
    """

    d: complex
    a: complex
    b: complex
    wavepacket: Wavepacket
    phase_D: float
    coupling: CouplingSequence
    amplitudes: np.ndarray

    @property
    def matter_norm(self):
        return abs(self.d) ** 2 + abs(self.a) ** 2 + abs(self.b) ** 2

    @property
    def photon_norm(self):
        return self.wavepacket.norm()


def reduced_generators(gamma0=1.0, gamma_prime=0.0):
    """``A0, A1`` with ``(d, a, b)' = (A0 + J A1) (d, a, b)``."""
    A0 = np.diag([-0.5 * gamma_prime, -0.5 * gamma_prime, -1.5 * gamma0 - 0.5 * gamma_prime]).astype(complex)
    A1 = np.zeros((3, 3), dtype=complex)
    A1[0, 0] = 4j
    A1[1, 2] = A1[2, 1] = 1j * COUPLING_AB
    return A0, A1


def emit(d0, a0, coupling, gamma0=1.0, gamma_prime=0.0):
    """Integrate the reduced emission dynamics under a piecewise-constant ``J``.

    Parameters
    ----------
    d0, a0 : complex
        Initial amplitudes on ``|D>`` and ``|A>``; ``a0`` must be imaginary so
        that the emitted packet is real.
    coupling : CouplingSequence
    """
    if abs(np.real(a0)) > 1e-12:
        raise InputError("a0 must be purely imaginary; rotate the phase of |A> first")
    A0, A1 = reduced_generators(gamma0, gamma_prime)
    y = evolve_linear_in_control(A0, A1, coupling.values, coupling.dt, np.array([d0, a0, 0.0], dtype=complex))
    psi = np.sqrt(3 * gamma0) * y[:, 2]
    wp = Wavepacket(0.0, coupling.dt, psi)
    d, a, b = y[-1]
    return EmissionResult(d, a, b, wp, 4.0 * coupling.integral(), coupling, y)


def emit_constant_J(d0, a0, J, T_em, dt=DEFAULT_DT, gamma0=1.0, gamma_prime=0.0):
    """Emission at constant ``J`` for a time ``T_em``."""
    if T_em <= 0:
        raise InputError("T_em must be positive")
    n = max(1, int(round(T_em / dt)))
    seq = CouplingSequence(T_em / n, np.full(n, float(J)))
    return emit(d0, a0, seq, gamma0, gamma_prime)


def optimal_coupling_sequence(target, gamma0=1.0, singular_tol=1e-6):
    """Invert the emission dynamics for a real target packet.

    Steps the discretized amplitudes forward, choosing ``J^(k-1)`` so that the
    next bright-state amplitude reproduces ``target[k]``. The sequence is
    exact for forward-Euler stepping and ``O(dt)`` accurate for RK4.

    Raises
    ------
    InputError
        Target is complex or does not start from zero.
    ControlSingularityError
        The auxiliary amplitude is exhausted before the target's energy is.
    """
    psi = np.asarray(target.samples)
    if np.max(np.abs(psi.imag)) > 1e-9 * max(np.max(np.abs(psi)), 1e-300):
        raise InputError("target wavepacket must be real")
    psi = psi.real
    peak = np.max(np.abs(psi))
    if peak == 0:
        raise InputError("target wavepacket is identically zero")
    if abs(psi[0]) > 1e-3 * peak:
        raise InputError("target must vanish at t = 0 (b(0) = 0 forces psi(0) = 0)")
    dt = target.dt
    n = len(psi) - 1
    tail = np.cumsum((psi**2)[::-1])[::-1] * dt  # remaining target energy from step k
    root = np.sqrt(3 * gamma0)
    J = np.zeros(n)
    b, ima = 0.0, -1.0
    for k in range(1, n + 1):
        if ima > -singular_tol:
            if tail[k] > 1e-6:
                raise ControlSingularityError(
                    f"auxiliary amplitude exhausted at t={k * dt:.4g} with "
                    f"{tail[k]:.3g} of the target still to emit"
                )
            break
        Jk = (b * (1 - 1.5 * gamma0 * dt) - psi[k] / root) / (COUPLING_AB * dt * ima)
        J[k - 1] = Jk
        b, ima = b + dt * (-1.5 * gamma0 * b - COUPLING_AB * Jk * ima), ima + COUPLING_AB * dt * Jk * b
    return CouplingSequence(dt, J)


def gamma_eff_gaussian(t, tau, t0):
    """Effective decay rate that releases a Gaussian packet adiabatically.

    ``2 exp(-u^2) / (tau sqrt(pi) (1 - erf(u)))`` with ``u = (t - t0) / tau``,
    evaluated as ``2 / (tau sqrt(pi) erfcx(u))`` which saturates smoothly to
    ``~ 2u / tau`` for large ``u`` instead of overflowing.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    u = (np.asarray(t, dtype=float) - t0) / tau
    with np.errstate(over="ignore"):
        return 2.0 / (tau * np.sqrt(np.pi) * erfcx(u))


def coupling_from_gamma_eff(gamma_eff, gamma0=1.0):
    """``J = sqrt(gamma0 gamma_eff / 24)``."""
    return np.sqrt(gamma0 * np.asarray(gamma_eff) / 24.0)


def adiabatic_gaussian_sequence(tau, dt=DEFAULT_DT, t0=None, duration=None, gamma0=1.0, lead=None):
    """Closed-form ``J(t)`` for a Gaussian target in the adiabatic regime.

    The bright amplitude follows the control with a delay of about
    ``2 / (3 gamma0)``, so the rate is evaluated ``lead`` ahead of the packet
    centre (default: that delay).
    """
    t0 = 5.0 * tau if t0 is None else t0
    duration = 2.0 * t0 if duration is None else duration
    lead = 2.0 / (3.0 * gamma0) if lead is None else lead
    n = int(round(duration / dt))
    mid = dt * (np.arange(n) + 0.5)
    return CouplingSequence(dt, coupling_from_gamma_eff(gamma_eff_gaussian(mid, tau, t0 - lead), gamma0))


def shaped_emission(target, gamma0=1.0, gamma_prime=0.0):
    """Invert for ``target`` and forward-simulate from ``-i|A>``; returns (result, fidelity)."""
    seq = optimal_coupling_sequence(target, gamma0)
    res = emit(0.0, -1j, seq, gamma0, gamma_prime)
    return res, target.fidelity(res.wavepacket)
