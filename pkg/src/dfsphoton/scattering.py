"""Reflection of a photon off the emitter array and the resulting CZ gate.

Frequencies ``omega`` are measured from the ``|G> <-> |B>`` resonance. The
spectrum uses ``Psi(w) = (2 pi)^(-1/2) int psi(t) exp(i w t) dt``, for which the
causal reflection coefficients have their poles in the lower half plane.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx

from .emission import Wavepacket, constant_J_wavepacket, gaussian_wavepacket
from .errors import InputError, SpectralAccuracyError

MAX_DT = 0.05
DEFAULT_PAD = 8


def reflection_G(omega, J=10.0, gamma0=1.0):
    """Reflection with the matter qubit in ``|G>``; ``-1`` on resonance."""
    return 1.0 - 6.0 * gamma0 / (3.0 * gamma0 - 2j * np.asarray(omega))


def reflection_D(omega, J=10.0, gamma0=1.0):
    """Reflection with the matter qubit in ``|D>`` (detuned by ``2J`` from ``|S_D>``)."""
    return 1.0 - 2.0 * gamma0 / (gamma0 - 2j * (np.asarray(omega) + 2.0 * J))


REFLECTIONS = {"G": reflection_G, "D": reflection_D}


@dataclass
class SpectralWavepacket:
    omega: np.ndarray
    amplitudes: np.ndarray

    def norm(self):
        domega = self.omega[1] - self.omega[0]
        return float(np.sum(np.abs(self.amplitudes) ** 2) * domega)


def _padded(wp, pad):
    if wp.dt > MAX_DT:
        raise SpectralAccuracyError(f"grid dt = {wp.dt} exceeds {MAX_DT}; resample the wavepacket")
    if pad < 1:
        raise InputError("padding factor must be >= 1")
    L = int(pad * len(wp.samples))
    x = np.zeros(L, dtype=complex)
    x[: len(wp.samples)] = wp.samples
    return x, 2 * np.pi * np.fft.fftfreq(L, wp.dt)


def to_spectrum(wp, pad=DEFAULT_PAD):
    """Sampled ``Psi(omega)`` on the zero-padded FFT grid (ascending frequency)."""
    x, w = _padded(wp, pad)
    L = len(x)
    # sum_k psi_k exp(+i w t_k) == L * ifft; the t0 offset only adds a phase
    spec = np.fft.ifft(x) * L * wp.dt / np.sqrt(2 * np.pi) * np.exp(1j * w * wp.t0)
    order = np.argsort(w)
    return SpectralWavepacket(w[order], spec[order])


def scatter(incoming, matter_state, J=10.0, gamma0=1.0, pad=DEFAULT_PAD):
    """Scattered packet ``int Psi(w) r(w) exp(-i w t) dw / sqrt(2 pi)``.

    Returned on the zero-padded grid (same ``t0`` and ``dt``, ``pad`` times
    longer) so that the reflected tail is not truncated.
    """
    if matter_state not in REFLECTIONS:
        raise InputError(f"matter_state must be 'G' or 'D', got {matter_state!r}")
    x, w = _padded(incoming, pad)
    L = len(x)
    r = REFLECTIONS[matter_state](w, J, gamma0)
    out = np.fft.fft(np.fft.ifft(x) * L * r) / L
    return Wavepacket(incoming.t0, incoming.dt, out)


def overlap(incoming, matter_state, J=10.0, gamma0=1.0, pad=DEFAULT_PAD):
    """``O = int conj(psi) psi_scattered dt`` computed spectrally."""
    x, w = _padded(incoming, pad)
    L = len(x)
    spec = np.fft.ifft(x)
    r = REFLECTIONS[matter_state](w, J, gamma0)
    # Parseval: sum_k conj(x_k) y_k = L sum_j conj(X_j) X_j r_j with X = ifft(x)
    return complex(L * np.sum(np.abs(spec) ** 2 * r) * incoming.dt)


def overlaps_gaussian(tau, J=10.0, gamma0=1.0):
    """Closed-form ``(O_G, O_D)`` for a Gaussian packet of width ``tau``."""
    a = 1.5 * gamma0 * tau
    og = 1.0 - np.sqrt(np.pi) * 3 * gamma0 * tau * erfcx(a)
    od = 1.0 - np.sqrt(np.pi) * gamma0 * tau * erfcx(tau * (gamma0 - 4j * J) / 2)
    return complex(og), complex(od)


def overlaps_constant_J(Jt, J=10.0, gamma0=1.0):
    """Closed-form ``(O_G, O_D)`` for the packet emitted at constant coupling ``Jt``."""
    og = -(gamma0**2 - 4 * Jt**2) / (gamma0**2 + 4 * Jt**2)
    num = (gamma0 + 4j * J) * (gamma0 - 1j * J) - 18 * Jt**2
    den = (gamma0 - 4j * J) * (gamma0 - 1j * J) + 18 * Jt**2
    return complex(og), complex(-num / den)


def cz_fidelity_from_overlaps(O_G, O_D):
    """Average CZ fidelity ``1/5 + |2 - O_G + O_D|^2 / 20``."""
    return float(0.2 + abs(2.0 - O_G + O_D) ** 2 / 20.0)


def cz_floor(J, gamma0=1.0):
    """Infidelity left at zero bandwidth, ``O_G = -1`` and ``O_D = r_D(0)``."""
    return 1.0 - cz_fidelity_from_overlaps(-1.0, complex(reflection_D(0.0, J, gamma0)))


def cz_floor_quoted(J, gamma0=1.0):
    """Zero-bandwidth infidelity in the closed form ``(4/5) gamma0^2 / (gamma0^2 + 16 J^2)``."""
    return 0.8 * gamma0**2 / (gamma0**2 + 16 * J**2)


def cz_gate(J=10.0, O_G=-1.0, O_D=None, gamma0=1.0):
    """CZ on (matter in {D, G}) x (bin in {0, 1}), order ``D0, D1, G0, G1``."""
    if O_D is None:
        O_D = complex(reflection_D(0.0, J, gamma0))
    return np.diag([1.0, O_D, 1.0, O_G]).astype(complex)


@dataclass
class CZResult:
    fidelity: float
    O_G: complex
    O_D: complex
    closed_form: dict = None

    def to_dict(self):
        out = {
            "fidelity": self.fidelity,
            "infidelity": 1 - self.fidelity,
            "O_G": [self.O_G.real, self.O_G.imag],
            "O_D": [self.O_D.real, self.O_D.imag],
        }
        if self.closed_form:
            out["closed_form"] = {
                k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in self.closed_form.items()
            }
        return out


def cz_fidelity(incoming, J=10.0, gamma0=1.0, pad=DEFAULT_PAD):
    """Numerical CZ fidelity for ``incoming``, plus closed forms for tagged packets."""
    og = overlap(incoming, "G", J, gamma0, pad)
    od = overlap(incoming, "D", J, gamma0, pad)
    closed = None
    if incoming.kind == "gaussian":
        cg, cd = overlaps_gaussian(incoming.params["tau"], J, gamma0)
    elif incoming.kind == "constant_J":
        cg, cd = overlaps_constant_J(incoming.params["J"], J, gamma0)
    else:
        cg = cd = None
    if cg is not None:
        closed = {"O_G": cg, "O_D": cd, "fidelity": cz_fidelity_from_overlaps(cg, cd)}
    return CZResult(cz_fidelity_from_overlaps(og, od), og, od, closed)


@dataclass
class PacketStats:
    t_av: float
    tau: float
    O_G: complex
    O_D: complex


def _check_damped(Jt, gamma0):
    if not 0 < Jt < gamma0 / np.sqrt(32):
        raise InputError(f"constant coupling {Jt} outside the damped regime (0, gamma0/sqrt(32))")


def constJ_packet_stats(Jt, gamma0=1.0, J=10.0):
    """Centre, width and overlaps of the constant-coupling packet.

    Moments are exact: ``|psi|^2`` is a sum of three exponentials. For small
    ``Jt`` they approach ``t_av = 2/(3 gamma0) + gamma0 / (24 Jt^2)`` and
    ``tau = gamma0 / (24 Jt^2)``.
    """
    _check_damped(Jt, gamma0)
    s = np.sqrt(9 * gamma0**2 / 16 - 18 * Jt**2)
    alpha = 0.75 * gamma0
    rates = np.array([2 * alpha - 2 * s, 2 * alpha, 2 * alpha + 2 * s])
    weights = np.array([1.0, -2.0, 1.0])

    def moment(n):
        fact = [1.0, 1.0, 2.0][n]
        return float(np.sum(weights * fact / rates ** (n + 1)))

    m0, m1, m2 = moment(0), moment(1), moment(2)
    t_av = m1 / m0
    tau = np.sqrt(m2 / m0 - t_av**2)
    og, od = overlaps_constant_J(Jt, J, gamma0)
    return PacketStats(t_av, float(tau), og, od)


def t_av_leading(Jt, gamma0=1.0):
    return 2.0 / (3 * gamma0) + gamma0 / (24 * Jt**2)


def tau_leading(Jt, gamma0=1.0):
    return gamma0 / (24 * Jt**2)


def constant_J_for_bandwidth(B, gamma0=1.0):
    """Constant coupling whose packet has second-moment width ``1/B``."""
    upper = gamma0 / np.sqrt(32) * (1 - 1e-9)
    target = 1.0 / B
    f = lambda j: constJ_packet_stats(j, gamma0).tau - target
    lo = 1e-6
    if f(upper) > 0 or f(lo) < 0:
        raise InputError(f"bandwidth {B} not reachable with a damped constant-coupling packet")
    return brentq(f, lo, upper, xtol=1e-14, rtol=1e-13)


def packet_for_bandwidth(B, kind, dt=0.02, gamma0=1.0):
    """Gaussian (``tau = 1/B``) or constant-coupling packet of bandwidth ``B``."""
    if B <= 0:
        raise InputError("bandwidth must be positive")
    if kind == "gaussian":
        return gaussian_wavepacket(1.0 / B, dt=dt)
    if kind == "constant_J":
        Jt = constant_J_for_bandwidth(B, gamma0)
        return constant_J_wavepacket(Jt, dt=dt, gamma0=gamma0)
    raise InputError(f"unknown packet kind {kind!r}")
