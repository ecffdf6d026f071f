"""Half-waveguide geometry: positions -> coherent/dissipative couplings.

Units are canonical throughout: gamma0 = 1, positions in lambda0, k0 = 2 pi.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputError
from .hilbert import (
    PROFILE_A,
    PROFILE_B,
    PROFILE_D,
    collective_lowering,
    ground_state,
    lowering_ops,
    sector_indices,
    single_excitation_state,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class EmitterArray:
    """Emitters beyond a mirror at x = 0.

    Attributes
    ----------
    positions : tuple of float
        Emitter positions in units of lambda0, all strictly positive.
    gamma0 : float
        Radiative rate into the guided mode.
    gamma_prime : float
        Per-emitter loss rate into non-guided modes.
    k0 : float
        Resonant wavenumber (2 pi / lambda0 in canonical units).
    """

    positions: tuple
    gamma0: float = 1.0
    gamma_prime: float = 0.0
    k0: float = field(default=TWO_PI)

    def __post_init__(self):
        pos = tuple(float(x) for x in np.atleast_1d(self.positions))
        object.__setattr__(self, "positions", pos)
        if len(pos) < 1:
            raise InputError("an emitter array needs at least one emitter")
        if any(not np.isfinite(x) or x <= 0 for x in pos):
            raise InputError(f"positions must be finite and > 0, got {pos}")
        if not self.gamma0 > 0:
            raise InputError("gamma0 must be positive")
        if self.gamma_prime < 0:
            raise InputError("gamma_prime must be non-negative")

    @property
    def n(self):
        return len(self.positions)

    @classmethod
    def mirror(cls, n=3, gamma0=1.0, gamma_prime=0.0):
        """The protected configuration x_n = (n + 1/4) lambda0, n = 1..N."""
        return cls(tuple(k + 1.25 for k in range(n)), gamma0, gamma_prime)

    def with_gamma_prime(self, gamma_prime):
        return replace(self, gamma_prime=gamma_prime)

    def sin_factors(self):
        return np.sin(self.k0 * np.asarray(self.positions))

    def to_dict(self):
        return {
            "positions": list(self.positions),
            "gamma0": self.gamma0,
            "gamma_prime": self.gamma_prime,
        }


@dataclass(frozen=True)
class CouplingMatrices:
    J: np.ndarray
    Gamma: np.ndarray


def coupling_matrices(array):
    """Waveguide-mediated couplings J_nm - i Gamma_nm / 2.

    Both the direct path and the mirror-reflected path contribute:
    ``-i gamma0/4 (exp(i k0 |x_n - x_m|) - exp(i k0 (x_n + x_m)))``.
    """
    x = np.asarray(array.positions)
    k0 = array.k0
    direct = np.exp(1j * k0 * np.abs(x[:, None] - x[None, :]))
    mirrored = np.exp(1j * k0 * np.abs(x[:, None] + x[None, :]))
    g = -1j * array.gamma0 / 4.0 * (direct - mirrored)
    J = g.real
    Gamma = -2.0 * g.imag
    # exact algebraic symmetry; kill rounding asymmetry
    J = 0.5 * (J + J.T)
    Gamma = 0.5 * (Gamma + Gamma.T)
    # entries below the rounding floor of the cancelling exponentials are zero
    floor = 16 * np.finfo(float).eps * array.gamma0
    J[np.abs(J) < floor] = 0.0
    Gamma[np.abs(Gamma) < floor] = 0.0
    return CouplingMatrices(J=J, Gamma=Gamma)


def jump_operator(array):
    """Collective jump operator S and its rate Gamma_B.

    Returns ``(S, Gamma_B)``. When every emitter sits on a field node the
    configuration is fully dark: ``Gamma_B = 0`` and ``S`` is the zero operator.
    """
    s = array.sin_factors()
    rate = array.gamma0 * float(np.sum(s**2))
    dim = 2**array.n
    if rate <= 1e-14 * array.gamma0:
        return np.zeros((dim, dim), dtype=complex), 0.0
    S = np.sqrt(array.gamma0 / rate) * collective_lowering(s)
    return S, rate


@dataclass(frozen=True)
class CollectiveBasis:
    """Collective eigenbasis of the three-emitter mirror configuration.

    ``two_excitation`` holds ``(S_D, lambda1, lambda2)`` as columns of an 8x3
    matrix; ``eigenvalues`` the matching complex energies ``shift - i decay/2``.
    """

    G: np.ndarray
    D: np.ndarray
    A: np.ndarray
    B: np.ndarray
    two_excitation: np.ndarray
    eigenvalues: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    epsilon: np.ndarray
    J: float

    @property
    def shifts(self):
        return self.eigenvalues.real

    @property
    def decays(self):
        return -2.0 * self.eigenvalues.imag


def two_excitation_hamiltonian(J, Delta=0.0, gamma0=1.0):
    """Non-Hermitian Hamiltonian on the two-excitation sector (delta = -J)."""
    from .dynamics import Segment, build_hamiltonian, nonhermitian_part

    array = EmitterArray.mirror(3, gamma0)
    seg = Segment(duration=1.0, Delta=Delta, delta2=-J, J=J)
    H = build_hamiltonian(array, seg) + nonhermitian_part(array)
    idx = sector_indices(3, 2)
    return H[np.ix_(idx, idx)], idx


def collective_basis(array, J):
    """Dark/bright single-excitation states and the two-excitation eigenstates.

    The two-excitation states are found numerically. ``S_D`` is the single
    state antisymmetric under 1 <-> 3; ``lambda1`` and ``lambda2`` are the two
    symmetric eigenvectors, ordered by ascending decay rate (ties by shift).
    ``xi_k = <lambda_k| sigma_D^dag |D>`` and ``eta_k = <lambda_k| sigma_A^dag |A>``.
    """
    if array.n != 3:
        raise InputError("collective_basis is defined for three emitters")
    if not np.allclose(coupling_matrices(array).J, 0.0, atol=1e-12) or not np.allclose(
        array.sin_factors() ** 2, 1.0, atol=1e-12
    ):
        raise InputError("collective_basis requires the mirror configuration")

    G = ground_state(3)
    D = single_excitation_state(PROFILE_D)
    A = single_excitation_state(PROFILE_A)
    B = single_excitation_state(PROFILE_B)

    Hs, idx = two_excitation_hamiltonian(J, gamma0=array.gamma0)
    vals, vecs = np.linalg.eig(Hs)
    full = np.zeros((8, 3), dtype=complex)
    full[idx, :] = vecs

    # parity under exchanging emitters 1 and 3
    swap = np.zeros((8, 8))
    for i in range(8):
        b = [(i >> 2) & 1, (i >> 1) & 1, i & 1]
        j = (b[2] << 2) | (b[1] << 1) | b[0]
        swap[j, i] = 1.0
    parity = np.real(np.einsum("ik,ij,jk->k", full.conj(), swap, full))
    anti = int(np.argmin(parity))
    sym = [k for k in range(3) if k != anti]
    sym.sort(key=lambda k: (-2.0 * vals[k].imag, vals[k].real))

    order = [anti] + sym
    vecs8 = full[:, order]
    for k in range(3):
        vecs8[:, k] /= np.linalg.norm(vecs8[:, k])
        # fix the arbitrary eigenvector phase: largest component real positive
        j = np.argmax(np.abs(vecs8[:, k]))
        vecs8[:, k] *= np.exp(-1j * np.angle(vecs8[j, k]))
    eigs = vals[order]

    sigma_D_dag = collective_lowering(PROFILE_D).conj().T
    sigma_A_dag = collective_lowering(PROFILE_A).conj().T
    xi = vecs8[:, 1:].conj().T @ (sigma_D_dag @ D)
    eta = vecs8[:, 1:].conj().T @ (sigma_A_dag @ A)

    # lambda_{1,2} in the (S_B, S_A) basis
    S_dag = collective_lowering(PROFILE_B).conj().T
    S_B = S_dag @ B
    S_B /= np.linalg.norm(S_B)
    S_A = S_dag @ A
    S_A /= np.linalg.norm(S_A)
    epsilon = np.array([np.vdot(S_B, vecs8[:, 1]), np.vdot(S_A, vecs8[:, 1])])

    return CollectiveBasis(
        G=G,
        D=D,
        A=A,
        B=B,
        two_excitation=vecs8,
        eigenvalues=eigs,
        xi=xi,
        eta=eta,
        epsilon=epsilon,
        J=float(J),
    )


def emitted_field(amplitudes, array):
    """Field leaving the half-waveguide, ``sqrt(gamma0) sum_n sin(k0 x_n) <sigma_n>(t)``.

    ``amplitudes`` has shape ``(n_times, N)``; for single-excitation dynamics
    these are the site amplitudes of the excited state.
    """
    amps = np.asarray(amplitudes)
    if amps.ndim != 2 or amps.shape[1] != array.n:
        raise InputError(f"expected amplitudes of shape (n_times, {array.n}), got {amps.shape}")
    return np.sqrt(array.gamma0) * amps @ array.sin_factors()


def dissipator_sum(array):
    """``sum_nm Gamma_nm sigma_n^dag sigma_m`` built directly from the matrix."""
    Gamma = coupling_matrices(array).Gamma
    ops = lowering_ops(array.n)
    dim = 2**array.n
    out = np.zeros((dim, dim), dtype=complex)
    for n, sn in enumerate(ops):
        for m, sm in enumerate(ops):
            out += Gamma[n, m] * sn.conj().T @ sm
    return out
