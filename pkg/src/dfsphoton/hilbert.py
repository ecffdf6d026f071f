"""Operators and collective states on the N-emitter qubit register.

Basis ordering is the usual Kronecker one with ``|g> = 0`` and ``|e> = 1``;
emitter 1 is the most significant bit, so ``|egg>`` has index 4 for N = 3.
"""

from functools import lru_cache

import numpy as np

SQ2 = np.sqrt(2.0)
SQ3 = np.sqrt(3.0)
SQ6 = np.sqrt(6.0)

# collective amplitude profiles for three emitters
PROFILE_D = np.array([1.0, 0.0, -1.0]) / SQ2
PROFILE_A = np.array([1.0, -2.0, 1.0]) / SQ6
PROFILE_B = np.array([1.0, 1.0, 1.0]) / SQ3

# order of the logical qutrit everywhere in the package
DFS_LABELS = ("D", "G", "A")


@lru_cache(maxsize=None)
def _lowering(n, num):
    sigma = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    out = np.ones((1, 1), dtype=complex)
    for k in range(num):
        out = np.kron(out, sigma if k == n else eye)
    out.setflags(write=False)
    return out


def lowering(n, num):
    """Lowering operator of emitter ``n`` (0-based) in a ``num``-emitter register."""
    if not 0 <= n < num:
        raise IndexError(f"emitter index {n} out of range for N={num}")
    return _lowering(n, num)


def lowering_ops(num):
    return [lowering(n, num) for n in range(num)]


def excitation_number(num):
    dim = 2**num
    return np.diag([bin(i).count("1") for i in range(dim)]).astype(float)


def collective_lowering(profile):
    """``sum_n c_n sigma_n`` for a length-N profile."""
    profile = np.asarray(profile)
    num = len(profile)
    return sum(c * s for c, s in zip(profile, lowering_ops(num)))


def single_excitation_index(n, num):
    return 1 << (num - 1 - n)


def single_excitation_state(profile):
    profile = np.asarray(profile, dtype=complex)
    num = len(profile)
    psi = np.zeros(2**num, dtype=complex)
    for n, c in enumerate(profile):
        psi[single_excitation_index(n, num)] = c
    return psi


def ground_state(num=3):
    psi = np.zeros(2**num, dtype=complex)
    psi[0] = 1.0
    return psi


def dfs_states():
    """The logical qutrit ``(|D>, |G>, |A>)`` as columns of an 8x3 matrix."""
    return np.column_stack(
        [single_excitation_state(PROFILE_D), ground_state(3), single_excitation_state(PROFILE_A)]
    )


def named_state(label):
    return {
        "G": ground_state(3),
        "D": single_excitation_state(PROFILE_D),
        "A": single_excitation_state(PROFILE_A),
        "B": single_excitation_state(PROFILE_B),
    }[label]


def sector_indices(num, excitations):
    return [i for i in range(2**num) if bin(i).count("1") == excitations]
