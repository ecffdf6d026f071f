import numpy as np
import pytest

from dfsphoton.cpe import CPESettings, cpe_gate, cpe_map, ideal_cpe_map
from dfsphoton.emission import gaussian_wavepacket
from dfsphoton.errors import InputError

TARGET = gaussian_wavepacket(7 / 4)


@pytest.fixture(scope="module")
def standard():
    return cpe_map(TARGET)


@pytest.fixture(scope="module")
def disentangling():
    return cpe_map(TARGET, disentangle=True)


def test_ideal_maps_are_isometries_on_logical_inputs():
    for dis in (False, True):
        m = ideal_cpe_map(dis)
        for v in ([1, 0, 0], [0, 1, 0]):
            no_ph, ph = m.apply(v)
            assert np.sum(np.abs(no_ph) ** 2) + abs(ph) ** 2 == pytest.approx(1.0)
        assert m.fidelity(dis) == pytest.approx(1.0)


def test_ground_input_emits(standard):
    res = cpe_gate(0.0, 1.0, TARGET)
    assert abs(res.photon_amplitude) ** 2 > 0.99
    assert np.sum(np.abs(res.no_photon) ** 2) < 1e-2


def test_dark_input_stays_dark_without_phase(standard):
    res = cpe_gate(1.0, 0.0, TARGET)
    assert abs(res.photon_amplitude) < 1e-4
    assert abs(res.no_photon[0]) > 0.999
    assert abs(np.angle(res.no_photon[0])) < 1e-2


def test_superposition_linearity(standard):
    d0, g0 = 0.6, 0.8j
    res = cpe_gate(d0, g0, TARGET)
    a, pa = standard.apply([1, 0, 0])
    b, pb = standard.apply([0, 1, 0])
    assert np.allclose(res.no_photon, d0 * a + g0 * b)
    assert res.photon_amplitude == pytest.approx(d0 * pa + g0 * pb)


def test_standard_fidelity(standard):
    assert standard.fidelity(False) > 0.999


def test_disentangling_ends_in_ground(disentangling):
    assert disentangling.fidelity(True) > 0.998
    for v in ([1, 0, 0], [0, 1, 0]):
        no_ph, ph = disentangling.apply(v)
        ground = abs(no_ph[1]) ** 2 + abs(ph) ** 2
        assert ground > 0.995


def test_durations_reported(standard):
    T = standard.durations
    assert T["T_p"] == pytest.approx(T["T_GA"] + TARGET.duration + T["T_D"], rel=1e-9)


def test_phase_bookkeeping(standard):
    # xi = chi_GA + 4 int J dt, cancelled by the final P_D
    assert np.isfinite(standard.xi)


def test_inline_matches_reduced(standard):
    full = cpe_map(TARGET, inline=True)
    assert np.allclose(full.no_photon[:, :2], standard.no_photon[:, :2], atol=1e-8)
    assert np.allclose(full.photon[:2], standard.photon[:2], atol=1e-8)


def test_loss_reduces_fidelity(standard):
    lossy = cpe_map(TARGET, gamma_prime=1e-3)
    assert lossy.fidelity() < standard.fidelity()


def test_unnormalized_input_rejected():
    with pytest.raises(InputError):
        cpe_gate(1.0, 1.0, TARGET)


def test_ideal_mode():
    m = cpe_map(TARGET, simulate=False)
    assert m.fidelity() == pytest.approx(1.0)
    assert isinstance(CPESettings().J_GA, float)
