import numpy as np
import pytest

from hybridqba.core import SpinParams, chi_spin, det2
from hybridqba.spin import (
    SpinPhysicalParams,
    beam_area_from_waist,
    coupling_alpha,
    readout_rate_spin,
    spin_transfer,
)


def test_spin_transfer_structure():
    spin = SpinParams(-2.0, 0.1, 0.3, n_spin=0.9)
    w = np.linspace(1.5, 2.5, 9)
    t = spin_transfer(w, spin)
    chi = chi_spin(w, spin)
    np.testing.assert_allclose(t.s_light[:, 1, 0], 0.3 * chi)
    np.testing.assert_array_equal(t.s_light[:, 0, 1], 0)
    np.testing.assert_allclose(det2(t.s_light), 1)
    np.testing.assert_allclose(t.f_force[:, 1], np.sqrt(0.3 * 0.1) * chi)
    np.testing.assert_array_equal(t.f_force[:, 0], 0)


def test_zero_readout_is_transparent():
    t = spin_transfer(np.array([1.0]), SpinParams(1.0, 0.1, 0.0))
    np.testing.assert_array_equal(t.s_light[0], np.eye(2))
    np.testing.assert_array_equal(t.f_force, 0)


def test_beam_area():
    assert beam_area_from_waist(2.0) == pytest.approx(4 * np.pi)


def test_coupling_and_readout_rate():
    phys = SpinPhysicalParams(detuning_atomic=2 * np.pi * 3e9, beam_area=1e-6, wavelength=852e-9,
                              gamma_sp=2 * np.pi * 5.2e6, photon_flux=1e16, jx=-1e9, alpha1=1.0)
    alpha = coupling_alpha(phys)
    expected = phys.gamma_sp / (8 * phys.beam_area * phys.detuning_atomic) * phys.wavelength ** 2 / (2 * np.pi)
    assert alpha == pytest.approx(expected)
    # |J_x| enters, so the mass sign does not change the rate
    assert readout_rate_spin(alpha, phys) == pytest.approx(0.5 * alpha ** 2 * 1e16 * 1e9)


@pytest.mark.parametrize("kwargs", [
    dict(detuning_atomic=0.0), dict(beam_area=0.0), dict(photon_flux=-1.0),
])
def test_physical_validation(kwargs):
    base = dict(detuning_atomic=1.0, beam_area=1.0, wavelength=1.0, gamma_sp=1.0,
                photon_flux=1.0, jx=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SpinPhysicalParams(**base)
