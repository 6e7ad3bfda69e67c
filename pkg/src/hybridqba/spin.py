"""Spin-oscillator stage: QND transfer matrix and readout-rate formulas."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SpinParams, chi_spin, mat2


@dataclass(frozen=True)
class SpinTransfer:
    s_light: np.ndarray   # (..., 2, 2)
    f_force: np.ndarray   # (..., 2)


@dataclass(frozen=True)
class SpinPhysicalParams:
    """Microscopic probe/ensemble parameters behind the spin readout rate.

    ``jx`` is the signed macroscopic spin projection in units of hbar.
    """
    detuning_atomic: float
    beam_area: float
    wavelength: float
    gamma_sp: float
    photon_flux: float
    jx: float
    alpha1: float = 1.0

    def __post_init__(self):
        if self.detuning_atomic == 0:
            raise ValueError("atomic detuning must be non-zero")
        if not self.beam_area > 0:
            raise ValueError("beam_area must be positive")
        if self.photon_flux < 0:
            raise ValueError("photon_flux must be non-negative")


def beam_area_from_waist(waist: float) -> float:
    """Interaction area ``pi w^2`` of a Gaussian beam with 1/e^2 radius ``w``."""
    return np.pi * waist ** 2


def spin_transfer(omega, spin: SpinParams) -> SpinTransfer:
    """Transfer through the spin ensemble.

    The amplitude quadrature passes unchanged; the phase quadrature picks up
    ``Gamma_S chi_S`` times the amplitude quadrature (back action read out
    again) plus the spin thermal force.
    """
    omega = np.asarray(omega, dtype=float)
    chi = chi_spin(omega, spin)
    s_light = mat2(1.0, 0.0, spin.gamma_readout * chi, 1.0)
    zero = np.zeros(omega.shape, dtype=complex)
    f_force = np.stack([zero, np.sqrt(spin.gamma_readout * spin.gamma_s) * chi], axis=-1)
    return SpinTransfer(s_light, f_force)


def coupling_alpha(phys: SpinPhysicalParams) -> float:
    """Light-spin coupling constant of the Faraday interaction ``alpha S_z J_z``."""
    return (phys.gamma_sp / (8.0 * phys.beam_area * phys.detuning_atomic)
            * phys.wavelength ** 2 / (2.0 * np.pi) * phys.alpha1)


def readout_rate_spin(alpha: float, phys: SpinPhysicalParams) -> float:
    """``Gamma_S = alpha^2 Phi |J_x| / 2``."""
    return 0.5 * alpha ** 2 * phys.photon_flux * abs(phys.jx)
