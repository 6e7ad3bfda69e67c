"""Quadrature transfer of the detuned two-port optomechanical cavity.

The cavity is probed in reflection from port 1.  For every Fourier frequency
the reflected quadratures are

    X_out = M X_in + V V_in + F f

with ``M`` the signal-port light transfer, ``V`` the transfer of vacuum
entering through port 2 (including mode mismatch, see
:func:`apply_mode_matching`) and ``F`` the column through which the thermal
force ``f`` on the membrane reaches the output.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (
    CavityParams,
    MechanicalParams,
    apply,
    cavity_denominator,
    chi_mech_bare,
    chi_mech_eff,
    d_m0,
    d_m_eff,
    identity,
    mat2,
    readout_rate_mech,
    rotation,
)


@dataclass(frozen=True)
class OmTransfer:
    m_light: np.ndarray   # (..., 2, 2)
    v_loss: np.ndarray    # (..., 2, 2)
    f_force: np.ndarray   # (..., 2)


def lorentzian(omega, cavity: CavityParams):
    """Polar form ``(|L|, theta)`` of ``L(Omega) = kappa / (kappa - i(Delta + Omega))``."""
    omega = np.asarray(omega, dtype=float)
    k = cavity.kappa
    shifted = cavity.detuning + omega
    return k / np.sqrt(k ** 2 + shifted ** 2), np.arctan(shifted / k)


def intracavity_phase(cavity: CavityParams) -> float:
    """Phase of the classical intracavity amplitude relative to the drive."""
    return float(np.arctan(cavity.detuning / cavity.kappa))


def detection_phase(cavity: CavityParams) -> float:
    """Angle of the reflected carrier, which sets the homodyne frame.

    The reflected amplitude is proportional to
    ``(kappa1 - kappa2 + i Delta)(kappa + i Delta)``.  The two-argument
    arctangent keeps the under-coupled case ``kappa1 < kappa2`` on the
    right branch.
    """
    psi = np.arctan2(cavity.detuning, cavity.kappa1 - cavity.kappa2)
    return float(psi + intracavity_phase(cavity))


def apply_mode_matching(cavity: CavityParams) -> CavityParams:
    """Fold imperfect mode matching into the port decomposition.

    The mismatched fraction of the input port is treated as extra loss:
    ``kappa1 -> eta kappa1`` and ``kappa2 -> kappa2 + (1 - eta) kappa1``.
    The returned parameters carry ``eta_mm = 1`` so the call is idempotent.
    """
    eta = cavity.eta_mm
    return replace(cavity,
                   kappa1=eta * cavity.kappa1,
                   kappa2=cavity.kappa2 + (1.0 - eta) * cavity.kappa1,
                   eta_mm=1.0)


def _intracavity_kernel(omega, mech, cavity):
    """``T(Omega)^-1`` written without the 1/D_M0 factor.

    Multiplying the adjugate through by D_M0 keeps the expression finite at
    Omega = Omega_M when gamma_M0 = 0.
    """
    k, dlt = cavity.kappa, cavity.detuning
    d0 = d_m0(omega, mech)
    dm = d_m_eff(omega, mech, cavity)
    denom = cavity_denominator(omega, cavity) * dm
    if np.any(denom == 0):
        bad = np.asarray(omega)[np.nonzero(np.broadcast_to(denom, np.shape(omega)) == 0)]
        raise ZeroDivisionError(f"singular intracavity response at Omega = {bad}")
    a = (k - 1j * np.asarray(omega)) * d0
    shear = dlt * d0 + readout_rate_mech(cavity) * k * mech.omega_m
    return mat2(a, -dlt * d0, shear, a) / denom[..., None, None]


def position_readout(omega, mech: MechanicalParams, cavity: CavityParams) -> np.ndarray:
    """Output-field column per unit mechanical quadrature ``X_M``.

    The thermal-force column equals ``sqrt(gamma_M0) chi_M`` times this.
    """
    cavity = apply_mode_matching(cavity)
    omega = np.asarray(omega, dtype=float)
    k, dlt = cavity.kappa, cavity.detuning
    dc = cavity_denominator(omega, cavity)
    # A^-1 (0, 1)^T
    col = np.stack(np.broadcast_arrays(-dlt / dc, (k - 1j * omega) / dc), axis=-1)
    gain = np.sqrt(readout_rate_mech(cavity) * k * cavity.kappa1)
    return gain * apply(rotation(intracavity_phase(cavity)), col)


def transfer_full(omega, mech: MechanicalParams, cavity: CavityParams) -> OmTransfer:
    cavity = apply_mode_matching(cavity)
    omega = np.asarray(omega, dtype=float)
    rot = rotation(intracavity_phase(cavity))
    kernel = rot @ _intracavity_kernel(omega, mech, cavity) @ rot.T
    m_light = 2.0 * cavity.kappa1 * kernel - identity(omega.shape)
    v_loss = np.sqrt(4.0 * cavity.kappa1 * cavity.kappa2) * kernel
    chi = chi_mech_eff(omega, mech, cavity)
    f_force = (np.sqrt(mech.gamma_m0) * chi)[..., None] * position_readout(omega, mech, cavity)
    return OmTransfer(m_light, v_loss, f_force)


def transfer_broadband(omega, mech: MechanicalParams, cavity: CavityParams) -> OmTransfer:
    """Broadband, lossless limit ``kappa >> Delta, Omega_M, Omega``.

    Uses the bare susceptibility; any port-2 loss is ignored.
    """
    omega = np.asarray(omega, dtype=float)
    gm = readout_rate_mech(cavity)
    chi = chi_mech_bare(omega, mech)
    zero = np.zeros(omega.shape)
    m_light = mat2(1.0, zero, gm * chi, 1.0)
    f_force = np.stack([zero + 0j, np.sqrt(gm * mech.gamma_m0) * chi], axis=-1)
    return OmTransfer(m_light, np.zeros_like(m_light), f_force)


def nsb_expansion(omega, cavity: CavityParams):
    """Linear expansion of the cavity Lorentzian about the carrier.

    Returns ``(L0, dL(Omega), dtheta(Omega))``.
    """
    omega = np.asarray(omega, dtype=float)
    k, dlt = cavity.kappa, cavity.detuning
    norm = k ** 2 + dlt ** 2
    l0 = k / np.sqrt(norm)
    dl = -omega * dlt * k / norm ** 1.5
    dtheta = omega * k / norm
    return l0, dl, dtheta


def transfer_nsb(omega, mech: MechanicalParams, cavity: CavityParams,
                 include_phase: bool = False) -> OmTransfer:
    """Unresolved-sideband approximation of the optomechanical transfer.

    Leading order in the Lorentzian expansion, lossless cavity.  The common
    phase ``exp(2i dtheta)`` does not change any spectrum and is omitted
    unless ``include_phase`` is set.
    """
    omega = np.asarray(omega, dtype=float)
    gm = readout_rate_mech(cavity)
    chi = chi_mech_eff(omega, mech, cavity)
    l0, dl, dtheta = nsb_expansion(omega, cavity)
    diag = 1.0 + 1j * gm * chi * l0 * dl
    rot = rotation(2.0 * intracavity_phase(cavity))
    m_light = rot @ mat2(diag, 0.0, gm * chi * l0 ** 2, diag)
    zero = np.zeros(omega.shape, dtype=complex)
    col = np.stack([zero, np.sqrt(gm * mech.gamma_m0) * chi * l0], axis=-1)
    f_force = apply(rot, col)
    if include_phase:
        m_light = m_light * np.exp(2j * dtheta)[..., None, None]
        f_force = f_force * np.exp(1j * dtheta)[..., None]
    return OmTransfer(m_light, np.zeros_like(m_light), f_force)


def transfer_bypass(omega) -> OmTransfer:
    """No cavity in the beam path: light passes unchanged."""
    omega = np.asarray(omega, dtype=float)
    m_light = identity(omega.shape)
    return OmTransfer(m_light, np.zeros_like(m_light), np.zeros(omega.shape + (2,), complex))
