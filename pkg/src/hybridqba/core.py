"""Parameter containers, 2x2 quadrature algebra and oscillator susceptibilities.

All rates and frequencies are angular (rad/s).  Quadrature transfer matrices
are plain complex numpy arrays of shape ``(..., 2, 2)`` so that a whole
frequency grid is handled in one call; leading axes broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import constants

TWO_PI = 2.0 * np.pi


class InstabilityError(RuntimeError):
    """The dressed mechanical mode has non-positive damping."""


# ---------------------------------------------------------------------------
# 2x2 complex quadrature matrices
# ---------------------------------------------------------------------------

def mat2(a11, a12, a21, a22) -> np.ndarray:
    """Stack four (broadcastable) entries into a ``(..., 2, 2)`` complex array."""
    a11, a12, a21, a22 = np.broadcast_arrays(
        *(np.asarray(a, dtype=complex) for a in (a11, a12, a21, a22)))
    out = np.empty(a11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a21
    out[..., 1, 1] = a22
    return out


def identity(shape=()) -> np.ndarray:
    return mat2(np.ones(shape), 0.0, 0.0, np.ones(shape))


def rotation(angle) -> np.ndarray:
    """Quadrature rotation ``[[cos, -sin], [sin, cos]]``.

    Multiplying a field amplitude by ``exp(i*angle)`` acts on the
    (amplitude, phase) quadrature pair as this matrix.
    """
    angle = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(angle)):
        raise ValueError("rotation angle must be finite")
    c, s = np.cos(angle), np.sin(angle)
    return mat2(c, -s, s, c)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def apply(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product over the trailing axes."""
    return np.einsum("...ij,...j->...i", m, v)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MechanicalParams:
    """Membrane drum mode.

    ``m_eff`` and ``x_zpf`` are carried as metadata only; the model works in
    dimensionless oscillator quadratures.
    """
    omega_m: float
    gamma_m0: float
    n_bath: float
    m_eff: Optional[float] = None
    x_zpf: Optional[float] = None

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive")
        # gamma_m0 == 0 is allowed: optical damping alone can stabilise the mode
        if not self.gamma_m0 >= 0:
            raise ValueError("gamma_m0 must be non-negative")
        if not self.n_bath >= 0:
            raise ValueError("n_bath must be non-negative")


@dataclass(frozen=True)
class CavityParams:
    """Two-port optomechanical cavity, half-decay rates per port."""
    kappa1: float
    kappa2: float
    detuning: float
    g0: float
    n_photons: float
    eta_mm: float = 1.0

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("port decay rates must be non-negative")
        if not self.kappa1 + self.kappa2 > 0:
            raise ValueError("total cavity decay rate must be positive")
        if self.n_photons < 0:
            raise ValueError("n_photons must be non-negative")
        if not 0.0 <= self.eta_mm <= 1.0:
            raise ValueError("eta_mm must lie in [0, 1]")

    @property
    def kappa(self) -> float:
        return self.kappa1 + self.kappa2

    @property
    def g(self) -> float:
        """Linearised coupling ``g0 * sqrt(N)``."""
        return abs(self.g0) * np.sqrt(self.n_photons)


@dataclass(frozen=True)
class SpinParams:
    """Collective spin oscillator.

    ``omega_s`` is signed: a negative Larmor frequency is a negative-mass
    oscillator.
    """
    omega_s: float
    gamma_s: float
    gamma_readout: float
    n_spin: float = 0.9
    gamma_s0: Optional[float] = None

    def __post_init__(self):
        if not self.gamma_s > 0:
            raise ValueError("gamma_s must be positive")
        if not abs(self.omega_s) > 0:
            raise ValueError("omega_s must be non-zero")
        if self.gamma_readout < 0:
            raise ValueError("gamma_readout must be non-negative")
        if self.n_spin < 0:
            raise ValueError("n_spin must be non-negative")

    @property
    def negative_mass(self) -> bool:
        return self.omega_s < 0


@dataclass(frozen=True)
class CascadeParams:
    eta1: float = 1.0
    eta2: float = 1.0
    phi_interstage: float = 0.0
    detection_angle_override: Optional[float] = None

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


CAVITY_MODELS = ("full", "nsb", "broadband", "bypass")


@dataclass(frozen=True)
class SystemParams:
    """Everything needed to evaluate the cascaded spin/optomechanics chain.

    ``spin=None`` removes the spin stage (equivalent to zero readout rate).
    ``cavity_model`` selects the optomechanical transfer: the exact one, the
    unresolved-sideband approximation, the broadband limit, or ``"bypass"``
    (no cavity at all, used for spin-only calibration runs).
    """
    mech: MechanicalParams
    cavity: CavityParams
    spin: Optional[SpinParams] = None
    cascade: CascadeParams = CascadeParams()
    n_wn: float = 0.0
    cavity_model: str = "full"

    def __post_init__(self):
        if self.cavity_model not in CAVITY_MODELS:
            raise ValueError(f"cavity_model must be one of {CAVITY_MODELS}")
        if self.n_wn < 0:
            raise ValueError("n_wn must be non-negative")

    def with_bath_temperature(self, t_bath: float) -> "SystemParams":
        n = bath_occupancy(t_bath, self.mech.omega_m)
        return replace(self, mech=replace(self.mech, n_bath=n))


def bath_occupancy(t_bath: float, omega_m: float) -> float:
    """High-temperature occupancy ``k_B T / (hbar Omega_M)``."""
    if t_bath < 0:
        raise ValueError("temperature must be non-negative")
    return constants.k * t_bath / (constants.hbar * omega_m)


def bath_temperature(n_bath: float, omega_m: float) -> float:
    return n_bath * constants.hbar * omega_m / constants.k


# ---------------------------------------------------------------------------
# Susceptibilities
# ---------------------------------------------------------------------------

def d_m0(omega, mech: MechanicalParams):
    """Bare mechanical denominator ``Omega_M^2 - Omega^2 - 2i Omega gamma_M0``."""
    omega = np.asarray(omega, dtype=float)
    return mech.omega_m ** 2 - omega ** 2 - 2j * omega * mech.gamma_m0


def chi_mech_bare(omega, mech: MechanicalParams):
    d = d_m0(omega, mech)
    if np.any(d == 0):
        raise ZeroDivisionError("bare susceptibility is singular at Omega = Omega_M with gamma_m0 = 0")
    return 2.0 * mech.omega_m / d


def chi_spin(omega, spin: SpinParams):
    omega = np.asarray(omega, dtype=float)
    ws = spin.omega_s
    return 2.0 * ws / (ws ** 2 - omega ** 2 - 2j * omega * spin.gamma_s)


def readout_rate_mech(cavity: CavityParams) -> float:
    """Optomechanical readout rate ``2 g^2 / kappa``."""
    return 2.0 * cavity.g ** 2 / cavity.kappa


def cavity_denominator(omega, cavity: CavityParams):
    """``(kappa - i Omega)^2 + Delta^2``."""
    omega = np.asarray(omega, dtype=float)
    return (cavity.kappa - 1j * omega) ** 2 + cavity.detuning ** 2


def d_m_eff(omega, mech: MechanicalParams, cavity: CavityParams):
    """Dressed mechanical denominator (Schur complement of the cavity block)."""
    gm = readout_rate_mech(cavity)
    shift = gm * cavity.kappa * mech.omega_m * cavity.detuning / cavity_denominator(omega, cavity)
    return d_m0(omega, mech) + shift


def chi_mech_eff(omega, mech: MechanicalParams, cavity: CavityParams):
    """Mechanical susceptibility including the optical spring and damping."""
    return 2.0 * mech.omega_m / d_m_eff(omega, mech, cavity)


def mechanical_poles(mech: MechanicalParams, cavity: CavityParams) -> np.ndarray:
    """All four complex roots of ``D_M0(Omega) * D_c(Omega) + Gamma_M kappa Omega_M Delta``.

    Stable poles have negative imaginary part (``exp(-i Omega t)`` convention).
    """
    k, dlt = cavity.kappa, cavity.detuning
    p_mech = np.poly1d([-1.0, -2j * mech.gamma_m0, mech.omega_m ** 2])
    p_cav = np.poly1d([-1.0, -2j * k, k ** 2 + dlt ** 2])
    coupling = readout_rate_mech(cavity) * k * mech.omega_m * dlt
    return (p_mech * p_cav + coupling).roots


def dressed_pole(mech: MechanicalParams, cavity: CavityParams) -> complex:
    """The mechanical-like pole ``Omega_eff - i gamma_M`` of the dressed susceptibility."""
    roots = mechanical_poles(mech, cavity)
    return complex(roots[np.argmin(np.abs(roots - mech.omega_m))])


def effective_linewidth(mech: MechanicalParams, cavity: CavityParams) -> float:
    """Dressed half-linewidth ``gamma_M`` (intrinsic plus optical damping)."""
    return -dressed_pole(mech, cavity).imag


def effective_frequency(mech: MechanicalParams, cavity: CavityParams) -> float:
    """Dressed resonance frequency including the optical spring shift."""
    return dressed_pole(mech, cavity).real


def check_stability(mech: MechanicalParams, cavity: CavityParams) -> None:
    roots = mechanical_poles(mech, cavity)
    worst = roots[np.argmax(roots.imag)]
    if worst.imag >= 0:
        raise InstabilityError(
            f"dressed mechanics is not damped: pole at {worst.real / TWO_PI:.6g} Hz "
            f"with growth rate {worst.imag / TWO_PI:.3g} Hz")
