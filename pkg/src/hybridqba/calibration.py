"""Cooperativity calibration, back-action budgets and bath-temperature fits."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import optimize

from .cascade import Spectrum, spectrum
from .core import (
    CavityParams,
    MechanicalParams,
    SpinParams,
    SystemParams,
    effective_linewidth,
    readout_rate_mech,
)


class CalibrationDomainError(ValueError):
    """Measured heights fall outside what the linear response model allows."""


class FitError(RuntimeError):
    """The residual has no interior minimum or is not unimodal on the search interval."""


# ---------------------------------------------------------------------------
# White-noise calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationInput:
    """On-resonance heights ``S_PP - 1`` in shot-noise units.

    ``a_height`` is measured with a vacuum amplitude input, ``b_height``
    with ``n_wn`` extra quanta of white amplitude noise.
    """
    a_height: float
    b_height: float
    n_wn: float
    eta_det: float = 1.0

    def __post_init__(self):
        if not self.a_height >= 0:
            raise ValueError("a_height must be non-negative")
        if not self.b_height >= self.a_height:
            raise ValueError("b_height must be at least a_height")
        if not self.n_wn > 0:
            raise ValueError("n_wn must be positive")
        if not 0 < self.eta_det <= 1:
            raise ValueError("eta_det must lie in (0, 1]")


@dataclass(frozen=True)
class CalibrationResult:
    ratio: float            # R_BA^2 / R_Th^2, equal to the quantum cooperativity
    r_ba_sq: float
    r_th_sq: float
    inputs: CalibrationInput

    @property
    def cooperativity(self) -> float:
        return self.ratio


def forward_heights(r_ba_sq: float, r_th_sq: float, n_wn: float, eta: float):
    """On-resonance heights ``(A, B)`` produced by given back-action and thermal responses."""
    a = eta * (r_ba_sq + r_th_sq)
    b = eta * (r_ba_sq * (n_wn + 1.0) + r_th_sq)
    return a, b


def ba_thermal_ratio(inp: CalibrationInput) -> float:
    """``R_BA^2 / R_Th^2 = (B - A) / ((n_wn + 1) A - B)``; the efficiency cancels."""
    denom = (inp.n_wn + 1.0) * inp.a_height - inp.b_height
    if not denom > 0:
        raise CalibrationDomainError(
            "white-noise response exceeds linear-model bound: "
            f"(n_wn + 1) A - B = {denom:.6g} must be positive")
    return (inp.b_height - inp.a_height) / denom


def calibrate_spin(inp: CalibrationInput) -> CalibrationResult:
    ratio = ba_thermal_ratio(inp)
    r_ba_sq = (inp.b_height - inp.a_height) / (inp.eta_det * inp.n_wn)
    r_th_sq = inp.a_height / inp.eta_det - r_ba_sq
    return CalibrationResult(ratio, r_ba_sq, r_th_sq, inp)


def resonance_heights(params: SystemParams, n_wn: float, freq_hz: float):
    """Model heights ``(A, B)`` of ``S_PP - 1`` at one frequency, white noise removed.

    ``A`` uses the configuration as given but without white noise; ``B``
    adds ``n_wn`` quanta and subtracts their direct (non back-action)
    contribution, which is what a measurement of the white-noise floor
    away from resonance would remove.
    """
    grid = np.array([float(freq_hz)])
    base = replace(params, n_wn=0.0)
    a = spectrum(base, grid).total[0] - 1.0
    driven = spectrum(replace(params, n_wn=n_wn), grid)
    floor = spectrum(_without_oscillators(replace(params, n_wn=n_wn)), grid).total[0] - 1.0
    b = driven.total[0] - 1.0 - floor
    return float(a), float(b)


def _without_oscillators(params: SystemParams) -> SystemParams:
    spin = None if params.spin is None else replace(params.spin, gamma_readout=0.0)
    return replace(params, spin=spin, cavity_model="bypass")


# ---------------------------------------------------------------------------
# Cooperativities and back-action budget
# ---------------------------------------------------------------------------

def quantum_cooperativity(mech: MechanicalParams, cavity: CavityParams) -> float:
    """``C_q = g0^2 N / (2 kappa gamma_M0 n_bath)``."""
    return cavity.g ** 2 / (2.0 * cavity.kappa * mech.gamma_m0 * mech.n_bath)


def spin_cooperativity(spin: SpinParams) -> float:
    """Back-action to thermal ratio of the spin oscillator on resonance."""
    return spin.gamma_readout / (2.0 * spin.gamma_s * (2.0 * spin.n_spin + 1.0))


def spin_readout_rate(cooperativity: float, gamma_s: float, n_spin: float) -> float:
    """Inverse of :func:`spin_cooperativity`."""
    return cooperativity * 2.0 * gamma_s * (2.0 * n_spin + 1.0)


def _sideband_weights(mech: MechanicalParams, cavity: CavityParams):
    """Cavity Lorentzian at the two motional sidebands, ``(anti-Stokes, Stokes)``.

    With ``Delta < 0`` (red detuning) the anti-Stokes sideband sits closer
    to the cavity resonance.
    """
    k, dlt, w = cavity.kappa, cavity.detuning, mech.omega_m
    return k ** 2 / (k ** 2 + (dlt + w) ** 2), k ** 2 / (k ** 2 + (dlt - w) ** 2)


def ba_thermal_ratio_mech(mech: MechanicalParams, cavity: CavityParams,
                          cooperativity: Optional[float] = None) -> float:
    """Back-action to thermal variance ratio of the detuned membrane readout.

    ``(C_q / 2) * [L(Delta - Omega_M) + L(Delta + Omega_M)]`` with
    ``L(x) = kappa^2 / (kappa^2 + x^2)``.  Uses ``n + 1/2 ~ n``.
    """
    if cooperativity is None:
        cooperativity = quantum_cooperativity(mech, cavity)
    a_as, a_s = _sideband_weights(mech, cavity)
    return 0.5 * cooperativity * (a_as + a_s)


@dataclass(frozen=True)
class Occupancy:
    """Mean phonon number split into bath and optical contributions.

    ``thermal = (gamma_M0 / gamma_M) n_bath`` is the bath part,
    ``backaction = (gamma_opt / gamma_M) n_min`` the optical part with the
    sideband-cooling limit ``n_min = A_S / (A_AS - A_S)``.
    """
    thermal: float
    backaction: float
    n_min: float
    gamma_m: float
    gamma_opt: float

    @property
    def total(self) -> float:
        return self.thermal + self.backaction


def effective_occupancy(mech: MechanicalParams, cavity: CavityParams) -> Occupancy:
    gamma_m = effective_linewidth(mech, cavity)
    if not gamma_m > 0:
        raise ValueError("effective linewidth must be positive")
    gamma_opt = gamma_m - mech.gamma_m0
    thermal = mech.gamma_m0 / gamma_m * mech.n_bath
    if readout_rate_mech(cavity) == 0:
        return Occupancy(thermal, 0.0, 0.0, gamma_m, 0.0)
    a_as, a_s = _sideband_weights(mech, cavity)
    if not a_as > a_s:
        raise ValueError("no sideband-cooling limit: the detuning does not cool the mode")
    n_min = a_s / (a_as - a_s)
    return Occupancy(thermal, gamma_opt / gamma_m * n_min, n_min, gamma_m, gamma_opt)


# ---------------------------------------------------------------------------
# Bath-temperature fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    t_bath: float
    residual: float
    iterations: int
    converged: bool


def fit_bath_temperature(measured: Spectrum, params: SystemParams, search=(1.0, 30.0),
                         band=None, n_scan: int = 41, tol: float = 1e-4) -> FitResult:
    """Least-squares bath temperature from one measured spectrum.

    The total model PSD is compared to ``measured.total`` on the measured
    grid (optionally restricted to ``band``, in Hz) and in the measured
    quadrature.  A coarse scan locates the minimum and checks that the
    residual is unimodal on ``search``; golden-section search then refines it.
    """
    t_lo, t_hi = map(float, search)
    if not 0 < t_lo < t_hi:
        raise FitError("search interval must satisfy 0 < tmin < tmax")
    f = np.asarray(measured.freq_hz, dtype=float)
    y = np.asarray(measured.total, dtype=float)
    if band is not None:
        mask = (f >= band[0]) & (f <= band[1])
        f, y = f[mask], y[mask]
    if f.size == 0:
        raise FitError("no measured points in the fit band, cannot bracket a minimum")

    def residual(t):
        model = spectrum(params.with_bath_temperature(t), f, measured.quadrature_angle).total
        return float(np.sum((model - y) ** 2))

    temps = np.linspace(t_lo, t_hi, n_scan)
    res = np.array([residual(t) for t in temps])
    i = int(np.argmin(res))
    if i == 0 or i == n_scan - 1:
        raise FitError(f"residual minimum at the edge of [{t_lo}, {t_hi}] K, no bracket")
    slope = np.sign(np.diff(res))
    if np.any(slope[:i] > 0) or np.any(slope[i:] < 0):
        raise FitError("residual is not unimodal on the search interval")

    out = optimize.minimize_scalar(residual, bracket=(temps[i - 1], temps[i], temps[i + 1]),
                                   method="golden", tol=tol)
    t_fit = float(out.x)
    return FitResult(t_fit, float(out.fun), int(out.nit), bool(out.success) and t_fit > 0)
