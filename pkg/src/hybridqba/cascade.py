"""Hybrid spin -> loss -> rotation -> cavity -> loss -> homodyne chain.

Spectra are symmetrized, one-sided and normalised to shot noise: a vacuum
quadrature has PSD 1 with no cross-correlation.  With quadratures
``X = (a + a^dag)/2`` the vacuum spectrum is 1/4 and a Langevin force with
occupancy ``n`` has spectrum ``n + 1/2``; in shot-noise units that force
therefore carries ``2(2n + 1)``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    TWO_PI,
    InstabilityError,
    MechanicalParams,
    CavityParams,
    SpinParams,
    SystemParams,
    check_stability,
    chi_mech_bare,
    chi_spin,
    dagger,
    dressed_pole,
    identity,
    mat2,
    readout_rate_mech,
    rotation,
)
from .optomech import (
    apply_mode_matching,
    detection_phase,
    intracavity_phase,
    nsb_expansion,
    position_readout,
    transfer_broadband,
    transfer_bypass,
    transfer_full,
    transfer_nsb,
)
from .spin import spin_transfer


class NoiseSource(str, Enum):
    SHOT = "shot"                          # vacuum entering the spin stage
    SPIN_THERMAL = "spin_thermal"
    INTERSTAGE_VAC = "interstage_vac"      # loss between spin and cavity
    CAVITY_LOSS_VAC = "cavity_loss_vac"    # port 2 and mode mismatch
    MEMBRANE_THERMAL = "membrane_thermal"
    POST_VAC = "post_vac"                  # loss between cavity and detector
    WHITE_NOISE = "white_noise"            # classical amplitude modulation

    @property
    def is_vacuum(self) -> bool:
        return self in _VACUUM

    @property
    def is_thermal(self) -> bool:
        return self in (NoiseSource.SPIN_THERMAL, NoiseSource.MEMBRANE_THERMAL)


_VACUUM = (NoiseSource.SHOT, NoiseSource.INTERSTAGE_VAC,
           NoiseSource.CAVITY_LOSS_VAC, NoiseSource.POST_VAC)

#: column order of tabular output
SOURCE_ORDER = (NoiseSource.SHOT, NoiseSource.SPIN_THERMAL, NoiseSource.INTERSTAGE_VAC,
                NoiseSource.CAVITY_LOSS_VAC, NoiseSource.MEMBRANE_THERMAL,
                NoiseSource.POST_VAC, NoiseSource.WHITE_NOISE)


def thermal_strength(n: float) -> float:
    """Force PSD in shot-noise units for occupancy ``n``."""
    return 2.0 * (2.0 * n + 1.0)


@dataclass(frozen=True)
class SourceTerm:
    """One independent input and its path to the detector.

    ``transfer`` maps the source's quadrature pair to the detected
    quadratures (already in the homodyne frame); force inputs occupy the
    second column.  ``covariance`` is the source's 2x2 spectral matrix.
    """
    source: NoiseSource
    transfer: np.ndarray
    covariance: np.ndarray

    def spectral_matrix(self) -> np.ndarray:
        return self.transfer @ self.covariance @ dagger(self.transfer)

    def psd(self, quadrature_angle: float) -> np.ndarray:
        u = np.array([np.cos(quadrature_angle), np.sin(quadrature_angle)])
        return np.einsum("i,...ij,j->...", u, self.spectral_matrix(), u).real


@dataclass(frozen=True)
class TransferSet:
    omega: np.ndarray
    terms: tuple
    detection_angle: float

    def __getitem__(self, source: NoiseSource) -> SourceTerm:
        for term in self.terms:
            if term.source == NoiseSource(source):
                return term
        raise KeyError(source)

    def spectral_matrix(self) -> np.ndarray:
        """Total 2x2 output spectral matrix at each frequency."""
        return sum(t.spectral_matrix() for t in self.terms)

    def psd(self, quadrature_angle: float) -> dict:
        return {t.source: t.psd(quadrature_angle) for t in self.terms}


def _force_matrix(col: np.ndarray) -> np.ndarray:
    return mat2(0.0, col[..., 0], 0.0, col[..., 1])


def _optomech_stage(omega, params: SystemParams):
    mech, cavity = params.mech, params.cavity
    model = params.cavity_model
    if model == "bypass":
        om, angle = transfer_bypass(omega), 0.0
    elif model == "broadband":
        if mech.gamma_m0 <= 0 and readout_rate_mech(cavity) > 0:
            raise InstabilityError("broadband model has no optical damping; gamma_m0 must be positive")
        om, angle = transfer_broadband(omega, mech, cavity), 0.0
    else:
        check_stability(mech, cavity)
        matched = apply_mode_matching(cavity)
        if model == "full":
            om = transfer_full(omega, mech, matched)
        else:
            om = transfer_nsb(omega, mech, matched)
        angle = detection_phase(matched)
    if params.cascade.detection_angle_override is not None:
        angle = params.cascade.detection_angle_override
    return om, angle


def hybrid_transfer(omega, params: SystemParams) -> TransferSet:
    """Paths of every noise source to the homodyne detector at angular frequencies ``omega``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    om, angle = _optomech_stage(omega, params)
    eta1, eta2 = params.cascade.eta1, params.cascade.eta2
    frame = rotation(-angle)
    m = om.m_light
    if params.spin is not None:
        st = spin_transfer(omega, params.spin)
        s_light, s_force, n_spin = st.s_light, st.f_force, params.spin.n_spin
    else:
        s_light = identity(omega.shape)
        s_force = np.zeros(omega.shape + (2,), dtype=complex)
        n_spin = 0.0
    into_cavity = frame @ m @ rotation(params.cascade.phi_interstage)

    vac = np.eye(2)
    shot = np.sqrt(eta1 * eta2) * into_cavity @ s_light
    terms = [
        SourceTerm(NoiseSource.SHOT, shot, vac),
        SourceTerm(NoiseSource.SPIN_THERMAL,
                   np.sqrt(eta1 * eta2) * into_cavity @ _force_matrix(s_force),
                   np.diag([0.0, thermal_strength(n_spin)])),
        SourceTerm(NoiseSource.INTERSTAGE_VAC, np.sqrt((1.0 - eta1) * eta2) * frame @ m, vac),
        SourceTerm(NoiseSource.CAVITY_LOSS_VAC, np.sqrt(eta2) * frame @ om.v_loss, vac),
        SourceTerm(NoiseSource.MEMBRANE_THERMAL,
                   np.sqrt(eta2) * frame @ _force_matrix(om.f_force),
                   np.diag([0.0, thermal_strength(params.mech.n_bath)])),
        SourceTerm(NoiseSource.POST_VAC,
                   np.sqrt(1.0 - eta2) * np.broadcast_to(frame, omega.shape + (2, 2)), vac),
    ]
    if params.n_wn > 0:
        terms.append(SourceTerm(NoiseSource.WHITE_NOISE, shot, np.diag([params.n_wn, 0.0])))
    return TransferSet(omega, tuple(terms), angle)


def output_psd(omega, params: SystemParams, quadrature_angle: float = np.pi / 2):
    """Detected PSD in shot-noise units.

    ``quadrature_angle`` selects ``cos(t) X + sin(t) P`` in the homodyne
    frame: 0 is the amplitude quadrature, pi/2 the phase quadrature.
    Returns ``(total, {source: psd})``.
    """
    per_source = hybrid_transfer(omega, params).psd(quadrature_angle)
    return sum(per_source.values()), per_source


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

@dataclass
class Spectrum:
    freq_hz: np.ndarray
    total: np.ndarray
    per_source: dict
    quadrature_angle: float
    readout_gain: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        return self.per_source[NoiseSource(name)]

    @property
    def qba(self) -> np.ndarray:
        """Vacuum-driven excess over shot noise (back action and its correlations)."""
        vac = sum(v for k, v in self.per_source.items() if k.is_vacuum)
        return vac - 1.0

    @property
    def thermal(self) -> np.ndarray:
        return sum(v for k, v in self.per_source.items() if k.is_thermal)


def sweep_workers() -> int:
    """Worker cap from ``QBA_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("QBA_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("QBA_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


_MIN_CHUNK = 2048


def spectrum(params: SystemParams, grid_hz, quadrature_angle: float = np.pi / 2) -> Spectrum:
    grid = np.asarray(grid_hz, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("frequency grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)):
        raise ValueError("frequency grid must be finite")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be strictly increasing")

    omega = TWO_PI * grid
    n_chunks = min(sweep_workers(), grid.size // _MIN_CHUNK)
    if n_chunks > 1:
        chunks = np.array_split(omega, n_chunks)
        with ThreadPoolExecutor(max_workers=n_chunks) as pool:
            parts = list(pool.map(lambda w: output_psd(w, params, quadrature_angle)[1], chunks))
        per_source = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    else:
        per_source = output_psd(omega, params, quadrature_angle)[1]
    total = sum(per_source.values())
    return Spectrum(grid, total, per_source, quadrature_angle,
                    readout_gain=displacement_gain(params, quadrature_angle),
                    metadata={"params": params})


def displacement_gain(params: SystemParams, quadrature_angle: float = np.pi / 2) -> Optional[float]:
    """Detected PSD per unit mechanical-quadrature PSD at the dressed resonance (rad/s).

    In the broadband lossless limit this is the readout rate Gamma_M.
    Returns ``None`` when no mechanics is read out.
    """
    mech, cavity = params.mech, params.cavity
    if params.cavity_model == "bypass" or readout_rate_mech(cavity) == 0:
        return None
    gm = readout_rate_mech(cavity)
    if params.cavity_model == "broadband":
        col = np.array([0.0, np.sqrt(gm)], dtype=complex)
        angle = 0.0
    else:
        matched = apply_mode_matching(cavity)
        w = dressed_pole(mech, cavity).real
        if params.cavity_model == "full":
            col = position_readout(w, mech, matched)
        else:
            l0 = nsb_expansion(w, matched)[0]
            col = rotation(2.0 * intracavity_phase(matched)) @ np.array([0.0, np.sqrt(gm) * l0])
        angle = detection_phase(matched)
    if params.cascade.detection_angle_override is not None:
        angle = params.cascade.detection_angle_override
    u = np.array([np.cos(quadrature_angle), np.sin(quadrature_angle)])
    return float(params.cascade.eta2 * abs(u @ (rotation(-angle) @ col)) ** 2)


def integrate_variance(spec: Spectrum, band=None, units: str = "sn", component="total") -> float:
    """Area of a spectrum above shot noise over ``band`` (Hz).

    ``component`` is ``"total"`` (total minus 1), ``"qba"``, ``"thermal"`` or
    a :class:`NoiseSource` column.  In ``"zpf"`` units the area is divided by
    :func:`displacement_gain`, which turns it into the variance of the
    mechanical quadrature normalised so that a thermal oscillator with
    occupancy ``n`` gives ``2n + 1`` (zero-point variance 1).
    """
    f = spec.freq_hz
    if band is None:
        lo, hi = f[0], f[-1]
    else:
        lo, hi = map(float, band)
    if not lo < hi:
        raise ValueError("band must satisfy lo < hi")
    slack = 1e-9 * max(abs(f[0]), abs(f[-1]), 1.0)
    if lo < f[0] - slack or hi > f[-1] + slack:
        raise ValueError(f"band {lo},{hi} lies outside the grid {f[0]},{f[-1]}")

    if component == "total":
        y = spec.total - 1.0
    elif component == "qba":
        y = spec.qba
    elif component == "thermal":
        y = spec.thermal
    else:
        y = spec.column(component)

    mask = (f >= lo - slack) & (f <= hi + slack)
    if mask.sum() < 2:
        raise ValueError("band contains fewer than two grid points")
    area = float(np.trapezoid(y[mask], f[mask]))

    if units == "sn":
        return area
    if units == "zpf":
        if not spec.readout_gain:
            raise ValueError("zpf units need a spectrum with mechanical readout")
        return area / spec.readout_gain
    raise ValueError(f"unknown units {units!r}")


# ---------------------------------------------------------------------------
# Closed-form back-action expressions
# ---------------------------------------------------------------------------

def qba_hybrid_approx(omega, gamma_readout_m, gamma_readout_s, gamma_m, gamma_s,
                      omega_m, omega_s, s_x: float = 1.0):
    """Lorentzian-limit QBA spectrum of the hybrid in the unresolved-sideband regime.

    Valid for strong optical damping (``gamma_m >> gamma_m0``) and
    ``Omega << kappa``.  ``gamma_readout_m`` is the effective mechanical
    readout rate (``Gamma_M L0^2`` for a detuned cavity).  ``omega_s`` is
    signed; its sign sets whether the two back-action paths add or cancel.
    """
    omega = np.asarray(omega, dtype=float)
    sign = np.sign(omega_s)
    dm = omega - omega_m
    ds = omega - abs(omega_s)
    num = (gamma_readout_m * ds + sign * gamma_readout_s * dm) ** 2 + (gamma_readout_m * gamma_s) ** 2
    return num / ((dm ** 2 + gamma_m ** 2) * (ds ** 2 + gamma_s ** 2)) * s_x


def qba_ideal_broadband(omega, params: SystemParams):
    """``|Gamma_M chi_M + Gamma_S chi_S|^2``: interference of the two back-action paths."""
    amp = readout_rate_mech(params.cavity) * chi_mech_bare(omega, params.mech)
    if params.spin is not None:
        amp = amp + params.spin.gamma_readout * chi_spin(omega, params.spin)
    return np.abs(amp) ** 2


def matched_spin(mech: MechanicalParams, cavity: CavityParams, *, negative_mass: bool = True,
                 offset: float = 0.0, gamma_s: Optional[float] = None,
                 gamma_readout: Optional[float] = None, n_spin: float = 0.9) -> SpinParams:
    """Spin oscillator tuned to the dressed mechanical mode.

    The spin pole is placed at the dressed mechanical resonance plus
    ``offset`` (rad/s).  Unless given, the linewidth copies the dressed
    mechanical linewidth and the readout rate is chosen so the residues of
    ``Gamma_S chi_S`` and ``Gamma_M L0^2 chi_M`` agree in magnitude.
    """
    pole = dressed_pole(mech, cavity)
    w_eff, g_eff = pole.real, -pole.imag
    if gamma_s is None:
        gamma_s = g_eff
    omega_s = np.sqrt((w_eff + offset) ** 2 + gamma_s ** 2)
    if gamma_readout is None:
        k, dlt = cavity.kappa, cavity.detuning
        gm = readout_rate_mech(cavity)
        dc = (k - 1j * pole) ** 2 + dlt ** 2    # complex argument, so not cavity_denominator
        d_dm = (-2.0 * pole - 2j * mech.gamma_m0
                + gm * k * mech.omega_m * dlt * 2j * (k - 1j * pole) / dc ** 2)
        res_m = 2.0 * mech.omega_m / d_dm
        spin_pole = -1j * gamma_s + np.sqrt(omega_s ** 2 - gamma_s ** 2)
        res_s = 2.0 * omega_s / (-2.0 * spin_pole - 2j * gamma_s)
        l0_sq = k ** 2 / (k ** 2 + dlt ** 2)
        gamma_readout = gm * l0_sq * abs(res_m / res_s)
    sign = -1.0 if negative_mass else 1.0
    return SpinParams(omega_s=sign * omega_s, gamma_s=gamma_s, gamma_readout=gamma_readout,
                      n_spin=n_spin)
