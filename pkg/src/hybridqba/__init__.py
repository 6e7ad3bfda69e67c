"""Quantum back-action evasion in a cascaded spin-ensemble / optomechanical hybrid."""
from .core import (
    TWO_PI,
    InstabilityError,
    MechanicalParams,
    CavityParams,
    SpinParams,
    CascadeParams,
    SystemParams,
    bath_occupancy,
    bath_temperature,
    chi_mech_bare,
    chi_mech_eff,
    chi_spin,
    readout_rate_mech,
    dressed_pole,
    effective_linewidth,
    effective_frequency,
    check_stability,
)
from .optomech import (
    transfer_full,
    transfer_broadband,
    transfer_nsb,
    transfer_bypass,
    apply_mode_matching,
    detection_phase,
    lorentzian,
)
from .spin import SpinPhysicalParams, spin_transfer, coupling_alpha, readout_rate_spin
from .cascade import (
    NoiseSource,
    Spectrum,
    hybrid_transfer,
    output_psd,
    spectrum,
    integrate_variance,
    qba_hybrid_approx,
    qba_ideal_broadband,
    matched_spin,
)
from .calibration import (
    CalibrationInput,
    CalibrationResult,
    CalibrationDomainError,
    FitError,
    FitResult,
    ba_thermal_ratio,
    ba_thermal_ratio_mech,
    calibrate_spin,
    effective_occupancy,
    fit_bath_temperature,
    quantum_cooperativity,
)
from .config import ConfigError, RunConfig, PRESETS, build_params, preset_config

__version__ = "0.1.0"
