"""Calibrating the spin cooperativity and fitting the bath temperature.

The spin stage is calibrated from two resonance heights, one with vacuum
input and one with added white amplitude noise.  Then a noisy synthetic
membrane spectrum is fitted for the bath temperature.
"""
from dataclasses import replace

import numpy as np

from hybridqba import (
    TWO_PI,
    CalibrationInput,
    calibrate_spin,
    fit_bath_temperature,
    preset_config,
    spectrum,
)
from hybridqba.calibration import resonance_heights

# %% white-noise calibration
p = preset_config("fig23", "spin-only").system_params()
f_s = abs(p.spin.omega_s) / TWO_PI
n_wn = 3.0
a, b = resonance_heights(p, n_wn, f_s)
res = calibrate_spin(CalibrationInput(a, b, n_wn))
print(f"heights A = {a:.2f}, B = {b:.2f} with {n_wn} quanta of white noise")
print(f"back-action / thermal = {res.ratio:.3f} (configured 1.10)")

# %% bath temperature fit
p = preset_config("fig23", "mech-only").system_params()
grid = np.linspace(1.255e6, 1.285e6, 301)
clean = spectrum(p, grid)
rng = np.random.default_rng(7)
noisy = replace(clean, total=clean.total * (1 + 0.01 * rng.standard_normal(grid.size)))

for label, meas in (("clean", clean), ("1% noise", noisy)):
    fit = fit_bath_temperature(meas, p.with_bath_temperature(15.0), search=(2.0, 20.0))
    print(f"{label:>9}: T_bath = {fit.t_bath:.4f} K after {fit.iterations} iterations")
