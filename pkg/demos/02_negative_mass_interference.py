"""Back-action interference between a spin ensemble and the membrane.

Compares the quantum back-action (QBA) part of the output with no spin, a
negative-mass spin and a positive-mass spin, first in the ideal broadband
limit and then for the fig4 parameter set.
"""
import numpy as np

from hybridqba import (
    TWO_PI,
    CavityParams,
    MechanicalParams,
    SpinParams,
    SystemParams,
    dressed_pole,
    integrate_variance,
    preset_config,
    qba_ideal_broadband,
    readout_rate_mech,
    spectrum,
)

# %% ideal case: equal rates and linewidths, matched frequencies
mech = MechanicalParams(10.0, 0.2, 0.0)
cav = CavityParams(1e5, 0.0, 0.0, 30.0, 1.0)
gm = readout_rate_mech(cav)
w = np.linspace(9.6, 10.4, 5)
peak = qba_ideal_broadband(np.array([10.0]), SystemParams(mech, cav))[0]
print("QBA relative to the mechanics-only peak at", w)
for label, spin in (("no spin", None), ("negative", SpinParams(-10.0, 0.2, gm)),
                    ("positive", SpinParams(10.0, 0.2, gm))):
    print(f"{label:>9}: ", np.round(qba_ideal_broadband(w, SystemParams(mech, cav, spin)) / peak, 3))
print("negative mass cancels the QBA; positive mass doubles the amplitude\n")

# %% experimental parameters
runs = {sc: preset_config("fig4", sc).system_params() for sc in ("mech-only", "hybrid-negative", "hybrid-positive")}
ref = runs["mech-only"]
pole = dressed_pole(ref.mech, ref.cavity)
f0, gam = pole.real / TWO_PI, -pole.imag / TWO_PI
grid = np.linspace(f0 - 25e3, f0 + 25e3, 2001)
spectra = {sc: spectrum(p, grid) for sc, p in runs.items()}

base = integrate_variance(spectra["mech-only"], component="qba")
for sc, s in spectra.items():
    q = integrate_variance(s, component="qba")
    tot = integrate_variance(s)
    print(f"{sc:>16}: QBA area {q:8.1f}  ({q / base:.2f} of mechanics), total area {tot:9.1f}")

# %% where the cancellation works
for d in (-3, -1, 0, 1, 2, 3):
    i = np.argmin(np.abs(grid - (f0 + d * gam)))
    neg = spectra["hybrid-negative"].qba[i] / spectra["mech-only"].qba[i]
    pos = spectra["hybrid-positive"].qba[i] / spectra["mech-only"].qba[i]
    print(f"  delta = {d:+d} gamma_M: negative/mech {neg:.2f}, positive/mech {pos:.2f}")
