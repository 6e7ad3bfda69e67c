"""Noise budget of the membrane readout on its own.

Runs the fig23 preset without the spin stage, prints where the output
noise comes from at a few frequencies, then integrates the spectrum in
zero-point units and splits the phonon number into bath and optical parts.
"""
import numpy as np

from hybridqba import (
    TWO_PI,
    dressed_pole,
    effective_occupancy,
    integrate_variance,
    preset_config,
    quantum_cooperativity,
    spectrum,
)

# %% parameters
cfg = preset_config("fig23", "mech-only")
p = cfg.system_params()
pole = dressed_pole(p.mech, p.cavity)
f0, gam = pole.real / TWO_PI, -pole.imag / TWO_PI
print(f"dressed resonance {f0 / 1e6:.5f} MHz, linewidth {gam / 1e3:.2f} kHz")
print(f"bath occupancy {p.mech.n_bath:.3g}, C_q {quantum_cooperativity(p.mech, p.cavity):.2f}")

# %% spectrum and per-source breakdown
s = spectrum(p, np.linspace(f0 - 30e3, f0 + 30e3, 2401))
print("\n   offset/gamma   total   " + "  ".join(f"{k.value:>16}" for k in s.per_source))
for d in (-3, -1, 0, 1, 3):
    i = np.argmin(np.abs(s.freq_hz - (f0 + d * gam)))
    cols = "  ".join(f"{v[i]:16.4f}" for v in s.per_source.values())
    print(f"   {d:+12d}  {s.total[i]:7.3f}   {cols}")

# %% variances
band = (f0 - 25e3, f0 + 25e3)
total = integrate_variance(s, band, units="zpf")
qba = integrate_variance(s, band, units="zpf", component="qba")
th = integrate_variance(s, band, units="zpf", component="thermal")
print(f"\nvariance over +-25 kHz: total {total:.2f}, thermal {th:.2f}, QBA {qba:.2f} (x_zpf^2)")

occ = effective_occupancy(p.mech, p.cavity)
print(f"phonons: bath part {occ.thermal:.2f}, optical part {occ.backaction:.2f}, "
      f"cooling limit {occ.n_min:.2f}")
