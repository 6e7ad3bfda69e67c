import math

import numpy as np
import pytest

from hybridqba.calibration import spin_cooperativity
from hybridqba.config import (
    PRESETS,
    ConfigError,
    load,
    loads,
    parse_quadrature,
    preset_config,
)
from hybridqba.core import TWO_PI, dressed_pole


def test_preset_values_fig23():
    p = preset_config("fig23", "hybrid-negative").system_params()
    assert p.cavity.kappa / TWO_PI == pytest.approx(8.7e6)
    assert p.cavity.kappa1 / p.cavity.kappa2 == pytest.approx(25.0)
    assert p.cavity.n_photons == 5.7e6
    assert p.cascade.eta1 == pytest.approx(0.61 * 0.87)
    assert p.cascade.eta2 == pytest.approx(0.72 * 0.89)
    assert p.spin.gamma_s / TWO_PI == pytest.approx(2.6e3)
    assert spin_cooperativity(p.spin) == pytest.approx(1.10)
    assert p.cavity_model == "full"


def test_preset_fig4_detuned_spin():
    p = preset_config("fig4", "hybrid-negative").system_params()
    assert p.cascade.phi_interstage == pytest.approx(math.radians(-7.0))
    from hybridqba.optomech import apply_mode_matching
    w_eff = dressed_pole(p.mech, apply_mode_matching(p.cavity)).real
    spin_peak = math.sqrt(p.spin.omega_s ** 2 - p.spin.gamma_s ** 2)
    assert (spin_peak - w_eff) / TWO_PI == pytest.approx(5.2e3, rel=1e-9)


def test_scenarios():
    assert preset_config("fig23", "mech-only").system_params().spin is None
    spin_only = preset_config("fig23", "spin-only").system_params()
    assert spin_only.cavity_model == "bypass"
    assert spin_only.spin.negative_mass
    assert not preset_config("fig23", "hybrid-positive").system_params().spin.negative_mass
    assert preset_config("fig23", "hybrid-negative").system_params().spin.negative_mass


def test_loads_defaults_to_preset():
    cfg = loads("")
    assert cfg.values == PRESETS["fig23"]
    assert cfg.scenario == "hybrid-negative"
    assert cfg.quadrature_angle == pytest.approx(math.pi / 2)
    grid = cfg.grid_hz()
    assert grid[0] == 1.243e6 and grid[-1] == 1.293e6 and grid.size == 2001


def test_loads_overrides():
    cfg = loads("""
preset = "fig4"
t_bath_k = 10
n_wn = 2.5

[grid]
start_hz = 1.26e6
stop_hz = 1.28e6
points = 11

[scenario]
name = "mech-only"
quadrature = "angle:0.3"
""")
    assert cfg.values["kappa_hz"] == 7.7e6
    assert cfg.values["t_bath_k"] == 10.0
    np.testing.assert_allclose(cfg.grid_hz(), np.linspace(1.26e6, 1.28e6, 11))
    p = cfg.system_params()
    assert p.spin is None and p.n_wn == 2.5
    assert cfg.quadrature_angle == 0.3


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as exc:
        loads('preset = "fig23"\n\nkapa_hz = 8e6\n')
    assert exc.value.line == 3
    assert exc.value.key == "kapa_hz"
    assert "line 3" in str(exc.value)


def test_unknown_table_key():
    with pytest.raises(ConfigError) as exc:
        loads("[grid]\nstart_hz = 1e6\nstep = 3\n")
    assert exc.value.line == 3


def test_syntax_error():
    with pytest.raises(ConfigError, match="TOML"):
        loads("kappa_hz = = 3")


@pytest.mark.parametrize("text", [
    'preset = "fig99"',
    'kappa_hz = "big"',
    "eta1 = 1.5",
    "t_bath_k = -1",
    "kappa_ratio = 0",
    'cavity_model = "exact"',
    "[grid]\npoints = 0",
    "[grid]\nstart_hz = 2e6\nstop_hz = 1e6",
    '[scenario]\nname = "both"',
    '[scenario]\nquadrature = "diagonal"',
    "eta2 = true",
])
def test_invalid_values(text):
    with pytest.raises(ConfigError):
        loads(text)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.toml")


def test_load_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('preset = "fig4"\n')
    assert load(path).values["n_photons"] == 4.2e6


def test_parse_quadrature():
    assert parse_quadrature("amplitude") == 0.0
    assert parse_quadrature("phase") == pytest.approx(math.pi / 2)
    assert parse_quadrature("angle:-1.25") == -1.25
    for bad in ("angle:", "angle:nan", "Phase"):
        with pytest.raises(ConfigError):
            parse_quadrature(bad)


def test_explicit_spin_overrides():
    cfg = loads("larmor_hz = 1.27e6\ngamma_readout_s_hz = 4e3\n")
    sp = cfg.system_params().spin
    assert sp.omega_s == pytest.approx(-TWO_PI * 1.27e6)
    assert sp.gamma_readout == pytest.approx(TWO_PI * 4e3)


def test_detection_angle_override():
    p = loads("detection_angle_deg = 10\n").system_params()
    assert p.cascade.detection_angle_override == pytest.approx(math.radians(10))
