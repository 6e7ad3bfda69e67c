"""Run configuration: TOML files layered over the built-in parameter presets.

Frequencies and rates are given in Hz (the value divided by 2 pi), angles
in degrees unless the key says otherwise.  A file looks like::

    preset = "fig23"
    t_bath_k = 7.0

    [grid]
    start_hz = 1.243e6
    stop_hz = 1.293e6
    points = 2001

    [scenario]
    name = "hybrid-negative"
    quadrature = "phase"

Missing keys come from the preset, unknown keys are errors.
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .calibration import spin_readout_rate
from .core import (
    CAVITY_MODELS,
    TWO_PI,
    CascadeParams,
    CavityParams,
    MechanicalParams,
    SpinParams,
    SystemParams,
    bath_occupancy,
    dressed_pole,
)
from .optomech import apply_mode_matching


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem when known."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


SCENARIOS = ("mech-only", "spin-only", "hybrid-negative", "hybrid-positive")

_NUMERIC = {
    "omega_m_hz", "gamma_m0_hz", "t_bath_k", "m_eff_kg", "x_zpf_m",
    "kappa_hz", "kappa_ratio", "detuning_hz", "g0_hz", "n_photons", "eta_mm",
    "gamma_s_hz", "gamma_s0_hz", "n_spin", "cq_spin", "gamma_readout_s_hz",
    "larmor_hz", "larmor_offset_hz",
    "eta1", "eta2", "phi_interstage_deg", "detection_angle_deg", "n_wn",
}
_OPTIONAL = {"gamma_readout_s_hz", "larmor_hz", "detection_angle_deg"}
_TOP_KEYS = _NUMERIC | {"preset", "cavity_model"}
_GRID_KEYS = {"start_hz", "stop_hz", "points"}
_SCENARIO_KEYS = {"name", "quadrature"}

_GRID_DEFAULT = {"start_hz": 1.243e6, "stop_hz": 1.293e6, "points": 2001}
_SCENARIO_DEFAULT = {"name": "hybrid-negative", "quadrature": "phase"}

# Measured device parameters.  ``kappa_ratio`` is
# kappa1 / kappa2; eta1 is the interstage efficiency after microcell loss,
# eta2 the detection efficiency times homodyne visibility.
PRESETS = {
    "fig23": {
        "omega_m_hz": 1.28e6, "gamma_m0_hz": 0.05, "t_bath_k": 7.0,
        "m_eff_kg": 14e-12, "x_zpf_m": 1e-15,
        "kappa_hz": 8.7e6, "kappa_ratio": 25.0, "detuning_hz": -4.7e6,
        "g0_hz": 210.0, "n_photons": 5.7e6, "eta_mm": 0.9,
        "gamma_s_hz": 2.6e3, "gamma_s0_hz": 500.0, "n_spin": 0.9, "cq_spin": 1.10,
        "gamma_readout_s_hz": None, "larmor_hz": None, "larmor_offset_hz": 0.0,
        "eta1": 0.61 * 0.87, "eta2": 0.72 * 0.89,
        "phi_interstage_deg": 0.0, "detection_angle_deg": None, "n_wn": 0.0,
        "cavity_model": "full",
    },
    "fig4": {
        "omega_m_hz": 1.28e6, "gamma_m0_hz": 0.05, "t_bath_k": 7.0,
        "m_eff_kg": 14e-12, "x_zpf_m": 1e-15,
        "kappa_hz": 7.7e6, "kappa_ratio": 25.0, "detuning_hz": -4.7e6,
        "g0_hz": 210.0, "n_photons": 4.2e6, "eta_mm": 0.9,
        "gamma_s_hz": 2.3e3, "gamma_s0_hz": 500.0, "n_spin": 0.9, "cq_spin": 1.10,
        "gamma_readout_s_hz": None, "larmor_hz": None, "larmor_offset_hz": 5.2e3,
        "eta1": 0.61 * 0.87, "eta2": 0.75 * 0.89,
        "phi_interstage_deg": -7.0, "detection_angle_deg": None, "n_wn": 0.0,
        "cavity_model": "full",
    },
}


@dataclass(frozen=True)
class RunConfig:
    values: dict
    grid: dict = field(default_factory=lambda: dict(_GRID_DEFAULT))
    scenario: str = "hybrid-negative"
    quadrature: str = "phase"

    @property
    def quadrature_angle(self) -> float:
        return parse_quadrature(self.quadrature)

    def grid_hz(self) -> np.ndarray:
        return np.linspace(self.grid["start_hz"], self.grid["stop_hz"], int(self.grid["points"]))

    def system_params(self) -> SystemParams:
        return build_params(self.values, self.scenario)


def parse_quadrature(text: str) -> float:
    if text == "phase":
        return math.pi / 2
    if text == "amplitude":
        return 0.0
    if text.startswith("angle:"):
        try:
            angle = float(text[len("angle:"):])
        except ValueError:
            raise ConfigError(f"bad quadrature angle {text!r}", key="quadrature") from None
        if not math.isfinite(angle):
            raise ConfigError("quadrature angle must be finite", key="quadrature")
        return angle
    raise ConfigError(f"quadrature must be 'amplitude', 'phase' or 'angle:<rad>', got {text!r}",
                      key="quadrature")


def _line_of(text: str, key: str):
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    return None


def preset_config(name: str = "fig23", scenario: str = "hybrid-negative",
                  quadrature: str = "phase") -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", key="preset")
    cfg = RunConfig(dict(PRESETS[name]), dict(_GRID_DEFAULT), scenario, quadrature)
    _validate(cfg, "")
    return cfg


def loads(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from None

    def fail(msg, key):
        raise ConfigError(msg, key=key, line=_line_of(text, key.split(".")[-1]))

    for key in raw:
        if key not in _TOP_KEYS | {"grid", "scenario"}:
            fail("unknown key", key)
    grid_raw = raw.get("grid", {})
    scen_raw = raw.get("scenario", {})
    for name, table, allowed in (("grid", grid_raw, _GRID_KEYS), ("scenario", scen_raw, _SCENARIO_KEYS)):
        if not isinstance(table, dict):
            fail("must be a table", name)
        for key in table:
            if key not in allowed:
                fail("unknown key", f"{name}.{key}")

    preset = raw.get("preset", "fig23")
    if preset not in PRESETS:
        fail(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}", "preset")
    values = dict(PRESETS[preset])
    for key, val in raw.items():
        if key in ("grid", "scenario", "preset"):
            continue
        if key in _NUMERIC:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                fail("must be a number", key)
            val = float(val)
            if not math.isfinite(val):
                fail("must be finite", key)
        elif not isinstance(val, str):
            fail("must be a string", key)
        values[key] = val

    grid = dict(_GRID_DEFAULT)
    for key, val in grid_raw.items():
        if key == "points":
            if isinstance(val, bool) or not isinstance(val, int):
                fail("must be an integer", f"grid.{key}")
        elif isinstance(val, bool) or not isinstance(val, (int, float)):
            fail("must be a number", f"grid.{key}")
        grid[key] = val
    scen = dict(_SCENARIO_DEFAULT)
    for key, val in scen_raw.items():
        if not isinstance(val, str):
            fail("must be a string", f"scenario.{key}")
        scen[key] = val

    cfg = RunConfig(values, grid, scen["name"], scen["quadrature"])
    _validate(cfg, text)
    return cfg


def load(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text)


def _validate(cfg: RunConfig, text: str):
    def fail(msg, key):
        raise ConfigError(msg, key=key, line=_line_of(text, key.split(".")[-1]))

    if cfg.scenario not in SCENARIOS:
        fail(f"scenario must be one of {SCENARIOS}", "scenario.name")
    parse_quadrature(cfg.quadrature)
    if cfg.values["cavity_model"] not in CAVITY_MODELS:
        fail(f"cavity_model must be one of {CAVITY_MODELS}", "cavity_model")
    for key in _NUMERIC - _OPTIONAL:
        if cfg.values[key] is None:
            fail("missing value", key)
    g = cfg.grid
    if not g["points"] >= 1:
        fail("points must be at least 1", "grid.points")
    if g["points"] > 1 and not g["stop_hz"] > g["start_hz"]:
        fail("stop_hz must exceed start_hz", "grid.stop_hz")
    try:
        build_params(cfg.values, cfg.scenario)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_params(values: dict, scenario: str = "hybrid-negative") -> SystemParams:
    """Translate a flat Hz-valued parameter dictionary into :class:`SystemParams`.

    Unless ``larmor_hz`` is set, the spin Larmor frequency is placed so the
    spin resonance sits ``larmor_offset_hz`` above the dressed mechanical
    resonance.  The spin readout rate follows from ``cq_spin`` unless
    ``gamma_readout_s_hz`` is given.
    """
    v = values
    omega_m = TWO_PI * v["omega_m_hz"]
    mech = MechanicalParams(omega_m=omega_m, gamma_m0=TWO_PI * v["gamma_m0_hz"],
                            n_bath=bath_occupancy(v["t_bath_k"], omega_m),
                            m_eff=v["m_eff_kg"], x_zpf=v["x_zpf_m"])
    kappa = TWO_PI * v["kappa_hz"]
    ratio = v["kappa_ratio"]
    if not ratio > 0:
        raise ValueError("kappa_ratio must be positive")
    kappa1 = kappa * ratio / (1.0 + ratio)
    cavity = CavityParams(kappa1=kappa1, kappa2=kappa - kappa1, detuning=TWO_PI * v["detuning_hz"],
                          g0=TWO_PI * v["g0_hz"], n_photons=v["n_photons"], eta_mm=v["eta_mm"])
    det = v.get("detection_angle_deg")
    cascade = CascadeParams(eta1=v["eta1"], eta2=v["eta2"],
                            phi_interstage=math.radians(v["phi_interstage_deg"]),
                            detection_angle_override=None if det is None else math.radians(det))
    model = v["cavity_model"]

    spin = None
    if scenario != "mech-only":
        gamma_s = TWO_PI * v["gamma_s_hz"]
        if v.get("larmor_hz") is not None:
            larmor = TWO_PI * abs(v["larmor_hz"])
        else:
            w_eff = dressed_pole(mech, apply_mode_matching(cavity)).real
            larmor = math.hypot(w_eff + TWO_PI * v["larmor_offset_hz"], gamma_s)
        if v.get("gamma_readout_s_hz") is not None:
            gamma_readout = TWO_PI * v["gamma_readout_s_hz"]
        else:
            gamma_readout = spin_readout_rate(v["cq_spin"], gamma_s, v["n_spin"])
        sign = 1.0 if scenario == "hybrid-positive" else -1.0
        spin = SpinParams(omega_s=sign * larmor, gamma_s=gamma_s, gamma_readout=gamma_readout,
                          n_spin=v["n_spin"], gamma_s0=TWO_PI * v["gamma_s0_hz"])
        if scenario == "spin-only":
            model = "bypass"
    return SystemParams(mech=mech, cavity=cavity, spin=spin, cascade=cascade,
                        n_wn=v["n_wn"], cavity_model=model)
