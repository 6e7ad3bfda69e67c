"""Command-line front end: ``hybridqba {spectrum,variance,calibrate-spin,fit-bath,presets}``.

Exit codes: 0 ok, 2 configuration or input error, 3 unstable model,
4 calibration or fit outside its valid domain.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import config as cfgmod
from .calibration import (
    CalibrationDomainError,
    CalibrationInput,
    FitError,
    calibrate_spin,
    fit_bath_temperature,
)
from .cascade import SOURCE_ORDER, NoiseSource, Spectrum, integrate_variance, spectrum
from .core import InstabilityError

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_DOMAIN = 0, 2, 3, 4


class InputError(ValueError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _run_spectrum(cfg: cfgmod.RunConfig) -> Spectrum:
    return spectrum(cfg.system_params(), cfg.grid_hz(), cfg.quadrature_angle)


def cmd_spectrum(args, out) -> int:
    cfg = cfgmod.load(args.config)
    spec = _run_spectrum(cfg)
    sources = [s for s in SOURCE_ORDER if s in spec.per_source]
    out.write(",".join(["freq_hz", "total_sn"] + [s.value for s in sources]) + "\n")
    for i, f in enumerate(spec.freq_hz):
        row = [f, spec.total[i]] + [spec.per_source[s][i] for s in sources]
        out.write(",".join(_fmt(x) for x in row) + "\n")
    return EXIT_OK


def _parse_band(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"--band expects 'lo,hi' in Hz, got {text!r}") from None
    return lo, hi


def cmd_variance(args, out) -> int:
    cfg = cfgmod.load(args.config)
    spec = _run_spectrum(cfg)
    band = _parse_band(args.band) if args.band else (spec.freq_hz[0], spec.freq_hz[-1])
    try:
        value = integrate_variance(spec, band, units=args.units, component=args.column)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out.write(f"variance={_fmt(value)} units={args.units} band={_fmt(band[0])},{_fmt(band[1])}\n")
    return EXIT_OK


def cmd_calibrate_spin(args, out) -> int:
    try:
        inp = CalibrationInput(args.a, args.b, args.nwn, args.eta)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = calibrate_spin(inp)
    out.write(f"ratio={_fmt(res.ratio)} r_ba_sq={_fmt(res.r_ba_sq)} r_th_sq={_fmt(res.r_th_sq)}\n")
    return EXIT_OK


def read_spectrum_csv(path) -> tuple:
    """``(freq_hz, total_sn)`` from a CSV with at least those two named columns."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read data: {exc}") from None
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        i_f, i_t = header.index("freq_hz"), header.index("total_sn")
    except ValueError:
        raise InputError(f"{path}: header must contain freq_hz and total_sn") from None
    freq, total = [], []
    for n, row in enumerate(rows[1:], 2):
        if not row:
            continue
        try:
            freq.append(float(row[i_f]))
            total.append(float(row[i_t]))
        except (ValueError, IndexError):
            raise InputError(f"{path}: line {n}: malformed row") from None
    freq, total = np.array(freq), np.array(total)
    if freq.size == 0:
        raise InputError(f"{path}: no data rows")
    if not (np.all(np.isfinite(freq)) and np.all(np.isfinite(total))):
        raise InputError(f"{path}: non-finite values")
    if np.any(np.diff(freq) <= 0):
        raise InputError(f"{path}: freq_hz must be strictly increasing")
    return freq, total


def cmd_fit_bath(args, out) -> int:
    cfg = cfgmod.load(args.config)
    freq, total = read_spectrum_csv(args.data)
    measured = Spectrum(freq, total, {}, cfg.quadrature_angle)
    res = fit_bath_temperature(measured, cfg.system_params(), (args.tmin, args.tmax))
    out.write(f"t_bath={_fmt(res.t_bath)} residual={_fmt(res.residual)} "
              f"iterations={res.iterations} converged={str(res.converged).lower()}\n")
    return EXIT_OK


def _toml_value(v):
    if isinstance(v, str):
        return f'"{v}"'
    return repr(float(v))


def cmd_presets(args, out) -> int:
    if not args.name:
        for name in cfgmod.PRESETS:
            out.write(name + "\n")
        return EXIT_OK
    if args.name not in cfgmod.PRESETS:
        raise cfgmod.ConfigError(f"unknown preset {args.name!r}", key="preset")
    out.write(f'preset = "{args.name}"\n')
    for key, val in cfgmod.PRESETS[args.name].items():
        if val is None:
            out.write(f"# {key} =\n")
        else:
            out.write(f"{key} = {_toml_value(val)}\n")
    grid = cfgmod.preset_config(args.name).grid
    out.write("\n[grid]\n")
    out.write(f"start_hz = {_toml_value(grid['start_hz'])}\n")
    out.write(f"stop_hz = {_toml_value(grid['stop_hz'])}\n")
    out.write(f"points = {int(grid['points'])}\n")
    out.write('\n[scenario]\nname = "hybrid-negative"\nquadrature = "phase"\n')
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridqba",
                                description="Spectra and calibration for the spin/optomechanics hybrid.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="write the output spectrum as CSV")
    s.add_argument("config")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("variance", help="integrate a spectrum above shot noise")
    s.add_argument("config")
    s.add_argument("--band", help="lo,hi in Hz (default: whole grid)")
    s.add_argument("--units", choices=("sn", "zpf"), default="sn")
    s.add_argument("--column", default="total",
                   choices=["total", "qba", "thermal"] + [x.value for x in NoiseSource])
    s.set_defaults(func=cmd_variance)

    s = sub.add_parser("calibrate-spin", help="back-action to thermal ratio from white-noise heights")
    s.add_argument("--a", type=float, required=True, help="height with vacuum input")
    s.add_argument("--b", type=float, required=True, help="height with white-noise input")
    s.add_argument("--nwn", type=float, required=True, help="added white-noise quanta")
    s.add_argument("--eta", type=float, default=1.0, help="detection efficiency")
    s.set_defaults(func=cmd_calibrate_spin)

    s = sub.add_parser("fit-bath", help="fit the membrane bath temperature to a measured spectrum")
    s.add_argument("config")
    s.add_argument("--data", required=True, help="CSV with freq_hz,total_sn columns")
    s.add_argument("--tmin", type=float, default=1.0)
    s.add_argument("--tmax", type=float, default=30.0)
    s.set_defaults(func=cmd_fit_bath)

    s = sub.add_parser("presets", help="list presets, or print one as a config file")
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_presets)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (cfgmod.ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (CalibrationDomainError, FitError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except BrokenPipeError:
        # downstream reader (e.g. ``head``) closed early
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
