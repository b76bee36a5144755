"""Command-line front end.

Usage::

    simulate --config configs/fig2_twolevel.cfg
    simulate --check configs/fig2_twolevel.cfg
    simulate --config X.cfg --engine numeric --out run.csv --svg run.svg

Exit codes: 0 success, 1 config error, 2 numerical failure.  Diagnostics go
to stderr; the one-line result summary goes to stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import RunConfig, parse_config
from .detection import calibrate_phase, lockin_measure
from .errors import ConfigError, SimulationError
from .scattering import transmission, two_level_response
from .spectra import eit_metrics, fit_lorentzian, scan


def _fmt_freq(hz: float) -> str:
    if abs(hz) >= 1e6:
        return f"{hz / 1e6:.1f} MHz" if abs(hz) >= 10e6 else f"{hz / 1e6:.2f} MHz"
    return f"{hz / 1e3:.1f} kHz"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Extinction / EIT spectra of a probe scattered by a single trapped ion.")
    parser.add_argument("--config", "-c", metavar="PATH", help="config file to run")
    parser.add_argument("--check", metavar="PATH", nargs="?", const="",
                        help="validate the config (given here or via --config) and exit")
    parser.add_argument("--engine", choices=("analytic", "numeric"),
                        help="override the scan engine")
    parser.add_argument("--out", metavar="PATH", help="override the CSV output path")
    parser.add_argument("--svg", metavar="PATH", help="override the figure output path")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def _reference_extinction(config: RunConfig) -> float:
    """Undressed (far-from-Raman-resonance) extinction at the probe detuning.

    With the control fully off a Lambda scheme optically pumps into the
    metastable level and stops scattering, so the meaningful reference is
    the two-level response of the probe transition — identical to the EIT
    scan's large-|delta| baseline.
    """
    scheme = config.scheme
    probe = scheme.probe_laser()
    lo, up = probe.links[0]
    resp = two_level_response(probe.detuning, scheme.coherence_rate(lo, up))
    return transmission(config.geometry.epsilon, resp).extinction


def _run_scan(config: RunConfig, quiet: bool) -> None:
    table = scan(config.scheme, config.scan_axis, config.geometry, config.engine)
    Path(config.csv_path).parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(config.csv_path, precision=config.precision)
    if config.svg_path:
        from . import plots
        Path(config.svg_path).parent.mkdir(parents=True, exist_ok=True)
        plots.render_table(table, config.svg_path)

    if quiet:
        return
    parts = [f"rows={config.scan_axis.points}", f"csv={config.csv_path}"]
    if config.fit_column:
        fit = fit_lorentzian(table, config.fit_column)
        if config.scan_axis.parameter == "bfield":
            width = f"fwhm={fit.fwhm * 1e3:.3g} mT"
        else:
            width = f"fwhm={_fmt_freq(fit.fwhm)}"
        summary = [width, f"depth={100.0 * abs(fit.depth):.2f}%"]
        if (config.scan_axis.parameter == "two_photon_detuning"
                and config.eit_reference == "auto"):
            ref = _reference_extinction(config)
            window, suppression = eit_metrics(table, ref)
            summary = [f"window_fwhm={_fmt_freq(window)}",
                       f"suppression={100.0 * suppression:.1f}%"]
        parts = summary + parts
    print(" ".join(parts))


def _run_detection(config: RunConfig, quiet: bool) -> None:
    det = config.detection
    scheme_on = config.scheme
    chopped = det.chopped_laser or scheme_on.control_laser().name
    scheme_off = scheme_on.with_laser(chopped, rabi=0.0)
    chopper = det.chopper
    if det.demod_auto:
        phase = calibrate_phase(scheme_on, chopper, chopped_laser=chopped)
        chopper = dataclasses.replace(chopper, demod_phase=phase)
    result = lockin_measure(scheme_on, scheme_off, chopper, config.geometry,
                            probe_power=det.probe_power,
                            forward_fluorescence=det.forward_fluorescence)
    Path(config.csv_path).parent.mkdir(parents=True, exist_ok=True)
    fmt = f"{{:.{config.precision}g}}"
    with open(config.csv_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("dc_signal,fluorescence_component,extinction_component,settled\n")
        handle.write(",".join([fmt.format(result.dc_signal),
                               fmt.format(result.fluorescence_component),
                               fmt.format(result.extinction_component),
                               "1" if result.settled else "0"]) + "\n")
    if not quiet:
        print(f"dc_signal={result.dc_signal:.6g} "
              f"fluorescence={result.fluorescence_component:.6g} "
              f"extinction={result.extinction_component:.6g} "
              f"settled={result.settled} csv={config.csv_path}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "simulate":  # tolerate an explicit verb
        argv = argv[1:]
    args = _build_parser().parse_args(argv)

    check_only = args.check is not None
    config_path = args.config or (args.check if check_only and args.check else None)
    if not config_path:
        print("error: no config file given (use --config PATH)", file=sys.stderr)
        return 1

    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if check_only:
        if not args.quiet:
            print(f"OK {config_path}")
        return 0

    if args.engine and config.scan_axis is not None:
        config = dataclasses.replace(config, engine=args.engine)
    if args.out:
        config = dataclasses.replace(config, csv_path=args.out)
    if args.svg:
        config = dataclasses.replace(config, svg_path=args.svg)

    try:
        if config.mode == "scan":
            _run_scan(config, args.quiet)
        else:
            _run_detection(config, args.quiet)
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
