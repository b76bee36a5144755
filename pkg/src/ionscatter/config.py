"""Config-file schema and parsing for the CLI.

Flat INI-style documents with ``key = value`` pairs.  All frequency-like
values are ordinary frequencies in Hz (``*_hz`` keys); the code converts to
angular units internally.  Decay rates are *population* rates: the
experimentally quoted natural linewidth.  Unknown sections or keys are hard
errors, never ignored.

Sections::

    [scheme]     kind plus per-kind rates and fields
    [laser.X]    one section per driving field
    [geometry]   exactly one of na / epsilon, optional mode_match
    [scan]       parameter, start, stop, points, engine, fit  (scan runs)
    [detection]  chopper settings                             (lock-in runs)
    [output]     csv (required), svg, precision

See docs/config.md for the full key tables.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

from .atoms import (BariumRates, LaserField, LevelScheme, Manifold,
                    Polarization, build_barium8, build_lambda3,
                    build_two_level, cg_amplitude, rabi_for_saturation)
from .detection import ChopperConfig
from .errors import ConfigError, ValidationError
from .scattering import CouplingGeometry
from .spectra import SCAN_PARAMETERS, ScanAxis

TWO_PI = 2.0 * math.pi

_SCHEME_KEYS = {
    "two_level": {"kind", "gamma_pop_hz"},
    "lambda3": {"kind", "gamma_pop_g_hz", "gamma_pop_m_hz", "gamma0_extra_hz",
                "motional_dephasing_hz"},
    "barium8": {"kind", "bfield_tesla", "gamma_pop_hz", "branching_s",
                "g_s12", "g_p12", "g_d32", "motional_dephasing_hz"},
}
_LASER_KEYS = {"rabi_hz", "saturation", "detuning_hz", "linewidth_hz",
               "polarization", "line"}
_GEOMETRY_KEYS = {"na", "epsilon", "mode_match"}
_SCAN_KEYS = {"parameter", "start", "stop", "points", "engine", "fit",
              "eit_reference"}
_DETECTION_KEYS = {"chop_frequency_hz", "duty", "lowpass_cycles",
                   "demod_phase_rad", "chopped_laser", "forward_fluorescence",
                   "probe_power"}
_OUTPUT_KEYS = {"csv", "svg", "precision"}


@dataclass(frozen=True)
class DetectionSettings:
    chopper: ChopperConfig
    demod_auto: bool
    chopped_laser: str | None
    forward_fluorescence: float
    probe_power: float


@dataclass(frozen=True)
class RunConfig:
    scheme: LevelScheme
    geometry: CouplingGeometry
    scan_axis: ScanAxis | None
    engine: str
    fit_column: str | None
    eit_reference: str
    detection: DetectionSettings | None
    csv_path: str
    svg_path: str | None
    precision: int
    resolved: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]

    @property
    def mode(self) -> str:
        return "scan" if self.scan_axis is not None else "detection"


class _Section:
    """One parsed section with typed, consumed-key accounting."""

    def __init__(self, name: str, raw: dict[str, str]):
        self.name = name
        self.raw = dict(raw)

    def _get(self, key, cast, default, required, caster_name):
        if key not in self.raw:
            if required:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return default
        text = self.raw[key]
        try:
            return cast(text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{self.name}] {key} = {text!r} is not a valid "
                              f"{caster_name}") from exc

    def get_float(self, key, default=None, required=False):
        return self._get(key, float, default, required, "number")

    def get_int(self, key, default=None, required=False):
        return self._get(key, int, default, required, "integer")

    def get_str(self, key, default=None, required=False):
        return self._get(key, str.strip, default, required, "string")

    def check_keys(self, allowed: set[str]) -> None:
        unknown = sorted(set(self.raw) - allowed)
        if unknown:
            raise ConfigError(f"unknown key {unknown[0]!r} in section [{self.name}]")


def _parse_polarization(text: str, section: str) -> Polarization:
    text = text.strip()
    shorthand = {"sigma+": (1.0, 0.0, 0.0), "sigma-": (0.0, 0.0, 1.0),
                 "pi": (0.0, 1.0, 0.0)}
    if text in shorthand:
        wp, w0, wm = shorthand[text]
        return Polarization.from_weights(wp, w0, wm)
    weights = {"sigma+": 0.0, "pi": 0.0, "sigma-": 0.0}
    try:
        for part in text.split(","):
            name, value = part.split(":")
            name = name.strip()
            if name not in weights:
                raise ValueError(name)
            weights[name] = float(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(
            f"[{section}] polarization {text!r} is not 'sigma+'/'sigma-'/'pi' or a "
            "comma list like 'sigma+:0.7,sigma-:0.3'") from exc
    try:
        return Polarization.from_weights(weights["sigma+"], weights["pi"],
                                         weights["sigma-"])
    except ValidationError as exc:
        raise ConfigError(f"[{section}] polarization: {exc}") from exc


def _resolve_rabi(sec: _Section, gamma_line: float, detuning: float,
                  max_weight: float = 1.0) -> float:
    """Rabi frequency in rad/s from either rabi_hz or a saturation parameter."""
    has_rabi = "rabi_hz" in sec.raw
    has_sat = "saturation" in sec.raw
    if has_rabi == has_sat:
        raise ConfigError(f"[{sec.name}] needs exactly one of rabi_hz / saturation")
    if has_rabi:
        rabi = TWO_PI * sec.get_float("rabi_hz", required=True)
    else:
        s = sec.get_float("saturation", required=True)
        # saturation refers to the strongest driven component
        rabi = rabi_for_saturation(s, gamma_line, detuning) / max_weight
    if rabi < 0:
        raise ConfigError(f"[{sec.name}] rabi must be >= 0")
    return rabi


def _build_scheme(scheme_sec: _Section, lasers: dict[str, _Section]) -> LevelScheme:
    kind = scheme_sec.get_str("kind", required=True)
    if kind not in _SCHEME_KEYS:
        raise ConfigError(f"[scheme] kind must be one of {sorted(_SCHEME_KEYS)}, "
                          f"got {kind!r}")
    scheme_sec.check_keys(_SCHEME_KEYS[kind])

    def laser_sec(name: str) -> _Section:
        if name not in lasers:
            raise ConfigError(f"scheme kind {kind!r} requires a [laser.{name}] section")
        return lasers[name]

    if kind == "two_level":
        if set(lasers) != {"probe"}:
            raise ConfigError("two_level expects exactly one laser section: [laser.probe]")
        gamma_pop = TWO_PI * scheme_sec.get_float("gamma_pop_hz", required=True)
        if gamma_pop <= 0:
            raise ConfigError("[scheme] gamma_pop_hz must be > 0")
        gamma = 0.5 * gamma_pop
        sec = laser_sec("probe")
        sec.check_keys(_LASER_KEYS - {"line", "polarization"})
        detuning = TWO_PI * sec.get_float("detuning_hz", 0.0)
        probe = LaserField("probe", _resolve_rabi(sec, gamma, detuning),
                           detuning, linewidth=TWO_PI * sec.get_float("linewidth_hz", 0.0))
        return build_two_level(gamma, probe)

    if kind == "lambda3":
        if set(lasers) != {"probe", "control"}:
            raise ConfigError("lambda3 expects exactly [laser.probe] and [laser.control]")
        gamma_g = TWO_PI * scheme_sec.get_float("gamma_pop_g_hz", required=True)
        gamma_m = TWO_PI * scheme_sec.get_float("gamma_pop_m_hz", required=True)
        if min(gamma_g, gamma_m) < 0:
            raise ConfigError("[scheme] decay rates must be >= 0")
        gamma = 0.5 * (gamma_g + gamma_m)
        extra = TWO_PI * (scheme_sec.get_float("gamma0_extra_hz", 0.0)
                          + scheme_sec.get_float("motional_dephasing_hz", 0.0))
        fields = {}
        for name in ("probe", "control"):
            sec = laser_sec(name)
            sec.check_keys(_LASER_KEYS - {"line", "polarization"})
            detuning = TWO_PI * sec.get_float("detuning_hz", 0.0)
            fields[name] = LaserField(
                name, _resolve_rabi(sec, gamma, detuning), detuning,
                linewidth=TWO_PI * sec.get_float("linewidth_hz", 0.0))
        return build_lambda3(gamma_g, gamma_m, extra, fields["probe"], fields["control"])

    # barium8
    rates = BariumRates(
        gamma_pop_total=TWO_PI * scheme_sec.get_float("gamma_pop_hz", 20.1e6),
        branching_s=scheme_sec.get_float("branching_s", 0.73),
        g_s12=scheme_sec.get_float("g_s12", 2.0),
        g_p12=scheme_sec.get_float("g_p12", 2.0 / 3.0),
        g_d32=scheme_sec.get_float("g_d32", 4.0 / 5.0),
        motional_dephasing=TWO_PI * scheme_sec.get_float("motional_dephasing_hz", 0.0),
    )
    bfield = scheme_sec.get_float("bfield_tesla", required=True)
    gamma = 0.5 * rates.gamma_pop_total
    fields = []
    lines = {}
    for name, sec in sorted(lasers.items()):
        sec.check_keys(_LASER_KEYS)
        line = sec.get_str("line", required=True)
        if line not in ("s-p", "d-p"):
            raise ConfigError(f"[{sec.name}] line must be 's-p' or 'd-p', got {line!r}")
        if line in lines:
            raise ConfigError(f"two lasers ({lines[line]!r}, {name!r}) drive the {line} "
                              "line; a single rotating frame needs one field per line")
        lines[line] = name
        pol_text = sec.get_str("polarization", required=True)
        pol = _parse_polarization(pol_text, sec.name)
        detuning = TWO_PI * sec.get_float("detuning_hz", 0.0)
        lower = Manifold.S12 if line == "s-p" else Manifold.D32
        max_weight = max(
            abs(pol.amplitude(q)) * abs(cg_amplitude(lower, two_m, q))
            for q in (-1, 0, 1)
            for two_m in range(-round(2 * lower.j), round(2 * lower.j) + 1, 2))
        if max_weight == 0.0:
            raise ConfigError(f"[{sec.name}] polarization drives no allowed transition")
        fields.append(LaserField(
            name, _resolve_rabi(sec, gamma, detuning, max_weight), detuning,
            polarization=pol, linewidth=TWO_PI * sec.get_float("linewidth_hz", 0.0),
            line=line))
    if set(lines) != {"s-p", "d-p"}:
        raise ConfigError("barium8 needs one laser on the s-p line and one on the d-p line")
    return build_barium8(bfield, fields, rates)


def _build_geometry(sec: _Section) -> CouplingGeometry:
    sec.check_keys(_GEOMETRY_KEYS)
    has_na, has_eps = "na" in sec.raw, "epsilon" in sec.raw
    if has_na == has_eps:
        raise ConfigError("[geometry] needs exactly one of na / epsilon")
    mode_match = sec.get_float("mode_match", 1.0)
    try:
        if has_na:
            return CouplingGeometry.from_na(sec.get_float("na", required=True), mode_match)
        epsilon = sec.get_float("epsilon", required=True)
        if not 0.0 <= epsilon <= 0.5:
            raise ConfigError(f"geometry.epsilon must lie in [0, 0.5], got {epsilon}")
        return CouplingGeometry.from_epsilon(epsilon, mode_match)
    except ValidationError as exc:
        raise ConfigError(f"[geometry] {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a config document."""
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), strict=True,
                                       interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    sections = {name: _Section(name, dict(parser[name])) for name in parser.sections()}
    known = {"scheme", "geometry", "scan", "detection", "output"}
    for name in sections:
        if name not in known and not name.startswith("laser."):
            raise ConfigError(f"unknown section [{name}]")

    missing = [s for s in ("scheme", "geometry", "output") if s not in sections]
    if "scan" not in sections and "detection" not in sections:
        missing.append("scan (or detection)")
    if missing:
        raise ConfigError("missing required sections: " + ", ".join(f"[{s}]" for s in missing))
    if "scan" in sections and "detection" in sections:
        raise ConfigError("give exactly one of [scan] and [detection], not both")

    lasers = {}
    for name, sec in sections.items():
        if name.startswith("laser."):
            laser_name = name[len("laser."):]
            if not laser_name:
                raise ConfigError("laser section needs a name: [laser.<name>]")
            lasers[laser_name] = sec

    try:
        scheme = _build_scheme(sections["scheme"], lasers)
        geometry = _build_geometry(sections["geometry"])
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc

    scan_axis, engine, fit_column, eit_reference = None, "numeric", None, "auto"
    if "scan" in sections:
        sec = sections["scan"]
        sec.check_keys(_SCAN_KEYS)
        parameter = sec.get_str("parameter", required=True)
        if parameter not in SCAN_PARAMETERS:
            raise ConfigError(f"[scan] parameter must be one of {SCAN_PARAMETERS}, "
                              f"got {parameter!r}")
        try:
            scan_axis = ScanAxis(parameter, sec.get_float("start", required=True),
                                 sec.get_float("stop", required=True),
                                 sec.get_int("points", required=True))
        except ValidationError as exc:
            raise ConfigError(f"[scan] {exc}") from exc
        engine = sec.get_str("engine", "numeric")
        if engine not in ("analytic", "numeric"):
            raise ConfigError(f"[scan] engine must be 'analytic' or 'numeric', got {engine!r}")
        fit = sec.get_str("fit", "none")
        if fit not in ("none", "extinction", "fluorescence"):
            raise ConfigError(f"[scan] fit must be none/extinction/fluorescence, got {fit!r}")
        fit_column = None if fit == "none" else fit
        eit_reference = sec.get_str("eit_reference", "auto")
        if eit_reference not in ("auto", "none"):
            raise ConfigError("[scan] eit_reference must be 'auto' or 'none'")

    detection = None
    if "detection" in sections:
        sec = sections["detection"]
        sec.check_keys(_DETECTION_KEYS)
        phase_text = sec.get_str("demod_phase_rad", "auto")
        demod_auto = phase_text == "auto"
        try:
            chopper = ChopperConfig(
                frequency=sec.get_float("chop_frequency_hz", 600.0),
                duty=sec.get_float("duty", 0.5),
                demod_phase=0.0 if demod_auto else float(phase_text),
                lowpass_cycles=sec.get_int("lowpass_cycles", 4))
        except (ValidationError, ValueError) as exc:
            raise ConfigError(f"[detection] {exc}") from exc
        detection = DetectionSettings(
            chopper=chopper, demod_auto=demod_auto,
            chopped_laser=sec.get_str("chopped_laser", None),
            forward_fluorescence=sec.get_float("forward_fluorescence", 0.0),
            probe_power=sec.get_float("probe_power", 1.0))

    out = sections["output"]
    out.check_keys(_OUTPUT_KEYS)
    csv_path = out.get_str("csv", required=True)
    svg_path = out.get_str("svg", None)
    precision = out.get_int("precision", 12)
    if precision < 1:
        raise ConfigError("[output] precision must be >= 1")

    resolved = tuple(sorted(
        (name, tuple(sorted(sec.raw.items()))) for name, sec in sections.items()))
    return RunConfig(scheme=scheme, geometry=geometry, scan_axis=scan_axis,
                     engine=engine, fit_column=fit_column, eit_reference=eit_reference,
                     detection=detection, csv_path=csv_path, svg_path=svg_path,
                     precision=precision, resolved=resolved)


def render_config(config: RunConfig) -> str:
    """Serialize a parsed config back to canonical INI text."""
    lines = []
    for section, items in config.resolved:
        lines.append(f"[{section}]")
        for key, value in items:
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
