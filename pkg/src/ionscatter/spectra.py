"""Parameter scans, Lorentzian fits and EIT window metrics.

A scan sweeps one laser parameter over a uniform grid, recomputes the scheme
at every point and records transmission, extinction, phase shift,
fluorescence and excited populations.  Two engines exist: ``numeric`` solves
the full Bloch equations for the steady state; ``analytic`` evaluates the
closed-form two-level/Lambda responses.  Frequency axes are ordinary
frequencies in Hz (angular frequencies stay internal).
"""

from __future__ import annotations

import dataclasses
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .atoms import LevelScheme, SchemeKind
from .dynamics import build_liouvillian, steady_state
from .errors import (AmbiguousPeakError, FitError, ScanError, SimulationError,
                     ValidationError, WeakProbeWarning)
from .scattering import (CouplingGeometry, fluorescence_rate, lambda_response,
                         response_from_steady_state, transmission,
                         two_level_response)

TWO_PI = 2.0 * math.pi

SCAN_PARAMETERS = ("probe_detuning", "control_detuning", "two_photon_detuning",
                   "control_rabi", "bfield")

AXIS_COLUMN = {
    "probe_detuning": "detuning_hz",
    "control_detuning": "control_detuning_hz",
    "two_photon_detuning": "two_photon_detuning_hz",
    "control_rabi": "control_rabi_hz",
    "bfield": "bfield_tesla",
}


@dataclass(frozen=True)
class ScanAxis:
    """Uniform grid over one scan parameter.

    ``start``/``stop`` are in output units: Hz for detunings and Rabi
    frequencies, tesla for the magnetic field.
    """

    parameter: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.parameter not in SCAN_PARAMETERS:
            raise ValidationError(f"unknown scan parameter {self.parameter!r}; "
                                  f"expected one of {SCAN_PARAMETERS}")
        if not self.start < self.stop:
            raise ValidationError(f"scan start must be < stop, got [{self.start}, {self.stop}]")
        if self.points < 2:
            raise ValidationError(f"scan needs at least 2 points, got {self.points}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class SpectrumTable:
    """Scan results: axis values plus per-point observables."""

    parameter: str
    axis: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def axis_name(self) -> str:
        return AXIS_COLUMN[self.parameter]

    def column_names(self) -> list[str]:
        return [self.axis_name, *self.columns.keys()]

    def to_csv(self, path_or_handle, precision: int = 12) -> None:
        """Write the table as CSV: header with units, LF endings, fixed digits."""
        names = self.column_names()
        series = [self.axis, *self.columns.values()]
        fmt = f"{{:.{precision}g}}"

        def _write(handle):
            handle.write(",".join(names) + "\n")
            for i in range(len(self.axis)):
                handle.write(",".join(fmt.format(col[i]) for col in series) + "\n")

        if isinstance(path_or_handle, (str,)) or hasattr(path_or_handle, "__fspath__"):
            with open(path_or_handle, "w", encoding="utf-8", newline="\n") as handle:
                _write(handle)
        else:
            _write(path_or_handle)

    def to_csv_text(self, precision: int = 12) -> str:
        buf = io.StringIO()
        self.to_csv(buf, precision=precision)
        return buf.getvalue()


def _apply_parameter(scheme: LevelScheme, parameter: str, value: float) -> LevelScheme:
    """Rebuild the scheme with one swept parameter set (value in output units)."""
    if parameter == "probe_detuning":
        return scheme.with_laser(scheme.probe_laser().name, detuning=TWO_PI * value)
    if parameter == "control_detuning":
        return scheme.with_laser(scheme.control_laser().name, detuning=TWO_PI * value)
    if parameter == "two_photon_detuning":
        delta_r = scheme.probe_laser().detuning - TWO_PI * value
        return scheme.with_laser(scheme.control_laser().name, detuning=delta_r)
    if parameter == "control_rabi":
        return scheme.with_laser(scheme.control_laser().name, rabi=TWO_PI * value)
    if parameter == "bfield":
        return scheme.with_bfield(value)
    raise ValidationError(f"unknown scan parameter {parameter!r}")


def _effective_gamma(scheme: LevelScheme) -> float:
    probe = scheme.probe_laser()
    lo, up = probe.links[0]
    return scheme.coherence_rate(lo, up)


def _analytic_point(scheme: LevelScheme) -> tuple[complex, float, dict[str, float]]:
    """Closed-form response, weak-probe excited population and fluorescence."""
    probe = scheme.probe_laser()
    gamma = _effective_gamma(scheme)
    if scheme.kind is SchemeKind.TWO_LEVEL:
        resp = two_level_response(probe.detuning, gamma)
    else:
        control = scheme.control_laser()
        gamma0 = 0.5 * scheme.dephasing_rate("m")
        delta2 = probe.detuning - control.detuning
        resp = lambda_response(delta2, probe.detuning, 0.5 * control.rabi,
                               gamma, gamma0)
    # weak-probe energy balance: Gamma_tot * rho_ee = Omega_p * Im(rho_ge)
    # with rho_ge = i Omega_p L / (2 gamma)
    gamma_tot = scheme.total_decay_rate("e")
    pop_e = (probe.rabi ** 2 * resp.real / (2.0 * gamma * gamma_tot)
             if probe.rabi > 0 else 0.0)
    pops = {"e": max(pop_e, 0.0)}
    return resp, gamma_tot * pops["e"], pops


def scan(scheme: LevelScheme, axis: ScanAxis, geometry: CouplingGeometry,
         engine: str = "numeric", *, collection: float = 1.0) -> SpectrumTable:
    """Sweep one parameter and tabulate transmission/extinction/fluorescence.

    Grid points are independent; results are assembled in axis order.  A
    steady-state failure is reported with the offending axis value.
    """
    if engine not in ("analytic", "numeric"):
        raise ValidationError(f"unknown engine {engine!r}")
    if engine == "analytic" and scheme.kind is SchemeKind.BARIUM8:
        raise ValidationError("the analytic engine supports only two-level and "
                              "lambda schemes; use engine='numeric'")

    values = axis.values()
    excited = scheme.excited_labels()
    trans = np.empty(len(values))
    ext = np.empty(len(values))
    phase = np.empty(len(values))
    fluor = np.empty(len(values))
    pops = {label: np.empty(len(values)) for label in excited}

    for i, x in enumerate(values):
        sch = _apply_parameter(scheme, axis.parameter, float(x))
        try:
            if engine == "numeric":
                rho = steady_state(build_liouvillian(sch))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", WeakProbeWarning)
                    resp = response_from_steady_state(rho, sch)
                fl = fluorescence_rate(rho, sch, collection)
                for label in excited:
                    pops[label][i] = rho[sch.index(label), sch.index(label)].real
            else:
                resp, fl, apops = _analytic_point(sch)
                fl *= collection
                for label in excited:
                    pops[label][i] = apops.get(label, 0.0)
            tp = transmission(geometry.epsilon, resp)
        except SimulationError as exc:
            raise ScanError(f"scan failed at {axis.parameter}={x:g}: {exc}") from exc
        trans[i], ext[i], phase[i], fluor[i] = (tp.transmission, tp.extinction,
                                                tp.phase_shift, fl)

    columns = {"transmission": trans, "extinction": ext, "phase_rad": phase,
               "fluorescence_rel": fluor}
    for label in excited:
        columns[f"pop_{label}"] = pops[label]
    metadata = {
        "engine": engine,
        "parameter": axis.parameter,
        "points": axis.points,
        "start": axis.start,
        "stop": axis.stop,
        "epsilon": geometry.epsilon,
        "scheme_kind": scheme.kind.value,
        "collection": collection,
        "lasers": {laser.name: {"rabi_hz": laser.rabi / TWO_PI,
                                "detuning_hz": laser.detuning / TWO_PI,
                                "linewidth_hz": laser.linewidth / TWO_PI}
                   for laser in scheme.lasers},
        "bfield_tesla": scheme.bfield,
    }
    return SpectrumTable(axis.parameter, values, columns, metadata)


# ---------------------------------------------------------------------------
# Lorentzian fitting

@dataclass(frozen=True)
class LorentzianFit:
    center: float
    fwhm: float
    depth: float        # signed peak deviation from the baseline
    baseline: float
    rms_residual: float


def _lorentz(x: np.ndarray, center: float, fwhm: float, depth: float,
             baseline: float) -> np.ndarray:
    half = 0.5 * fwhm
    return baseline + depth * half ** 2 / ((x - center) ** 2 + half ** 2)


def _check_single_extremum(x: np.ndarray, y: np.ndarray) -> None:
    baseline = 0.5 * (np.median(y[: max(2, len(y) // 8)])
                      + np.median(y[-max(2, len(y) // 8):]))
    d = y - baseline
    rms = math.sqrt(float(np.mean(d ** 2)))
    if rms == 0.0:
        raise FitError("data is constant; nothing to fit")
    strong = 0
    for i in range(1, len(y) - 1):
        if abs(d[i]) <= 3.0 * rms:
            continue
        if (abs(d[i]) >= abs(d[i - 1])) and (abs(d[i]) > abs(d[i + 1])):
            strong += 1
    if strong > 1:
        raise AmbiguousPeakError(
            f"found {strong} extrema above 3x rms of the detrended data; "
            "fit_lorentzian handles a single dominant peak only")


def fit_lorentzian(table: SpectrumTable, column: str = "extinction") -> LorentzianFit:
    """Least-squares Lorentzian fit of one spectrum column.

    Coarse grid initialization followed by plain Gauss-Newton with step
    halving; at most 200 iterations, relative step tolerance 1e-10.
    """
    key = {"extinction": "extinction", "fluorescence": "fluorescence_rel"}.get(column, column)
    if key not in table.columns:
        raise ValidationError(f"table has no column {column!r}")
    x = np.asarray(table.axis, dtype=float)
    y = np.asarray(table.columns[key], dtype=float)
    if len(x) < 8:
        raise ValidationError(f"need at least 8 points to fit, got {len(x)}")
    _check_single_extremum(x, y)

    # coarse init: extremum against an edge-median baseline, width over a grid
    span = x[-1] - x[0]
    edge = max(2, len(y) // 8)
    baseline0 = 0.5 * (np.median(y[:edge]) + np.median(y[-edge:]))
    i0 = int(np.argmax(np.abs(y - baseline0)))
    center0, depth0 = x[i0], y[i0] - baseline0
    best = None
    for frac in (0.02, 0.05, 0.1, 0.2, 0.4, 0.8):
        w = frac * span
        sse = float(np.sum((y - _lorentz(x, center0, w, depth0, baseline0)) ** 2))
        if best is None or sse < best[0]:
            best = (sse, w)
    p = np.array([center0, best[1], depth0, baseline0])

    def residual(params):
        return y - _lorentz(x, *params)

    r = residual(p)
    sse = float(r @ r)
    converged = False
    for _ in range(200):
        c, w, d, b = p
        half = 0.5 * w
        denom = (x - c) ** 2 + half ** 2
        shape = half ** 2 / denom
        # Jacobian of the model wrt (center, fwhm, depth, baseline)
        jac = np.column_stack([
            d * half ** 2 * 2.0 * (x - c) / denom ** 2,
            d * (half * denom - half ** 3) / denom ** 2,
            shape,
            np.ones_like(x),
        ])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        # step halving keeps plain Gauss-Newton from overshooting
        scale = 1.0
        for _ in range(30):
            trial = p + scale * step
            trial[1] = abs(trial[1])
            r_trial = residual(trial)
            sse_trial = float(r_trial @ r_trial)
            if sse_trial <= sse or scale < 1e-12:
                break
            scale *= 0.5
        rel = np.linalg.norm(scale * step) / max(np.linalg.norm(p), 1e-300)
        p, r, sse = trial, r_trial, sse_trial
        if rel <= 1e-10:
            converged = True
            break
    rms = math.sqrt(sse / len(x))
    if not converged:
        raise FitError(f"Gauss-Newton did not converge in 200 iterations "
                       f"(rms residual {rms:.3e})")
    return LorentzianFit(center=float(p[0]), fwhm=float(abs(p[1])),
                         depth=float(p[2]), baseline=float(p[3]),
                         rms_residual=float(rms))


def eit_metrics(table_with_control: SpectrumTable,
                extinction_without_control: float) -> tuple[float, float]:
    """EIT window FWHM and extinction suppression from a two-photon scan.

    ``suppression = 1 - extinction(delta=0) / extinction_without_control``;
    the window width comes from a Lorentzian fit of the extinction dip (same
    width as the transmission recovery peak).
    """
    if table_with_control.parameter != "two_photon_detuning":
        raise ValidationError("eit_metrics needs a scan over two_photon_detuning")
    if extinction_without_control <= 0:
        raise ValidationError("reference extinction must be > 0")
    i0 = int(np.argmin(np.abs(table_with_control.axis)))
    ext0 = float(table_with_control.columns["extinction"][i0])
    suppression = 1.0 - ext0 / extinction_without_control
    fit = fit_lorentzian(table_with_control, "extinction")
    return float(abs(fit.fwhm)), suppression
