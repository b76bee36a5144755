"""Scan engines, Lorentzian fitting and EIT window metrics."""

import math

import numpy as np
import pytest

from conftest import GAMMA, TWO_PI, barium_scheme, lambda_scheme, two_level_scheme
from ionscatter.errors import (AmbiguousPeakError, ScanError, ValidationError)
from ionscatter.scattering import CouplingGeometry, transmission, two_level_response
from ionscatter.spectra import (LorentzianFit, ScanAxis, SpectrumTable,
                                _lorentz, eit_metrics, fit_lorentzian, scan)

FIG2_EPSILON = 0.0033864681666436747   # 4 eps (1-eps) = 1.35% on resonance
FIG3_EPSILON = 0.0015022567754193195   # undressed extinction 0.6%
FIG3_CONTROL_RABI_HZ = 3506125.605617134


def fig2_scheme():
    return two_level_scheme(rabi=GAMMA / 100, detuning=0.0)


def fig3_scheme():
    return lambda_scheme(probe_rabi=math.sqrt(0.002) * GAMMA,
                         control_rabi=TWO_PI * FIG3_CONTROL_RABI_HZ,
                         lw_probe=TWO_PI * 20e3, lw_control=TWO_PI * 80e3)


class TestScanAxis:
    def test_validation(self):
        with pytest.raises(ValidationError):
            ScanAxis("probe_detuning", 1.0, 0.0, 10)
        with pytest.raises(ValidationError):
            ScanAxis("probe_detuning", 0.0, 1.0, 1)
        with pytest.raises(ValidationError):
            ScanAxis("nonsense", 0.0, 1.0, 10)

    def test_uniform_grid(self):
        axis = ScanAxis("probe_detuning", -1e6, 1e6, 5)
        assert np.allclose(np.diff(axis.values()), 0.5e6)


class TestScanEngines:
    def test_fig2_analytic_lineshape(self):
        table = scan(fig2_scheme(), ScanAxis("probe_detuning", -30e6, 30e6, 201),
                     CouplingGeometry(FIG2_EPSILON), "analytic")
        fit = fit_lorentzian(table, "extinction")
        assert fit.fwhm == pytest.approx(11e6, rel=1e-6)
        assert fit.depth == pytest.approx(0.0135, rel=1e-6)

    def test_engines_agree_two_level(self):
        axis = ScanAxis("probe_detuning", -30e6, 30e6, 101)
        geo = CouplingGeometry(FIG2_EPSILON)
        a = scan(fig2_scheme(), axis, geo, "analytic")
        n = scan(fig2_scheme(), axis, geo, "numeric")
        diff = np.max(np.abs(a.columns["extinction"] - n.columns["extinction"]))
        assert diff <= 0.01 * n.columns["extinction"].max()

    def test_engines_agree_lambda(self):
        axis = ScanAxis("two_photon_detuning", -4e6, 4e6, 101)
        geo = CouplingGeometry(FIG3_EPSILON)
        a = scan(fig3_scheme(), axis, geo, "analytic")
        n = scan(fig3_scheme(), axis, geo, "numeric")
        diff = np.max(np.abs(a.columns["extinction"] - n.columns["extinction"]))
        assert diff <= 0.01 * n.columns["extinction"].max()

    def test_analytic_rejected_for_barium(self):
        with pytest.raises(ValidationError):
            scan(barium_scheme(), ScanAxis("control_detuning", -60e6, -40e6, 11),
                 CouplingGeometry(0.01), "analytic")

    def test_scan_error_names_axis_value(self):
        # disconnect the metastable level so the steady state degenerates
        import dataclasses
        scheme = lambda_scheme(control_rabi=0.0)
        decays = tuple(ch for ch in scheme.decays if ch.lower != "m")
        bad = dataclasses.replace(scheme, decays=decays, dephasing=())
        axis = ScanAxis("probe_detuning", -1e6, 1e6, 3)
        with pytest.raises(ScanError, match=r"probe_detuning=-1e\+06"):
            scan(bad, axis, CouplingGeometry(0.01), "numeric")

    def test_control_rabi_axis(self):
        scheme = fig3_scheme()
        table = scan(scheme, ScanAxis("control_rabi", 0.5e6, 4e6, 8),
                     CouplingGeometry(FIG3_EPSILON), "numeric")
        # stronger control opens a deeper transparency window at delta = 0
        assert np.all(np.diff(table.columns["transmission"]) > 0)

    def test_bfield_axis(self):
        table = scan(barium_scheme(), ScanAxis("bfield", 1e-4, 5e-4, 3),
                     CouplingGeometry(0.01), "numeric")
        assert np.all(np.isfinite(table.columns["fluorescence_rel"]))

    def test_dark_state_consistency(self):
        # fluorescence minimum and transmission maximum on the same grid point
        table = scan(fig3_scheme(), ScanAxis("two_photon_detuning", -6e6, 6e6, 241),
                     CouplingGeometry(FIG3_EPSILON), "numeric")
        assert (int(np.argmin(table.columns["fluorescence_rel"]))
                == int(np.argmax(table.columns["transmission"])))

    def test_rows_finite_and_complete(self):
        axis = ScanAxis("probe_detuning", -10e6, 10e6, 17)
        table = scan(fig2_scheme(), axis, CouplingGeometry(FIG2_EPSILON), "numeric")
        assert len(table.axis) == 17
        for name, col in table.columns.items():
            assert len(col) == 17, name
            assert np.all(np.isfinite(col)), name

    def test_dark_resonance_positions_match_zeeman_arithmetic(self):
        # each dip sits at the Raman condition delta_g - delta_r = z_D - z_S
        # of one sigma-only S-D pair: (g_D m_D - g_S m_S) * mu_B B / h from
        # the green detuning
        from ionscatter.atoms import MU_B_OVER_HBAR

        bfield, det_g = 3.5e-4, -50e6
        scheme = barium_scheme(bfield=bfield, det_g_hz=det_g)
        u_hz = MU_B_OVER_HBAR * bfield / (2 * math.pi)
        pairs = ((-0.5, -0.5), (-0.5, 1.5), (0.5, 0.5), (0.5, -1.5))
        predicted = sorted(det_g - (0.8 * md - 2.0 * ms) * u_hz for ms, md in pairs)
        table = scan(scheme, ScanAxis("control_detuning", -70e6, -30e6, 401),
                     CouplingGeometry.from_na(0.4), "numeric")
        fl = table.columns["fluorescence_rel"]
        minima = sorted(table.axis[i] for i in range(1, len(fl) - 1)
                        if fl[i] < fl[i - 1] and fl[i] < fl[i + 1])
        assert len(minima) == 4
        for found, want in zip(minima, predicted):
            assert abs(found - want) < 0.5e6, (found, want)


class TestCSV:
    def test_deterministic_output(self):
        axis = ScanAxis("probe_detuning", -10e6, 10e6, 21)
        geo = CouplingGeometry(FIG2_EPSILON)
        a = scan(fig2_scheme(), axis, geo, "numeric").to_csv_text()
        b = scan(fig2_scheme(), axis, geo, "numeric").to_csv_text()
        assert a == b

    def test_format(self, tmp_path):
        axis = ScanAxis("probe_detuning", -1e6, 1e6, 9)
        table = scan(fig2_scheme(), axis, CouplingGeometry(FIG2_EPSILON), "analytic")
        path = tmp_path / "out.csv"
        table.to_csv(path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0].startswith("detuning_hz,transmission,extinction,phase_rad,"
                                   "fluorescence_rel")
        assert len(lines) == 10


class TestLorentzianFit:
    def test_recovers_own_model(self):
        x = np.linspace(-5, 7, 120)
        y = _lorentz(x, center=1.0, fwhm=2.0, depth=0.5, baseline=1.0)
        table = SpectrumTable("probe_detuning", x, {"extinction": y})
        fit = fit_lorentzian(table, "extinction")
        assert fit.center == pytest.approx(1.0, abs=1e-8)
        assert fit.fwhm == pytest.approx(2.0, abs=1e-8)
        assert fit.depth == pytest.approx(0.5, abs=1e-8)
        assert fit.baseline == pytest.approx(1.0, abs=1e-8)

    def test_symmetric_center(self):
        table = scan(fig2_scheme(), ScanAxis("probe_detuning", -20e6, 20e6, 81),
                     CouplingGeometry(FIG2_EPSILON), "analytic")
        fit = fit_lorentzian(table, "extinction")
        assert abs(fit.center) < 1e-9 * 20e6

    def test_grid_refinement_stability(self):
        geo = CouplingGeometry(FIG2_EPSILON)
        fits = []
        for points in (101, 201):
            table = scan(fig2_scheme(), ScanAxis("probe_detuning", -30e6, 30e6, points),
                         geo, "analytic")
            fits.append(fit_lorentzian(table, "extinction").fwhm)
        assert abs(fits[1] - fits[0]) < 0.005 * fits[0]

    def test_multi_peak_rejected(self):
        x = np.linspace(-10, 10, 101)
        y = (_lorentz(x, -4.0, 1.0, 1.0, 0.0) + _lorentz(x, 4.0, 1.0, 0.8, 0.0))
        table = SpectrumTable("probe_detuning", x, {"extinction": y})
        with pytest.raises(AmbiguousPeakError):
            fit_lorentzian(table, "extinction")

    def test_too_few_points(self):
        x = np.linspace(-1, 1, 6)
        table = SpectrumTable("probe_detuning", x, {"extinction": x * 0.0})
        with pytest.raises(ValidationError):
            fit_lorentzian(table, "extinction")

    def test_dip_has_negative_depth(self):
        x = np.linspace(-6, 6, 120)
        y = _lorentz(x, 0.0, 1.5, -0.7, 2.0)
        table = SpectrumTable("probe_detuning", x, {"extinction": y})
        fit = fit_lorentzian(table, "extinction")
        assert fit.depth == pytest.approx(-0.7, abs=1e-8)


class TestEITMetrics:
    def _reference(self, scheme, geometry):
        gamma_eff = scheme.coherence_rate("g", "e")
        return transmission(geometry.epsilon,
                            two_level_response(0.0, gamma_eff)).extinction

    def test_ideal_lambda_full_suppression(self):
        scheme = lambda_scheme(probe_rabi=GAMMA / 100, control_rabi=GAMMA / 3)
        geo = CouplingGeometry(FIG3_EPSILON)
        table = scan(scheme, ScanAxis("two_photon_detuning", -3e6, 3e6, 121),
                     geo, "numeric")
        _, suppression = eit_metrics(table, self._reference(scheme, geo))
        assert suppression == pytest.approx(1.0, abs=1e-3)

    def test_half_suppression_at_matched_dephasing(self):
        # gamma0 = omega_r^2 / gamma makes L(0) = 1/2
        omega_r = GAMMA / 6
        gamma0 = omega_r ** 2 / GAMMA
        scheme = lambda_scheme(probe_rabi=GAMMA / 100, control_rabi=2 * omega_r,
                               gamma0=gamma0)
        geo = CouplingGeometry(FIG3_EPSILON)
        table = scan(scheme, ScanAxis("two_photon_detuning", -3e6, 3e6, 121),
                     geo, "numeric")
        _, suppression = eit_metrics(table, self._reference(scheme, geo))
        assert suppression == pytest.approx(0.5, abs=0.01)

    def test_window_grows_with_control(self):
        geo = CouplingGeometry(FIG3_EPSILON)
        widths = []
        for rabi_mhz in (1.0, 1.5, 2.0, 3.0):
            scheme = lambda_scheme(probe_rabi=GAMMA / 100,
                                   control_rabi=TWO_PI * rabi_mhz * 1e6)
            span = 4e6 * max(1.0, rabi_mhz)
            table = scan(scheme, ScanAxis("two_photon_detuning", -span, span, 161),
                         geo, "numeric")
            window, _ = eit_metrics(table, self._reference(scheme, geo))
            widths.append(window)
        assert all(b > a for a, b in zip(widths, widths[1:]))

    def test_requires_two_photon_axis(self):
        table = scan(fig2_scheme(), ScanAxis("probe_detuning", -1e6, 1e6, 11),
                     CouplingGeometry(FIG2_EPSILON), "analytic")
        with pytest.raises(ValidationError):
            eit_metrics(table, 0.01)

    def test_rejects_nonpositive_reference(self):
        table = scan(fig3_scheme(), ScanAxis("two_photon_detuning", -1e6, 1e6, 11),
                     CouplingGeometry(FIG3_EPSILON), "numeric")
        with pytest.raises(ValidationError):
            eit_metrics(table, 0.0)
