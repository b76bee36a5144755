"""Input-output transmission, closed-form responses and their numeric oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GAMMA, TWO_PI, barium_scheme, lambda_scheme, two_level_scheme
from ionscatter.atoms import LaserField
from ionscatter.dynamics import build_liouvillian, evolve, ground_state, steady_state
from ionscatter.errors import SimulationError, ValidationError, WeakProbeWarning
from ionscatter.scattering import (CouplingGeometry, epsilon_from_na,
                                   fluorescence_rate, lambda_response,
                                   response_from_steady_state, transmission,
                                   two_level_response)


class TestEpsilonFromNA:
    def test_paper_aperture(self):
        # NA = 0.4 covers about 4% of the solid angle
        assert epsilon_from_na(0.4) == pytest.approx(0.0417, abs=2e-4)

    def test_hemisphere(self):
        assert epsilon_from_na(1.0) == pytest.approx(0.5)

    def test_na_07(self):
        assert epsilon_from_na(0.7) == pytest.approx(0.5 * (1 - math.sqrt(0.51)))

    def test_range_validation(self):
        for bad in (0.0, -0.1, 1.0001):
            with pytest.raises(ValidationError):
                epsilon_from_na(bad)


class TestTwoLevelResponse:
    def test_resonance(self):
        assert two_level_response(0.0, GAMMA) == pytest.approx(1.0)

    def test_hwhm_point(self):
        val = two_level_response(GAMMA, GAMMA)
        assert val == pytest.approx(1 / (1 + 1j))
        assert abs(val) ** 2 == pytest.approx(0.5)

    def test_parity(self):
        for delta in (0.3 * GAMMA, 3 * GAMMA):
            plus, minus = two_level_response(delta, GAMMA), two_level_response(-delta, GAMMA)
            assert plus.real == pytest.approx(minus.real)
            assert plus.imag == pytest.approx(-minus.imag)
            assert abs(plus) == pytest.approx(abs(minus))

    def test_invalid_gamma(self):
        with pytest.raises(ValidationError):
            two_level_response(0.0, 0.0)


class TestLambdaResponse:
    def test_dark_point(self):
        assert lambda_response(0.0, 0.0, GAMMA / 3, GAMMA, 0.0) == 0.0

    def test_control_off_reduction(self):
        for delta2 in (0.3 * GAMMA, -GAMMA):
            for delta_g in (0.0, 0.7 * GAMMA):
                lam = lambda_response(delta2, delta_g, 0.0, GAMMA, 0.0)
                two = two_level_response(delta_g, GAMMA)
                assert abs(lam - two) < 1e-12

    def test_window_hwhm_matches_omega_sq_over_gamma(self):
        # brute-force scan of |1 - 2 eps L|^2: the transparency dip in the
        # extinction reaches half contrast at |delta| = omega^2/gamma
        eps = 0.0418
        for omega in (GAMMA / 10, GAMMA / 5, GAMMA / 3):
            expected = omega ** 2 / GAMMA
            deltas = np.linspace(-8 * expected, 8 * expected, 4001)
            ext = np.array([1 - abs(1 - 2 * eps * lambda_response(d, 0.0, omega, GAMMA, 0.0)) ** 2
                            for d in deltas])
            half_contrast = 0.5 * (ext.max() + ext.min())
            inside = deltas[ext <= half_contrast]
            hwhm = 0.5 * (inside.max() - inside.min())
            assert hwhm == pytest.approx(expected, rel=0.15)

    def test_singularity_error(self):
        with pytest.raises(SimulationError):
            lambda_response(0.0, 0.0, 0.0, GAMMA, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(gamma=st.floats(0.1, 10.0), gamma0=st.floats(0.0, 2.0),
           omega=st.floats(0.0, 5.0), delta_g=st.floats(-20.0, 20.0),
           delta2=st.floats(-20.0, 20.0))
    def test_passivity(self, gamma, gamma0, omega, delta_g, delta2):
        # the dressed atom never amplifies the probe
        try:
            val = lambda_response(delta2, delta_g, omega, gamma, gamma0)
        except SimulationError:
            return
        assert abs(val) <= 1.0 + 1e-9
        assert abs(two_level_response(delta_g, gamma)) <= 1.0 + 1e-9

    def test_continuity_to_two_level(self):
        # max deviation over a delta grid shrinks monotonically as the
        # control is halved; the grid avoids delta = 0 where the (ever
        # narrower) dark point keeps unit depth for any nonzero control
        deltas = np.linspace(-2 * GAMMA, 2 * GAMMA, 100)
        prev = None
        for omega in (GAMMA / 4, GAMMA / 8, GAMMA / 16, GAMMA / 32):
            dev = max(abs(lambda_response(d, 0.0, omega, GAMMA, 0.0)
                          - two_level_response(0.0, GAMMA)) for d in deltas)
            if prev is not None:
                assert dev < prev
            prev = dev
        assert prev < 0.05


class TestTransmission:
    def test_full_reflection(self):
        tp = transmission(0.5, 1.0)
        assert tp.transmission == 0.0
        assert tp.extinction == 1.0

    def test_na04_extinction(self):
        tp = transmission(epsilon_from_na(0.4), 1.0)
        assert tp.extinction == pytest.approx(0.16, abs=0.005)

    def test_na07_extinction(self):
        tp = transmission(epsilon_from_na(0.7), 1.0)
        assert 0.48 <= tp.extinction <= 0.52

    def test_no_coupling(self):
        tp = transmission(0.0, 1.0)
        assert tp.transmission == 1.0
        assert tp.phase_shift == 0.0

    def test_epsilon_validation(self):
        with pytest.raises(ValidationError):
            transmission(0.6, 1.0)

    def test_extinction_complements_transmission(self):
        tp = transmission(0.3, 0.4 + 0.1j)
        assert tp.extinction == 1.0 - tp.transmission

    @settings(max_examples=200, deadline=None)
    @given(eps=st.floats(0.0, 0.5), re=st.floats(-1.0, 1.0), im=st.floats(-1.0, 1.0))
    def test_bounds_for_passive_response(self, eps, re, im):
        mag = math.hypot(re, im)
        if mag > 1.0:
            re, im = re / mag, im / mag
        tp = transmission(eps, complex(re, im))
        assert (1 - 2 * eps) ** 2 - 1e-12 <= tp.transmission <= (1 + 2 * eps) ** 2 + 1e-12

    def test_zero_only_at_half_epsilon_unit_response(self):
        assert transmission(0.5, 1.0).transmission == 0.0
        assert transmission(0.49, 1.0).transmission > 0.0
        assert transmission(0.5, 0.999).transmission > 0.0

    def test_phase_shift_is_dispersive(self):
        # small epsilon: arg(1 - 2 eps L) = -2 eps Im(L) to leading order,
        # odd in detuning and vanishing on resonance
        eps = 0.004
        assert transmission(eps, two_level_response(0.0, GAMMA)).phase_shift == 0.0
        plus = transmission(eps, two_level_response(GAMMA, GAMMA)).phase_shift
        minus = transmission(eps, two_level_response(-GAMMA, GAMMA)).phase_shift
        assert plus == pytest.approx(-minus)
        assert plus == pytest.approx(-2 * eps * two_level_response(GAMMA, GAMMA).imag,
                                     rel=0.02)


class TestResponseFromSteadyState:
    def test_two_level_oracle(self):
        omega = GAMMA / 50
        for delta in np.linspace(-5 * GAMMA, 5 * GAMMA, 21):
            scheme = two_level_scheme(rabi=omega, detuning=delta)
            rho = steady_state(build_liouvillian(scheme))
            got = response_from_steady_state(rho, scheme)
            want = two_level_response(delta, GAMMA)
            assert abs(got - want) <= 5e-3 * abs(want)

    def test_lambda_oracle(self):
        omega_c = GAMMA / 3
        for dhz in np.linspace(-3e6, 3e6, 21):
            delta2 = TWO_PI * dhz
            scheme = lambda_scheme(probe_rabi=GAMMA / 100, control_rabi=omega_c,
                                   probe_detuning=0.0, control_detuning=-delta2,
                                   gamma0=0.01 * GAMMA)
            rho = steady_state(build_liouvillian(scheme))
            got = response_from_steady_state(rho, scheme)
            want = lambda_response(delta2, 0.0, omega_c / 2, GAMMA, 0.01 * GAMMA)
            assert abs(got - want) <= 0.01

    def test_barium_pumped_dark(self):
        # repumper off: the green pumps everything into the D manifold and
        # the probe stops interacting.  10 us is dozens of optical-pumping
        # time constants at this saturation.
        scheme = barium_scheme(s_g=0.5, s_r=0.0, w_plus_green=0.5)
        liouv = build_liouvillian(scheme)
        rho = evolve(liouv, ground_state(scheme, "S-1/2"), 10e-6)
        d_pop = sum(rho[i, i].real for i, lv in enumerate(scheme.levels)
                    if lv.label.startswith("D"))
        assert d_pop > 0.999
        resp = response_from_steady_state(rho, scheme)
        assert abs(resp) < 1e-3
        tp = transmission(epsilon_from_na(0.4), resp)
        assert tp.transmission == pytest.approx(1.0, abs=1e-3)

    def test_weak_probe_warning(self):
        scheme = two_level_scheme(rabi=3 * GAMMA)
        rho = steady_state(build_liouvillian(scheme))
        with pytest.warns(WeakProbeWarning):
            response_from_steady_state(rho, scheme)

    def test_zero_probe_rejected(self):
        scheme = two_level_scheme(rabi=0.0)
        rho = steady_state(build_liouvillian(scheme))
        with pytest.raises(ValidationError):
            response_from_steady_state(rho, scheme)


class TestFluorescence:
    def test_ground_state_silent(self):
        scheme = two_level_scheme()
        assert fluorescence_rate(ground_state(scheme), scheme) == 0.0

    def test_dark_state_silent(self):
        scheme = lambda_scheme(probe_rabi=GAMMA / 50, control_rabi=GAMMA / 3)
        rho = steady_state(build_liouvillian(scheme))
        assert fluorescence_rate(rho, scheme) <= 1e-8 * 2 * GAMMA

    def test_scaling(self):
        scheme = two_level_scheme(rabi=GAMMA)
        rho = steady_state(build_liouvillian(scheme))
        base = fluorescence_rate(rho, scheme)
        assert base == pytest.approx(rho[1, 1].real * 2 * GAMMA)
        assert fluorescence_rate(rho, scheme, collection=0.25) == pytest.approx(base / 4)


def test_geometry_factories():
    geo = CouplingGeometry.from_na(0.4, mode_match=0.0811)
    assert geo.epsilon == pytest.approx(0.0811 * epsilon_from_na(0.4))
    geo2 = CouplingGeometry.from_epsilon(0.01, mode_match=0.5)
    assert geo2.epsilon == pytest.approx(0.005)
    with pytest.raises(ValidationError):
        CouplingGeometry(0.51)
