"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np
import pytest

from ionscatter.atoms import (BariumRates, LaserField, Polarization,
                              build_barium8, build_lambda3, build_two_level,
                              rabi_for_saturation)

TWO_PI = 2.0 * math.pi
GAMMA = TWO_PI * 5.5e6  # convenient reference coherence rate


def lindblad_rhs(h, jumps, rho):
    """Brute-force master-equation right-hand side, element by element.

    Independent of the vectorized superoperator construction; used as the
    oracle for the Liouvillian builder.
    """
    out = -1j * (h @ rho - rho @ h)
    for c in jumps:
        cdag = c.conj().T
        out += c @ rho @ cdag - 0.5 * (cdag @ c @ rho + rho @ cdag @ c)
    return out


def random_density(rng, n):
    """Random full-rank density matrix."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def two_level_scheme(rabi=GAMMA / 100, detuning=0.0, gamma=GAMMA, linewidth=0.0):
    return build_two_level(gamma, LaserField("probe", rabi=rabi, detuning=detuning,
                                             linewidth=linewidth))


def lambda_scheme(probe_rabi=GAMMA / 100, control_rabi=GAMMA / 3,
                  probe_detuning=0.0, control_detuning=0.0, gamma0=0.0,
                  gamma_g=GAMMA, gamma_m=GAMMA, lw_probe=0.0, lw_control=0.0):
    probe = LaserField("probe", rabi=probe_rabi, detuning=probe_detuning,
                       linewidth=lw_probe)
    control = LaserField("control", rabi=control_rabi, detuning=control_detuning,
                         linewidth=lw_control)
    return build_lambda3(gamma_g, gamma_m, gamma0, probe, control)


def barium_scheme(bfield=3.5e-4, det_g_hz=-50e6, det_r_hz=-35e6, s_g=0.1, s_r=0.8,
                  w_plus_green=0.92, w_plus_red=0.5, linewidth_hz=50e3,
                  rates=BariumRates()):
    """Paper-like eight-level configuration under the documented assumptions.

    Both beams propagate perpendicular to the quantization axis with no pi
    component; the green is slightly elliptical (sigma+ heavy) which pumps
    the population toward S(m=+1/2).
    """
    gamma = 0.5 * rates.gamma_pop_total
    pol_g = Polarization.from_weights(w_plus_green, 0.0, 1.0 - w_plus_green)
    pol_r = Polarization.from_weights(w_plus_red, 0.0, 1.0 - w_plus_red)

    def strongest(pol, weights):
        return max(abs(pol.amplitude(q)) * w for q, w in weights)

    w_sp = ((1, math.sqrt(2 / 3)), (0, math.sqrt(1 / 3)), (-1, math.sqrt(2 / 3)))
    w_dp = ((1, math.sqrt(1 / 2)), (0, math.sqrt(1 / 3)), (-1, math.sqrt(1 / 2)))
    green = LaserField(
        "green", rabi_for_saturation(s_g, gamma, TWO_PI * det_g_hz) / strongest(pol_g, w_sp),
        TWO_PI * det_g_hz, polarization=pol_g, linewidth=TWO_PI * linewidth_hz, line="s-p")
    red = LaserField(
        "red", rabi_for_saturation(s_r, gamma, TWO_PI * det_r_hz) / strongest(pol_r, w_dp),
        TWO_PI * det_r_hz, polarization=pol_r, linewidth=TWO_PI * linewidth_hz, line="d-p")
    return build_barium8(bfield, [green, red], rates)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
