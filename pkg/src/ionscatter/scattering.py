"""Probe transmission and fluorescence from the atomic response.

A weak beam focused onto a single dipole scatterer interferes with the
coherently scattered field.  With the input covering a fraction ``epsilon``
of the full solid angle, the transmitted power is

    T = |1 - 2 epsilon L|^2,

where ``L`` is the dimensionless atomic response, normalized to 1 for a
resonantly driven two-level atom:

    two-level:  L(Delta) = gamma / (gamma + i Delta)
    Lambda:     L(delta) = gamma (gamma0 + i delta)
                           / [ (gamma0 + i delta)(gamma + i Delta_g) + omega_r^2 ]

``gamma`` is the amplitude decay rate (half the population rate), ``Delta_g``
the probe detuning, ``delta = Delta_g - Delta_r`` the two-photon detuning,
``gamma0`` the ground-state dephasing rate and ``omega_r`` the control-field
coupling element (half its Rabi frequency).  Both signs of the ``i delta``
term appear in the literature depending on which Raman coherence is
eliminated; the form above is the one the optical Bloch equations produce in
this package's detuning convention (positive = blue), which matters only
through a mirror flip of the asymmetric wings at nonzero probe detuning.
An ideal hemispherical drive (epsilon = 1/2) reflects a resonant probe
completely.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .atoms import LaserField, LevelScheme
from .dynamics import link_weight
from .errors import SimulationError, ValidationError, WeakProbeWarning

WEAK_PROBE_POPULATION = 0.05  # excited population above which linearity degrades


def epsilon_from_na(na: float) -> float:
    """Solid-angle fraction of a cone with half-angle arcsin(NA)."""
    if not 0.0 < na <= 1.0:
        raise ValidationError(f"numerical aperture must lie in (0, 1], got {na}")
    return 0.5 * (1.0 - math.sqrt(1.0 - na * na))


@dataclass(frozen=True)
class CouplingGeometry:
    """Input-beam/dipole-mode coupling: effective solid-angle fraction."""

    epsilon: float
    numerical_aperture: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValidationError(f"epsilon must lie in [0, 0.5], got {self.epsilon}")

    @classmethod
    def from_na(cls, na: float, mode_match: float = 1.0) -> "CouplingGeometry":
        """Hard-aperture cone fraction, scaled by an overlap factor in [0, 1]."""
        if not 0.0 <= mode_match <= 1.0:
            raise ValidationError(f"mode_match must lie in [0, 1], got {mode_match}")
        return cls(mode_match * epsilon_from_na(na), numerical_aperture=na)

    @classmethod
    def from_epsilon(cls, epsilon: float, mode_match: float = 1.0) -> "CouplingGeometry":
        if not 0.0 <= mode_match <= 1.0:
            raise ValidationError(f"mode_match must lie in [0, 1], got {mode_match}")
        return cls(mode_match * epsilon)


def two_level_response(delta: float, gamma: float) -> complex:
    """Lorentzian response gamma / (gamma + i delta); L(0) = 1."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    return gamma / (gamma + 1j * delta)


def lambda_response(delta2: float, delta_g: float, omega_r: float,
                    gamma: float, gamma0: float) -> complex:
    """Dressed Lambda-system response as a function of two-photon detuning.

    ``omega_r`` is the control coupling element: a control field of Rabi
    frequency Omega drives its link with matrix element Omega/2, so pass
    ``rabi / 2`` when starting from a :class:`~ionscatter.atoms.LaserField`.
    The transparency window has half-width ``gamma0 + omega_r**2 / gamma``
    in ``delta2``.
    """
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    if omega_r < 0 or gamma0 < 0:
        raise ValidationError("omega_r and gamma0 must be >= 0")
    num = gamma * (gamma0 + 1j * delta2)
    den = (gamma0 + 1j * delta2) * (gamma + 1j * delta_g) + omega_r ** 2
    if abs(den) < 1e-30:
        raise SimulationError(f"lambda response denominator vanished at delta2={delta2}")
    return num / den


@dataclass(frozen=True)
class TransmissionPoint:
    transmission: float
    extinction: float
    phase_shift: float           # radians, arg(1 - 2 eps L)
    fluorescence_rate: float = 0.0

    def __post_init__(self):
        if self.transmission < 0:
            raise ValidationError("transmission cannot be negative")


def transmission(epsilon: float, response: complex) -> TransmissionPoint:
    """Interferometric transmission T = |1 - 2 epsilon L|^2 and its phase."""
    if not 0.0 <= epsilon <= 0.5:
        raise ValidationError(f"epsilon must lie in [0, 0.5], got {epsilon}")
    field = 1.0 - 2.0 * epsilon * complex(response)
    t = abs(field) ** 2
    return TransmissionPoint(t, 1.0 - t, cmath.phase(field))


def response_from_steady_state(rho: np.ndarray, scheme: LevelScheme,
                               probe: LaserField | None = None) -> complex:
    """Numeric response from the steady-state coherences on the probe links.

        L = (2 gamma / (i Omega_p)) * sum_links w_link * <lower| rho |upper>

    with ``gamma`` the coherence decay rate of the probed transition.  For a
    weakly driven two-level atom this reduces exactly to the closed form
    ``two_level_response``.  Emits :class:`WeakProbeWarning` when the excited
    population exceeds the linear-response regime.
    """
    probe = probe if probe is not None else scheme.probe_laser()
    if probe.rabi == 0:
        raise ValidationError(f"probe laser {probe.name!r} has zero Rabi frequency")
    if not probe.links:
        raise ValidationError(f"probe laser {probe.name!r} drives no links")
    lo0, up0 = probe.links[0]
    gamma = scheme.coherence_rate(lo0, up0)
    total = 0.0 + 0.0j
    for lo, up in probe.links:
        w = link_weight(scheme, probe, lo, up)
        total += w * rho[scheme.index(lo), scheme.index(up)]
    excited = sum(rho[scheme.index(lb), scheme.index(lb)].real
                  for lb in scheme.excited_labels())
    if excited > WEAK_PROBE_POPULATION:
        warnings.warn(
            f"excited population {excited:.3f} exceeds the weak-probe regime "
            f"({WEAK_PROBE_POPULATION}); the linear input-output treatment degrades",
            WeakProbeWarning, stacklevel=2)
    return 2.0 * gamma / (1j * probe.rabi) * total


def fluorescence_rate(rho: np.ndarray, scheme: LevelScheme,
                      collection: float = 1.0) -> float:
    """Total scattering rate: excited populations times their decay rates."""
    rate = 0.0
    for label in scheme.excited_labels():
        i = scheme.index(label)
        rate += rho[i, i].real * scheme.total_decay_rate(label)
    return collection * rate
