"""Atomic level schemes and the classical laser fields that drive them.

Three systems are supported:

* a generic two-level atom (ground ``g``, excited ``e``),
* a three-level Lambda system (``g``, ``e``, ``m`` with the probe on ``g-e``
  and the control on ``m-e``),
* the eight Zeeman sublevels of the 138Ba+ S1/2, P1/2 and D3/2 manifolds in
  a weak magnetic field, driven by a "green" (S-P, 493 nm class) and a
  "red" (D-P, 650 nm class) laser.

Rate conventions
----------------
``gamma`` always denotes an amplitude (coherence) decay rate in rad/s; the
population decay rate of an excited level is ``Gamma = 2 * gamma``.  A
resonance whose transmission dip has a full width of 11 MHz therefore has
``Gamma = 2*pi*11e6`` and ``gamma = 2*pi*5.5e6``.  Laser ``linewidth`` is
the FWHM of the field's Lorentzian spectrum, also in rad/s.

Raman (two-photon) dephasing between the two lower Lambda states is modeled
as the *quadrature* sum of the two laser linewidths: the minimum
transparency-window FWHM equals sqrt(lw_probe^2 + lw_control^2), i.e. the
ground-state coherence decays at half that combined width.  Uncorrelated
magnetic noise and residual ion motion enter the same knob additively.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import scipy.constants

from .errors import ValidationError

# Bohr magneton over hbar: Zeeman shift per tesla per (gJ * mJ), in rad/s.
MU_B_OVER_HBAR = scipy.constants.physical_constants["Bohr magneton"][0] / scipy.constants.hbar

# Literature defaults for 138Ba+ (configuration-overridable, not fitted here):
# P1/2 population decay rate, P->S branching fraction, Lande g-factors.
BA_P12_DECAY_POP = 2.0 * math.pi * 20.1e6
BA_BRANCHING_S = 0.73
BA_G_S12 = 2.0
BA_G_P12 = 2.0 / 3.0
BA_G_D32 = 4.0 / 5.0


class Manifold(enum.Enum):
    S12 = "S1/2"
    P12 = "P1/2"
    D32 = "D3/2"
    GENERIC_G = "g"
    GENERIC_E = "e"
    GENERIC_M = "m"

    @property
    def j(self) -> float | None:
        return {Manifold.S12: 0.5, Manifold.P12: 0.5, Manifold.D32: 1.5}.get(self)


class SchemeKind(enum.Enum):
    TWO_LEVEL = "two_level"
    LAMBDA3 = "lambda3"
    BARIUM8 = "barium8"


# Signed dipole coupling amplitudes <J_l m_l; 1 q | J_u m_u> for the two
# fine-structure lines of the Ba+ Lambda system (J_u = 1/2 in both cases).
# Keys are (2*m_lower, q); the squared amplitudes sum to 1 over the lower
# sublevels reached from any fixed upper sublevel.
_CG_S12_P12 = {
    (-1, 0): -math.sqrt(1 / 3), (-1, +1): -math.sqrt(2 / 3),
    (+1, -1): +math.sqrt(2 / 3), (+1, 0): +math.sqrt(1 / 3),
}
_CG_D32_P12 = {
    (-3, +1): +math.sqrt(1 / 2),
    (-1, 0): -math.sqrt(1 / 3), (-1, +1): +math.sqrt(1 / 6),
    (+1, -1): +math.sqrt(1 / 6), (+1, 0): -math.sqrt(1 / 3),
    (+3, -1): +math.sqrt(1 / 2),
}


def cg_amplitude(lower: Manifold, two_m_lower: int, q: int) -> float:
    """Signed Clebsch-Gordan amplitude for absorbing a photon of polarization q."""
    if lower is Manifold.S12:
        return _CG_S12_P12.get((two_m_lower, q), 0.0)
    if lower is Manifold.D32:
        return _CG_D32_P12.get((two_m_lower, q), 0.0)
    return 1.0  # generic levels carry unit coupling


@dataclass(frozen=True)
class Level:
    """One atomic basis state."""

    label: str
    manifold: Manifold
    mJ: float = 0.0
    gJ: float = 0.0
    zeeman_shift: float = 0.0  # rad/s, equals gJ * mJ * mu_B * B / hbar

    def __post_init__(self):
        j = self.manifold.j
        if j is not None and abs(self.mJ) > j + 1e-12:
            raise ValidationError(f"|mJ|={abs(self.mJ)} exceeds J={j} for {self.manifold.value}")


@dataclass(frozen=True)
class DecayChannel:
    """Spontaneous decay from one upper sublevel to one lower sublevel.

    ``rate`` is the population decay rate of this channel alone (rad/s);
    ``relative_amplitude`` keeps the signed Clebsch-Gordan weight.
    """

    upper: str
    lower: str
    rate: float
    relative_amplitude: float = 1.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValidationError(f"decay rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class Polarization:
    """Complex amplitudes on the sigma+/pi/sigma- spherical basis (unit norm)."""

    sigma_plus: complex = 0.0
    pi: complex = 1.0
    sigma_minus: complex = 0.0

    def __post_init__(self):
        norm = math.sqrt(abs(self.sigma_plus) ** 2 + abs(self.pi) ** 2
                         + abs(self.sigma_minus) ** 2)
        if norm == 0.0:
            raise ValidationError("polarization vector must be nonzero")
        object.__setattr__(self, "sigma_plus", complex(self.sigma_plus) / norm)
        object.__setattr__(self, "pi", complex(self.pi) / norm)
        object.__setattr__(self, "sigma_minus", complex(self.sigma_minus) / norm)

    def amplitude(self, q: int) -> complex:
        return {+1: self.sigma_plus, 0: self.pi, -1: self.sigma_minus}[q]

    @classmethod
    def from_weights(cls, w_plus: float = 0.0, w_pi: float = 0.0,
                     w_minus: float = 0.0) -> "Polarization":
        """Build from intensity weights (amplitudes are the square roots)."""
        if min(w_plus, w_pi, w_minus) < 0:
            raise ValidationError("polarization intensity weights must be >= 0")
        return cls(math.sqrt(w_plus), math.sqrt(w_pi), math.sqrt(w_minus))


SIGMA_PLUS = Polarization(sigma_plus=1.0, pi=0.0)
SIGMA_MINUS = Polarization(sigma_minus=1.0, pi=0.0)
PI = Polarization()


@dataclass(frozen=True)
class LaserField:
    """One classical driving field.

    ``rabi`` is the bare Rabi frequency: a link between sublevels is driven
    with matrix element ``rabi/2 * polarization_amplitude(q) * CG``.  For
    generic two/three-level schemes both factors are 1, so ``rabi`` is the
    Rabi frequency of the transition itself.  ``detuning`` is measured from
    the zero-field line center of the manifold pair the laser addresses
    (positive = blue).
    """

    name: str
    rabi: float
    detuning: float = 0.0
    polarization: Polarization = PI
    linewidth: float = 0.0
    links: tuple[tuple[str, str], ...] = ()   # (lower_label, upper_label) pairs
    line: str | None = None                   # "s-p" or "d-p" for barium8 lasers

    def __post_init__(self):
        if self.rabi < 0:
            raise ValidationError(f"laser {self.name!r}: rabi must be >= 0")
        if self.linewidth < 0:
            raise ValidationError(f"laser {self.name!r}: linewidth must be >= 0")


@dataclass(frozen=True)
class LevelScheme:
    """Immutable description of an atomic system plus its driving fields."""

    kind: SchemeKind
    levels: tuple[Level, ...]
    decays: tuple[DecayChannel, ...]
    lasers: tuple[LaserField, ...]
    bfield: float = 0.0
    dephasing: tuple[tuple[str, float], ...] = ()  # (level label, jump rate rad/s)
    meta: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        labels = [lv.label for lv in self.levels]
        if len(set(labels)) != len(labels):
            raise ValidationError("level labels must be unique")
        known = set(labels)
        for ch in self.decays:
            if ch.upper not in known or ch.lower not in known:
                raise ValidationError(f"decay channel references unknown level: {ch}")
        for name, rate in self.dephasing:
            if name not in known:
                raise ValidationError(f"dephasing entry references unknown level {name!r}")
            if rate < 0:
                raise ValidationError("dephasing rates must be >= 0")
        for laser in self.lasers:
            for lo, up in laser.links:
                if lo not in known or up not in known:
                    raise ValidationError(f"laser {laser.name!r} links unknown levels {lo}-{up}")

    # -- lookups ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.levels)

    def index(self, label: str) -> int:
        for i, lv in enumerate(self.levels):
            if lv.label == label:
                return i
        raise KeyError(label)

    def level(self, label: str) -> Level:
        return self.levels[self.index(label)]

    def laser(self, name: str) -> LaserField:
        for laser in self.lasers:
            if laser.name == name:
                return laser
        raise KeyError(name)

    def excited_labels(self) -> tuple[str, ...]:
        seen: list[str] = []
        for ch in self.decays:
            if ch.upper not in seen:
                seen.append(ch.upper)
        return tuple(seen)

    def total_decay_rate(self, label: str) -> float:
        return sum(ch.rate for ch in self.decays if ch.upper == label)

    def dephasing_rate(self, label: str) -> float:
        return sum(rate for name, rate in self.dephasing if name == label)

    def coherence_rate(self, lower: str, upper: str) -> float:
        """Decay rate of the lower-upper coherence (rad/s)."""
        out = self.total_decay_rate(upper) + self.total_decay_rate(lower)
        deph = self.dephasing_rate(upper) + self.dephasing_rate(lower)
        return 0.5 * (out + deph)

    def slowest_rate(self) -> float:
        """Smallest nonzero relaxation rate in the scheme; sets the settling time."""
        rates = [ch.rate for ch in self.decays if ch.rate > 0]
        rates += [rate for _, rate in self.dephasing if rate > 0]
        if not rates:
            raise ValidationError("scheme has no relaxation channel")
        return min(rates)

    def probe_laser(self) -> LaserField:
        """The laser treated as the probe: named 'probe', else the S-P/'g-e' field."""
        for name in ("probe",):
            try:
                return self.laser(name)
            except KeyError:
                pass
        for laser in self.lasers:
            if laser.line == "s-p" or any(lo == "g" for lo, _ in laser.links):
                return laser
        raise ValidationError("scheme has no identifiable probe laser")

    def control_laser(self) -> LaserField:
        """The laser treated as the control/repumper: 'control', else the D-P field."""
        for name in ("control", "red"):
            try:
                return self.laser(name)
            except KeyError:
                pass
        for laser in self.lasers:
            if laser.line == "d-p" or any(lo == "m" for lo, _ in laser.links):
                return laser
        raise ValidationError("scheme has no identifiable control laser")

    # -- rebuilding ------------------------------------------------------

    def with_laser(self, name: str, **changes) -> "LevelScheme":
        """Copy of the scheme with fields of one laser replaced."""
        found = False
        lasers = []
        for laser in self.lasers:
            if laser.name == name:
                laser = dataclasses.replace(laser, **changes)
                found = True
            lasers.append(laser)
        if not found:
            raise KeyError(name)
        return dataclasses.replace(self, lasers=tuple(lasers))

    def with_bfield(self, bfield: float) -> "LevelScheme":
        """Copy of the scheme with Zeeman shifts recomputed for a new field."""
        levels = tuple(
            dataclasses.replace(lv, zeeman_shift=lv.gJ * lv.mJ * MU_B_OVER_HBAR * bfield)
            for lv in self.levels)
        return dataclasses.replace(self, levels=levels, bfield=bfield)


# ---------------------------------------------------------------------------
# helpers

def saturation_parameter(omega: float, gamma: float, delta: float) -> float:
    """Saturation parameter Omega^2 / (gamma^2 + Delta^2) of one transition."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    return omega ** 2 / (gamma ** 2 + delta ** 2)


def rabi_for_saturation(s: float, gamma: float, delta: float) -> float:
    """Rabi frequency giving saturation parameter ``s`` at detuning ``delta``."""
    if s < 0:
        raise ValidationError(f"saturation must be >= 0, got {s}")
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    return math.sqrt(s * (gamma ** 2 + delta ** 2))


def quadrature_linewidth(*linewidths: float) -> float:
    """Combined linewidth of uncorrelated fields (quadrature sum of FWHMs)."""
    return math.sqrt(sum(lw ** 2 for lw in linewidths))


def raman_dephasing(lw_probe: float, lw_control: float, extra: float = 0.0) -> float:
    """Ground-state coherence decay rate of a Raman pair (rad/s).

    Half the quadrature-combined laser linewidth, plus any additive
    contribution (magnetic noise, residual ion motion).
    """
    return 0.5 * quadrature_linewidth(lw_probe, lw_control) + extra


# ---------------------------------------------------------------------------
# builders

def build_two_level(gamma: float, laser: LaserField) -> LevelScheme:
    """Two-level atom with amplitude decay rate ``gamma`` (population 2*gamma)."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    laser = dataclasses.replace(laser, links=(("g", "e"),))
    levels = (Level("g", Manifold.GENERIC_G), Level("e", Manifold.GENERIC_E))
    decays = (DecayChannel("e", "g", 2.0 * gamma),)
    dephasing = (("e", laser.linewidth),) if laser.linewidth > 0 else ()
    return LevelScheme(SchemeKind.TWO_LEVEL, levels, decays, (laser,),
                       dephasing=dephasing)


def build_lambda3(gamma_g: float, gamma_r: float, gamma0: float,
                  probe: LaserField, control: LaserField) -> LevelScheme:
    """Lambda system: probe on g-e, control on m-e.

    ``gamma_g``/``gamma_r`` are the *population* rates of the e->g and e->m
    decay channels; the optical coherence then decays at
    gamma = (gamma_g + gamma_r)/2.  The total ground-state (g-m) dephasing is
    ``gamma0`` plus the quadrature-combined laser-linewidth contribution from
    :func:`raman_dephasing`.
    """
    for val, name in ((gamma_g, "gamma_g"), (gamma_r, "gamma_r"), (gamma0, "gamma0")):
        if val < 0:
            raise ValidationError(f"{name} must be >= 0, got {val}")
    if gamma_g + gamma_r <= 0:
        raise ValidationError("at least one decay channel must have a positive rate")
    probe_links = probe.links or (("g", "e"),)
    control_links = control.links or (("m", "e"),)
    if set(probe_links) & set(control_links):
        raise ValidationError("probe and control are assigned to the same leg")
    if probe_links != (("g", "e"),) or control_links != (("m", "e"),):
        raise ValidationError("lambda3 expects probe on g-e and control on m-e")
    probe = dataclasses.replace(probe, links=probe_links)
    control = dataclasses.replace(control, links=control_links)

    levels = (Level("g", Manifold.GENERIC_G), Level("e", Manifold.GENERIC_E),
              Level("m", Manifold.GENERIC_M))
    decays = (DecayChannel("e", "g", gamma_g), DecayChannel("e", "m", gamma_r))
    gamma0_total = raman_dephasing(probe.linewidth, control.linewidth, extra=gamma0)
    dephasing = []
    if probe.linewidth > 0:
        dephasing.append(("e", probe.linewidth))
    if gamma0_total > 0:
        dephasing.append(("m", 2.0 * gamma0_total))
    return LevelScheme(SchemeKind.LAMBDA3, levels, decays, (probe, control),
                       dephasing=tuple(dephasing))


@dataclass(frozen=True)
class BariumRates:
    """Decay and Zeeman constants for the eight-level Ba+ scheme.

    Defaults are literature values (P1/2 lifetime and branching, Lande
    factors), not quantities extracted from any measurement made here.
    """

    gamma_pop_total: float = BA_P12_DECAY_POP  # P1/2 population decay, rad/s
    branching_s: float = BA_BRANCHING_S        # fraction of decays going P -> S
    g_s12: float = BA_G_S12
    g_p12: float = BA_G_P12
    g_d32: float = BA_G_D32
    motional_dephasing: float = 0.0            # additive S-D dephasing, rad/s

    def __post_init__(self):
        if self.gamma_pop_total <= 0:
            raise ValidationError("gamma_pop_total must be > 0")
        if not 0.0 < self.branching_s < 1.0:
            raise ValidationError("branching_s must lie in (0, 1)")
        if self.motional_dephasing < 0:
            raise ValidationError("motional_dephasing must be >= 0")


def _ba_label(manifold: Manifold, two_m: int) -> str:
    sign = "+" if two_m > 0 else "-"
    return f"{manifold.value[0]}{sign}{abs(two_m)}/2"


def build_barium8(bfield: float, lasers: list[LaserField] | tuple[LaserField, ...],
                  rates: BariumRates = BariumRates()) -> LevelScheme:
    """Eight-level 138Ba+ scheme: 2 S1/2 + 2 P1/2 + 4 D3/2 Zeeman sublevels.

    Each laser must declare ``line`` as ``"s-p"`` (493 nm class) or ``"d-p"``
    (650 nm class); its links are resolved from the polarization content and
    the dipole selection rules.  Decay channels from each P1/2 sublevel are
    weighted by the squared Clebsch-Gordan amplitudes, with the P->S versus
    P->D split taken from ``rates.branching_s``.
    """
    manifolds = ((Manifold.S12, rates.g_s12, (-1, 1)),
                 (Manifold.P12, rates.g_p12, (-1, 1)),
                 (Manifold.D32, rates.g_d32, (-3, -1, 1, 3)))
    levels = []
    for manifold, gj, two_ms in manifolds:
        for two_m in two_ms:
            mj = two_m / 2.0
            levels.append(Level(_ba_label(manifold, two_m), manifold, mj, gj,
                                gj * mj * MU_B_OVER_HBAR * bfield))
    by_label = {lv.label: lv for lv in levels}

    line_rate = {Manifold.S12: rates.branching_s * rates.gamma_pop_total,
                 Manifold.D32: (1.0 - rates.branching_s) * rates.gamma_pop_total}
    decays = []
    for upper in levels:
        if upper.manifold is not Manifold.P12:
            continue
        for lower in levels:
            if lower.manifold is Manifold.P12:
                continue
            q = round(upper.mJ - lower.mJ)
            if abs(q) > 1:
                continue
            amp = cg_amplitude(lower.manifold, round(2 * lower.mJ), q)
            if amp == 0.0:
                continue
            decays.append(DecayChannel(upper.label, lower.label,
                                       line_rate[lower.manifold] * amp ** 2, amp))

    lower_of = {"s-p": Manifold.S12, "d-p": Manifold.D32}
    resolved = []
    linewidth = {"s-p": [], "d-p": []}
    for laser in lasers:
        if laser.line not in lower_of:
            raise ValidationError(
                f"laser {laser.name!r} must set line='s-p' or 'd-p' for the barium8 scheme")
        if laser.links:
            for lo, up in laser.links:
                q = round(by_label[up].mJ - by_label[lo].mJ)
                if abs(q) > 1 or abs(laser.polarization.amplitude(q)) == 0.0:
                    raise ValidationError(
                        f"laser {laser.name!r} link {lo}-{up} violates the Delta-mJ "
                        "selection rule for its polarization")
            links = laser.links
        else:
            links = []
            for lower in levels:
                if lower.manifold is not lower_of[laser.line]:
                    continue
                for q in (-1, 0, 1):
                    if abs(laser.polarization.amplitude(q)) == 0.0:
                        continue
                    two_mu = round(2 * lower.mJ) + 2 * q
                    if abs(two_mu) != 1:
                        continue
                    if cg_amplitude(lower.manifold, round(2 * lower.mJ), q) == 0.0:
                        continue
                    links.append((lower.label, _ba_label(Manifold.P12, two_mu)))
            links = tuple(links)
        if not links:
            raise ValidationError(f"laser {laser.name!r} drives no allowed transition")
        resolved.append(dataclasses.replace(laser, links=links))
        linewidth[laser.line].append(laser.linewidth)

    # Laser phase noise dephases the frames it rotates: P follows the green
    # laser, D follows green and red combined (quadrature rule), and residual
    # motion adds to the S-D Raman coherence.
    lw_sp = quadrature_linewidth(*linewidth["s-p"]) if linewidth["s-p"] else 0.0
    lw_dp = quadrature_linewidth(*linewidth["d-p"]) if linewidth["d-p"] else 0.0
    x_p = lw_sp
    x_d = quadrature_linewidth(lw_sp, lw_dp) + 2.0 * rates.motional_dephasing
    dephasing = []
    for lv in levels:
        if lv.manifold is Manifold.P12 and x_p > 0:
            dephasing.append((lv.label, x_p))
        elif lv.manifold is Manifold.D32 and x_d > 0:
            dephasing.append((lv.label, x_d))

    return LevelScheme(SchemeKind.BARIUM8, tuple(levels), tuple(decays),
                       tuple(resolved), bfield=bfield, dephasing=tuple(dephasing))
