"""Optical Bloch equations in Lindblad form: generator, steady state, evolution.

The master equation is

    drho/dt = -i [H, rho] + sum_k ( c_k rho c_k^dag - 1/2 {c_k^dag c_k, rho} )

with one jump operator per spontaneous-decay channel, sqrt(rate) |lower><upper|,
and one pure-dephasing jump sqrt(x_l) |l><l| per level carrying laser phase
noise or ground-state decoherence.  In the column-stacking convention
(vec(AXB) = kron(B.T, A) vec(X)) the generator reads

    L = -i (kron(I, H) - kron(H.T, I))
        + sum_k [ kron(conj(c_k), c_k)
                  - 1/2 kron(I, c_k^dag c_k) - 1/2 kron((c_k^dag c_k).T, I) ].

The rotating frame subtracts one laser frequency per driven link; the diagonal
of H is the level's Zeeman shift minus its accumulated frame detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .atoms import LaserField, LevelScheme, cg_amplitude
from .errors import (DegenerateKernelError, FrameError, SimulationError,
                     StiffnessError, ValidationError)

FRAME_MISMATCH_TOL = 1e-6   # rad/s; closed laser loops must agree to this
STEP_SAFETY = 0.05          # RK4 step <= STEP_SAFETY / ||L||
MIN_STEP = 1e-18            # s; below this the problem counts as stiff


def link_weight(scheme: LevelScheme, laser: LaserField, lower: str, upper: str) -> complex:
    """Dimensionless drive weight of one link: polarization amplitude x CG."""
    lo, up = scheme.level(lower), scheme.level(upper)
    if lo.manifold.j is None or up.manifold.j is None:
        return 1.0
    q = round(up.mJ - lo.mJ)
    if abs(q) > 1:
        raise ValidationError(f"link {lower}-{upper} has |Delta mJ| > 1")
    return laser.polarization.amplitude(q) * cg_amplitude(lo.manifold, round(2 * lo.mJ), q)


def frame_offsets(scheme: LevelScheme) -> np.ndarray:
    """Accumulated laser detuning carried by each level's rotating frame.

    Walks the laser-link graph from the lowest-index level of each connected
    component; every link imposes f_upper = f_lower + detuning.  Inconsistent
    closed loops (frequency mismatch above ``FRAME_MISMATCH_TOL``) have no
    rotating frame and raise :class:`FrameError`.
    """
    n = scheme.dim
    edges: list[tuple[int, int, float]] = []
    for laser in scheme.lasers:
        for lo, up in laser.links:
            edges.append((scheme.index(lo), scheme.index(up), laser.detuning))

    f = np.full(n, np.nan)
    for start in range(n):
        if not math.isnan(f[start]):
            continue
        f[start] = 0.0
        queue = [start]
        while queue:
            i = queue.pop(0)
            for lo, up, det in edges:
                for a, b, d in ((lo, up, det), (up, lo, -det)):
                    if a != i:
                        continue
                    target = f[i] + d
                    if math.isnan(f[b]):
                        f[b] = target
                        queue.append(b)
                    elif abs(f[b] - target) > FRAME_MISMATCH_TOL:
                        raise FrameError(
                            f"no consistent rotating frame: level {scheme.levels[b].label!r} "
                            f"would need offsets {f[b]:.6e} and {target:.6e} rad/s")
    return f


def build_hamiltonian(scheme: LevelScheme) -> np.ndarray:
    """Rotating-frame Hamiltonian (units of rad/s, hbar = 1)."""
    n = scheme.dim
    f = frame_offsets(scheme)
    h = np.zeros((n, n), dtype=complex)
    for i, lv in enumerate(scheme.levels):
        h[i, i] = lv.zeeman_shift - f[i]
    for laser in scheme.lasers:
        for lo, up in laser.links:
            w = link_weight(scheme, laser, lo, up)
            i, j = scheme.index(lo), scheme.index(up)
            h[i, j] += 0.5 * laser.rabi * w
            h[j, i] += 0.5 * laser.rabi * np.conjugate(w)
    return h


def jump_operators(scheme: LevelScheme) -> list[np.ndarray]:
    """One collapse operator per decay channel plus one per dephasing entry."""
    n = scheme.dim
    ops = []
    for ch in scheme.decays:
        if ch.rate == 0.0:
            continue
        c = np.zeros((n, n), dtype=complex)
        c[scheme.index(ch.lower), scheme.index(ch.upper)] = math.sqrt(ch.rate)
        ops.append(c)
    for label, rate in scheme.dephasing:
        if rate == 0.0:
            continue
        c = np.zeros((n, n), dtype=complex)
        i = scheme.index(label)
        c[i, i] = math.sqrt(rate)
        ops.append(c)
    return ops


@dataclass(frozen=True)
class Liouvillian:
    """Bloch-equation generator acting on column-vectorized density matrices."""

    scheme: LevelScheme
    generator: np.ndarray      # (n^2, n^2)
    hamiltonian: np.ndarray    # (n, n)
    jumps: tuple[np.ndarray, ...]
    norm_estimate: float       # spectral-norm estimate of the generator

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def _spectral_norm_estimate(m: np.ndarray, iterations: int = 30) -> float:
    """Deterministic power iteration on m^dag m (slightly inflated for safety)."""
    n = m.shape[0]
    v = np.ones(n, dtype=complex) / math.sqrt(n)
    mdag = m.conj().T
    sigma = 0.0
    for _ in range(iterations):
        w = mdag @ (m @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        sigma = math.sqrt(norm)
        v = w / norm
    return 1.1 * sigma


def build_liouvillian(scheme: LevelScheme) -> Liouvillian:
    h = build_hamiltonian(scheme)
    jumps = tuple(jump_operators(scheme))
    n = scheme.dim
    eye = np.eye(n)
    gen = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in jumps:
        cdc = c.conj().T @ c
        gen += np.kron(c.conj(), c)
        gen -= 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return Liouvillian(scheme, gen, h, jumps, _spectral_norm_estimate(gen))


# ---------------------------------------------------------------------------
# density-matrix utilities

def is_physical_density(rho: np.ndarray, herm_tol: float = 1e-10,
                        trace_tol: float = 1e-10, eig_floor: float = -1e-8) -> bool:
    if linalg.hermiticity_defect(rho) > herm_tol:
        return False
    if abs(np.trace(rho) - 1.0) > trace_tol:
        return False
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return bool(eigs.min() >= eig_floor)


def ground_state(scheme: LevelScheme, label: str | None = None) -> np.ndarray:
    """Density matrix with all population in one level (default: the first)."""
    n = scheme.dim
    i = scheme.index(label) if label is not None else 0
    rho = np.zeros((n, n), dtype=complex)
    rho[i, i] = 1.0
    return rho


def maximally_mixed(scheme: LevelScheme) -> np.ndarray:
    n = scheme.dim
    return np.eye(n, dtype=complex) / n


# ---------------------------------------------------------------------------
# steady state and time evolution

def steady_state(liouvillian: Liouvillian) -> np.ndarray:
    """Unique trace-one kernel vector of the generator.

    Solves the generator with one row replaced by the trace condition; if
    that system is singular, falls back to SVD kernel extraction (which
    raises :class:`DegenerateKernelError` when the kernel is not
    one-dimensional).
    """
    gen = liouvillian.generator
    n = liouvillian.dim
    trace_row = linalg.vec(np.eye(n, dtype=complex)).conj()

    rho = None
    for row in (0, gen.shape[0] - 1):
        m = gen.copy()
        m[row, :] = trace_row
        rhs = np.zeros(gen.shape[0], dtype=complex)
        rhs[row] = 1.0
        try:
            rho = linalg.unvec(linalg.solve_linear(m, rhs))
            break
        except SimulationError:
            continue
    gen_norm = np.linalg.norm(gen)
    if rho is not None:
        residual = np.linalg.norm(gen @ linalg.vec(rho))
        if residual > linalg.KERNEL_RESIDUAL_RTOL * max(gen_norm, 1.0):
            rho = None  # replaced-row solution is not actually in the kernel

    if rho is None:
        v = linalg.null_vector(gen)
        rho = linalg.unvec(v)
        tr = np.trace(rho)
        if abs(tr) < 1e-12:
            raise DegenerateKernelError(
                "kernel vector has (near) zero trace; the steady state is not unique — "
                "add an infinitesimal mixing rate")
        rho = rho / tr

    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -1e-8:
        raise DegenerateKernelError(
            f"steady-state candidate has negative eigenvalue {eigs.min():.3e}; "
            "the kernel is likely degenerate — add an infinitesimal mixing rate")
    return rho


def _rk4_step_matrix(gen: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of the linear system v' = L v as a matrix.

    For an autonomous linear ODE the RK4 update is exactly the degree-4
    Taylor polynomial of exp(h L).
    """
    n = gen.shape[0]
    hl = h * gen
    m = np.eye(n, dtype=complex) + hl
    term = hl
    for k in (2.0, 3.0, 4.0):
        term = (term @ hl) / k
        m += term
    return m


def evolve(liouvillian: Liouvillian, rho0: np.ndarray, t: float,
           dt_max: float = math.inf) -> np.ndarray:
    """Propagate ``rho0`` for time ``t`` with fixed-step RK4."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    if dt_max <= 0:
        raise ValidationError(f"dt_max must be > 0, got {dt_max}")
    rho0 = linalg.as_matrix(rho0)
    if rho0.shape != (liouvillian.dim, liouvillian.dim):
        raise ValidationError(f"rho0 shape {rho0.shape} does not match dim {liouvillian.dim}")
    if t == 0.0:
        return rho0.copy()

    h_stab = STEP_SAFETY / liouvillian.norm_estimate if liouvillian.norm_estimate > 0 else math.inf
    h_target = min(dt_max, h_stab)
    if h_target < MIN_STEP:
        raise StiffnessError(f"required step {h_target:.3e} s is below {MIN_STEP:.0e} s")
    if not math.isfinite(h_target):
        return rho0.copy()  # L = 0 and no step bound: nothing evolves

    nsteps = max(1, math.ceil(t / h_target))
    step = _rk4_step_matrix(liouvillian.generator, t / nsteps)
    # N identical linear steps applied by binary powering of the step matrix
    propagator = np.linalg.matrix_power(step, nsteps)
    rho = linalg.unvec(propagator @ linalg.vec(rho0))
    drift = abs(np.trace(rho) - np.trace(rho0))
    if drift > 1e-8:
        raise StiffnessError(f"trace drifted by {drift:.3e} during integration")
    return rho


def relaxation_time(scheme: LevelScheme) -> float:
    """Settling-time estimate: ten lifetimes of the slowest relaxation channel."""
    return 10.0 / scheme.slowest_rate()
