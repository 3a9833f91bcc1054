"""Split-operator time evolution and the hydrodynamic residual checks:
the continuity equation for rho, the Euler-form equation for the Wigner
local momentum with its quantum pressure term, and the three competing
local kinetic-energy densities.

Residuals are evaluated with centered differences in time on the stored
snapshots (never re-derived from the propagator internals) and spectral
derivatives in space, reported as the max over interior times and
masked-in grid points.  Quotient fields like pbar = D/rho lose all
relative accuracy in the tails if differentiated directly (the FFT noise
floor is set by the largest field values, then divided by a tiny rho), so
every differentiated quotient is expanded analytically, e.g.

    d(D/rho)/dq = (D' rho - D rho') / rho^2,

with D', rho' and the second-moment derivative built by the product rule
from spectrally differentiated amplitude fields.  That keeps the roundoff
proportional to the local amplitude and the residual floors far below the
stated tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .core import (DEFAULT_MASK_EPS, GridSpec, RealProfile, Wavefunction,
                   apply_momentum_power, require_normalized,
                   spatial_derivative)
from .errors import PreconditionError, SelfCheckError
from .phasespace import wigner_transform

STABILITY_LIMIT = 0.5


@dataclass(frozen=True)
class Potential:
    """Potential energy samples with the analytic gradient of the built-in
    family (spectral differentiation would ring on non-periodic shapes
    like the harmonic well)."""

    values: np.ndarray
    grad: np.ndarray
    label: str


def free_potential(grid: GridSpec) -> Potential:
    return Potential(np.zeros(grid.n), np.zeros(grid.n), "free")


def harmonic_potential(grid: GridSpec, omega: float) -> Potential:
    if not omega > 0:
        raise PreconditionError("harmonic omega must be positive")
    q = grid.q
    return Potential(0.5 * grid.mass * omega ** 2 * q ** 2,
                     grid.mass * omega ** 2 * q,
                     "harmonic:%r" % omega)


def gaussian_barrier(grid: GridSpec, height: float, width: float,
                     center: float) -> Potential:
    if not width > 0:
        raise PreconditionError("barrier width must be positive")
    q = grid.q
    bump = np.exp(-(q - center) ** 2 / (2.0 * width ** 2))
    return Potential(height * bump,
                     -height * (q - center) / width ** 2 * bump,
                     "barrier:%r,%r,%r" % (height, width, center))


@dataclass(frozen=True)
class PropagationConfig:
    dt: float
    steps: int
    snapshot_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if self.steps < 1:
            raise PreconditionError("steps must be >= 1")
        if self.snapshot_stride < 1:
            raise PreconditionError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class EvolutionTrace:
    potential: Potential
    times: np.ndarray
    snapshots: tuple  # of Wavefunction


def max_kinetic_eigenvalue(grid: GridSpec) -> float:
    p_max = np.pi * grid.hbar / grid.dq
    return p_max ** 2 / (2.0 * grid.mass)


def check_stability(grid: GridSpec, dt: float) -> None:
    """Guard dt * T_max / hbar < 0.5 (heuristic: keeps the kinetic phase
    advance per step small)."""
    t_max = max_kinetic_eigenvalue(grid)
    if dt * t_max / grid.hbar >= STABILITY_LIMIT:
        suggested = 0.45 * grid.hbar / t_max
        raise PreconditionError(
            "stability guard: dt*T_max/hbar = %.3g >= %.2g; "
            "suggested dt < %.3g" % (dt * t_max / grid.hbar,
                                     STABILITY_LIMIT, suggested))


def split_step_propagate(psi0: Wavefunction, V: Potential,
                         cfg: PropagationConfig) -> EvolutionTrace:
    """Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) per step;
    unitary, second order in dt.  Snapshots every snapshot_stride steps,
    including the initial and final states."""
    require_normalized(psi0)
    g = psi0.grid
    check_stability(g, cfg.dt)
    half_v = np.exp(-0.5j * cfg.dt * V.values / g.hbar)
    kinetic = np.exp(-1j * cfg.dt * g.p_wrapped ** 2 / (2.0 * g.mass * g.hbar))
    amp = np.array(psi0.amp, dtype=complex)
    times = [0.0]
    snapshots = [Wavefunction(g, amp.copy())]
    for step in range(1, cfg.steps + 1):
        amp = half_v * sfft.ifft(kinetic * sfft.fft(half_v * amp))
        if step % cfg.snapshot_stride == 0 or step == cfg.steps:
            times.append(step * cfg.dt)
            snapshots.append(Wavefunction(g, amp.copy()))
    trace = EvolutionTrace(potential=V, times=np.array(times),
                           snapshots=tuple(snapshots))
    worst = max(abs(s.norm() - 1.0) for s in trace.snapshots)
    if worst > 1e-9:
        raise PreconditionError("unitarity check failed: norm drift %.3g"
                                % worst)
    return trace


def _require_uniform_stride(trace: EvolutionTrace) -> float:
    if len(trace.snapshots) < 3:
        raise PreconditionError("need at least 3 snapshots for residuals")
    gaps = np.diff(trace.times)
    if np.max(np.abs(gaps - gaps[0])) > 1e-12 * gaps[0]:
        raise PreconditionError("snapshots are not uniformly spaced in time")
    return float(gaps[0])


def _amplitude_fields(psi: Wavefunction) -> dict:
    """Density, momentum density and second-moment density together with
    their exact product-rule spatial derivatives."""
    g = psi.grid
    amp = psi.amp
    d1 = spatial_derivative(amp, g)
    d2 = spatial_derivative(d1, g)
    d3 = spatial_derivative(d2, g)
    p_psi = -1j * g.hbar * d1
    p_psi_d = -1j * g.hbar * d2
    p2_psi = -g.hbar ** 2 * d2
    p2_psi_d = -g.hbar ** 2 * d3
    rho = np.abs(amp) ** 2
    drho = 2.0 * np.real(np.conj(amp) * d1)
    D = np.real(np.conj(amp) * p_psi)
    dD = np.real(np.conj(d1) * p_psi + np.conj(amp) * p_psi_d)
    m2 = 0.5 * np.real(np.conj(amp) * p2_psi) + 0.5 * np.abs(p_psi) ** 2
    dm2 = (0.5 * np.real(np.conj(d1) * p2_psi + np.conj(amp) * p2_psi_d)
           + np.real(np.conj(p_psi) * p_psi_d))
    return {"rho": rho, "drho": drho, "D": D, "dD": dD, "m2": m2, "dm2": dm2}


def continuity_residual(trace: EvolutionTrace,
                        eps_factor: float = DEFAULT_MASK_EPS) -> float:
    """Max residual of  d(rho)/dt + d(rho*pbar/m)/dq = 0.

    The first local momentum moment is definition-independent
    (S = MH = W), so the momentum density rho*pbar is evaluated once from
    the amplitudes."""
    dt = _require_uniform_stride(trace)
    mass = trace.snapshots[0].grid.mass
    fields = [_amplitude_fields(s) for s in trace.snapshots]
    masks = [s.mask(eps_factor) for s in trace.snapshots]
    worst = 0.0
    for i in range(1, len(fields) - 1):
        drho_dt = (fields[i + 1]["rho"] - fields[i - 1]["rho"]) / (2.0 * dt)
        residual = drho_dt + fields[i]["dD"] / mass
        mask = masks[i - 1] & masks[i] & masks[i + 1]
        worst = max(worst, float(np.max(np.abs(residual[mask]))))
    return worst


WIGNER_MOMENT_DENSITY_TOL = 1e-8


def _checked_fields(psi: Wavefunction) -> dict:
    """Amplitude fields of a snapshot, cross-checked against the Wigner
    moment densities of the phase-space module.

    The Wigner first and second moment densities coincide analytically
    with the bilinear forms D = Re[conj(psi) p psi] and
    M2 = (Re[conj(psi) p^2 psi] + |p psi|^2)/2.  The bilinear forms are
    the numerically stable evaluation: propagator roundoff is delocalized
    over the grid and the nonlocal Wigner correlation mixes it into the
    tail rows at the ~1e-16 density level, which the 1/rho quotient and
    the 1/(2 dt) time difference would amplify past the residual
    tolerances.  The transform route is therefore verified here at the
    density level and the bilinear twins are used for the differencing.
    """
    fields = _amplitude_fields(psi)
    W = wigner_transform(psi)
    m1w = (W.values @ W.pgrid) * W.dp
    m2w = (W.values @ W.pgrid ** 2) * W.dp
    dev = max(float(np.max(np.abs(m1w - fields["D"]))),
              float(np.max(np.abs(m2w - fields["m2"]))))
    if dev > WIGNER_MOMENT_DENSITY_TOL:
        raise SelfCheckError(
            "Wigner moment densities deviate from their bilinear forms by "
            "%.3g (tolerance %.1g)" % (dev, WIGNER_MOMENT_DENSITY_TOL))
    return fields


def euler_residual_W(trace: EvolutionTrace,
                     eps_factor: float = DEFAULT_MASK_EPS) -> float:
    """Max residual of the Euler-form equation for the Wigner local momentum,

        d(pbar_W)/dt = -(pbar_W/m) d(pbar_W)/dq - dV/dq
                       - (1/(m rho)) d(rho sigma2_W)/dq,

    with the Wigner local moments of each snapshot validated against, and
    evaluated through, their bilinear density forms (see _checked_fields),
    and the quantum-pressure flux rho*sigma2_W = M2 - D^2/rho
    differentiated through the expanded product rule."""
    dt = _require_uniform_stride(trace)
    g = trace.snapshots[0].grid
    mass = g.mass
    grad_v = trace.potential.grad
    masks = [s.mask(eps_factor) for s in trace.snapshots]
    fields = [_checked_fields(s) for s in trace.snapshots]

    def pbar(i: int, mask: np.ndarray) -> np.ndarray:
        out = np.zeros(g.n)
        out[mask] = fields[i]["D"][mask] / fields[i]["rho"][mask]
        return out

    worst = 0.0
    for i in range(1, len(trace.snapshots) - 1):
        mask = masks[i - 1] & masks[i] & masks[i + 1]
        f = fields[i]
        rho, drho, D, dD = f["rho"], f["drho"], f["D"], f["dD"]
        dpbar_dt = (pbar(i + 1, mask) - pbar(i - 1, mask)) / (2.0 * dt)
        dpbar_dq = np.zeros(g.n)
        dpbar_dq[mask] = ((dD * rho - D * drho)[mask] / rho[mask] ** 2)
        # d(rho sigma2_W)/dq / rho  with  rho sigma2_W = M2 - D^2/rho
        pressure = np.zeros(g.n)
        pressure[mask] = (f["dm2"][mask]
                          - (2.0 * D * dD)[mask] / rho[mask]
                          + (D ** 2 * drho)[mask] / rho[mask] ** 2) / rho[mask]
        residual = (dpbar_dt + pbar(i, mask) * dpbar_dq / mass + grad_v
                    + pressure / mass)
        worst = max(worst, float(np.max(np.abs(residual[mask]))))
    return worst


def kinetic_energy_densities(psi: Wavefunction) -> dict[str, RealProfile]:
    """The three local kinetic-energy densities, keyed by definition tag:

        W : rho * (second W local moment) / (2m), from the Wigner moments;
        MH: Re[conj(psi) p^2 psi] / (2m)  (= the S/MH second-moment density);
        C : |p psi|^2 / (2m)              (the sandwich density).

    Each integrates to <p^2>/(2m); the W density is the pointwise mean of
    the other two."""
    require_normalized(psi)
    g = psi.grid
    mass = g.mass
    full = np.ones(g.n, dtype=bool)
    p_psi = apply_momentum_power(psi, 1)
    p2_psi = apply_momentum_power(psi, 2)
    mh = np.real(np.conj(psi.amp) * p2_psi) / (2.0 * mass)
    c = np.abs(p_psi) ** 2 / (2.0 * mass)
    W = wigner_transform(psi)
    w = (W.values @ W.pgrid ** 2) * W.dp / (2.0 * mass)
    return {"W": RealProfile(g, w, full),
            "MH": RealProfile(g, mh, full.copy()),
            "C": RealProfile(g, c, full.copy())}


def position_mean(psi: Wavefunction) -> float:
    return float(np.sum(psi.grid.q * psi.rho()) * psi.grid.dq)


def energy_mean(psi: Wavefunction, V: Potential) -> float:
    g = psi.grid
    p2 = float(np.real(np.sum(np.conj(psi.amp)
                              * apply_momentum_power(psi, 2))) * g.dq)
    return p2 / (2.0 * g.mass) + float(np.sum(V.values * psi.rho()) * g.dq)
