"""Wigner and Margenau-Hill quasi-distributions, phase-space local moments,
the characteristic-function route to the conditional momentum distribution,
and the difference term relating the W, MH and C local variances.

Grid conventions
----------------
The Wigner transform is computed from the symmetric correlation product,

    W(q_i, p) = dq/(pi*hbar) * sum_j conj(psi(q_{i+j})) psi(q_{i-j})
                                e^{2 i p j dq / hbar},

whose natural momentum grid has spacing pi*hbar/(n*dq), half the standard
spacing, because the correlation advances in steps of 2*dq.  For localized
states (edge amplitude below 1e-10) the correlation is zero-padded: index
pairs that would wrap around the window are dropped.  Wrapping them instead
plants a sign-alternating ghost copy of the state half a window away, which
cancels the p-marginal on the half-spaced momentum rows; zero-padding keeps
both marginals exact for decayed states.  Constant-modulus states (plane
waves) are genuinely periodic, so for them the wrapped product is exact and
is used as-is.  Anything else is rejected.

The Margenau-Hill transform lives on the standard momentum grid:

    F_MH(q, p) = Re[ phi(p) conj(psi(q)) e^{i p q/hbar} ] / sqrt(2*pi*hbar).

Both transforms may be negative; each distribution exposes its minimum cell
and location as first-class metadata.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .core import (DEFAULT_MASK_EPS, GridSpec, RealProfile, Wavefunction,
                   apply_momentum_power, momentum_representation,
                   require_normalized)
from .errors import PreconditionError, SelfCheckError
from .moments import MOMENT_ORDER_CAP, LocalProfile

WIGNER_EDGE_TOL = 1e-10
BAYES_CELL_TOL = 1e-7

_KIND_TO_DEFINITION = {"weyl_wigner": "W", "margenau_hill": "MH"}


def _fft_workers() -> int | None:
    """Optional worker count for batched FFTs, from LOCMOM_THREADS."""
    raw = os.environ.get("LOCMOM_THREADS", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None


@dataclass(frozen=True)
class QuasiDistribution:
    """Real-valued distribution on the (q, p) lattice; may be negative.

    values[i, k] is the cell at (q_i, pgrid[k]); pgrid is ascending with
    spacing dp (pi*hbar/(n*dq) for weyl_wigner, 2*pi*hbar/(n*dq) for
    margenau_hill).
    """

    kind: str
    grid: GridSpec
    pgrid: np.ndarray
    dp: float
    values: np.ndarray

    def q_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.grid.dq

    def total(self) -> float:
        return float(self.values.sum() * self.grid.dq * self.dp)

    def min_cell(self) -> tuple[float, float, float]:
        """Minimum cell value and its (q, p) location."""
        flat = int(np.argmin(self.values))
        i, k = divmod(flat, self.values.shape[1])
        return float(self.values[i, k]), float(self.grid.q[i]), float(self.pgrid[k])


@dataclass(frozen=True)
class CharacteristicSlice:
    """Local characteristic function G(tau, q) on the grid; identically 1 at
    tau = 0 on masked-in points (masked-out entries are zero-filled)."""

    tau: float
    values: np.ndarray


def wigner_pgrid(grid: GridSpec) -> tuple[np.ndarray, float]:
    dp = np.pi * grid.hbar / (grid.n * grid.dq)
    return dp * (np.arange(grid.n) - grid.n // 2), dp


def momentum_amplitudes_at(psi: Wavefunction, pvals: np.ndarray) -> np.ndarray:
    """phi evaluated at arbitrary momenta (trigonometric interpolation of the
    standard momentum representation)."""
    g = psi.grid
    phase = np.exp(-1j * np.outer(np.asarray(pvals, dtype=float), g.q) / g.hbar)
    return g.dq / np.sqrt(2.0 * np.pi * g.hbar) * phase @ psi.amp


def _correlation_matrix(psi: Wavefunction) -> np.ndarray:
    """Rows: q index i; columns: wrapped signed offset j; entries
    conj(psi_{i+j}) psi_{i-j}, zero-padded or periodic per the state."""
    g = psi.grid
    n = g.n
    amp = psi.amp
    mods = np.abs(amp)
    edge = max(mods[0], mods[-1])
    idx = np.arange(n)
    sj = np.where(idx < n // 2, idx, idx - n)        # 0..n/2-1, -n/2..-1
    plus = idx[:, None] + sj[None, :]
    minus = idx[:, None] - sj[None, :]
    corr = np.conj(amp[plus % n]) * amp[minus % n]
    if edge < WIGNER_EDGE_TOL:
        valid = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
        corr[~valid] = 0.0
        return corr
    if mods.max() - mods.min() < 1e-10 * mods.max():
        return corr  # constant-modulus state: periodic product is exact
    raise PreconditionError(
        "edge-decay violation: |psi| = %.3g at the window edge; wraparound "
        "would corrupt the correlation product" % edge)


def wigner_transform(psi: Wavefunction) -> QuasiDistribution:
    """Weyl-Wigner distribution of the state on the half-spaced p grid."""
    require_normalized(psi)
    g = psi.grid
    corr = _correlation_matrix(psi)
    rows = g.n * sfft.ifft(corr, axis=1, workers=_fft_workers())
    values = np.fft.fftshift(rows.real, axes=1) * (g.dq / (np.pi * g.hbar))
    pgrid, dp = wigner_pgrid(g)
    return QuasiDistribution(kind="weyl_wigner", grid=g, pgrid=pgrid,
                             dp=dp, values=values)


def margenau_hill_transform(psi: Wavefunction) -> QuasiDistribution:
    """Margenau-Hill distribution on the standard momentum grid."""
    require_normalized(psi)
    g = psi.grid
    phi = momentum_representation(psi)
    cross = np.exp(1j * np.outer(g.q, g.p) / g.hbar)
    values = np.real(np.conj(psi.amp)[:, None] * phi[None, :] * cross)
    values /= np.sqrt(2.0 * np.pi * g.hbar)
    return QuasiDistribution(kind="margenau_hill", grid=g, pgrid=g.p,
                             dp=g.dp, values=values)


def _moment_density(F: QuasiDistribution, order: int) -> np.ndarray:
    return (F.values @ (F.pgrid ** order)) * F.dp


def phase_space_local_moment(F: QuasiDistribution, psi: Wavefunction,
                             order: int,
                             eps_factor: float = DEFAULT_MASK_EPS
                             ) -> LocalProfile:
    """n-th local momentum moment (sum_k p_k^n F dp) / rho on the mask.

    The phase-space symbol of p_hat^n is p^n for both implemented kernels.
    """
    if F.grid != psi.grid:
        raise PreconditionError("distribution and state use different grids")
    if not 1 <= order <= MOMENT_ORDER_CAP:
        raise PreconditionError("moment order must be in 1..%d, got %d"
                                % (MOMENT_ORDER_CAP, order))
    rho = psi.rho()
    mask = psi.mask(eps_factor)
    density = _moment_density(F, order)
    values = np.zeros(psi.grid.n)
    values[mask] = density[mask] / rho[mask]
    return LocalProfile(_KIND_TO_DEFINITION[F.kind], order,
                        RealProfile(psi.grid, values, mask))


def phase_space_local_variance(F: QuasiDistribution, psi: Wavefunction,
                               eps_factor: float = DEFAULT_MASK_EPS
                               ) -> LocalProfile:
    """Second local moment minus squared first; may be negative."""
    m1 = phase_space_local_moment(F, psi, 1, eps_factor)
    m2 = phase_space_local_moment(F, psi, 2, eps_factor)
    vals = m2.profile.values - m1.profile.values ** 2
    vals[~m1.profile.mask] = 0.0
    return LocalProfile(_KIND_TO_DEFINITION[F.kind], "variance",
                        RealProfile(psi.grid, vals, m1.profile.mask))


def _shift_steps(grid: GridSpec, tau: float) -> int:
    steps = grid.hbar * tau / grid.dq
    if abs(steps - round(steps)) > 1e-9:
        raise PreconditionError(
            "off-grid shift: hbar*tau must be an integer multiple of dq "
            "(hbar*tau/dq = %.12g)" % steps)
    return int(round(steps))


def characteristic_function_S(psi: Wavefunction, tau: float,
                              eps_factor: float = DEFAULT_MASK_EPS
                              ) -> CharacteristicSlice:
    """G(tau, q) = psi(q + hbar*tau)/(2 psi(q)) + conj(psi(q - hbar*tau))
    / (2 conj(psi(q))), evaluated by periodic grid shifting.

    Its Taylor coefficients in (i*tau) are the S local momentum moments.
    """
    require_normalized(psi)
    j = _shift_steps(psi.grid, tau)
    mask = psi.mask(eps_factor)
    values = np.zeros(psi.grid.n, dtype=complex)
    amp = psi.amp
    fwd = np.roll(amp, -j)[mask] / (2.0 * amp[mask])
    bwd = np.conj(np.roll(amp, j)[mask]) / (2.0 * np.conj(amp[mask]))
    values[mask] = fwd + bwd
    return CharacteristicSlice(tau=float(tau), values=values)


def conditional_momentum_S(psi: Wavefunction) -> np.ndarray:
    """P_S(p|q): discrete inversion of the characteristic function over the
    on-grid tau lattice, rows q, columns ascending standard p.

    Rows are computed wherever psi(q) is nonzero (the Bayes-product
    identity needs them well below the rho mask); rows at exact nodes are
    zero-filled, matching the exactly-zero Margenau-Hill rows there.  Row
    sums satisfy sum_k P(p_k|q) dp = 1 exactly on every computed row
    (G(0, q) = 1 by construction).
    """
    require_normalized(psi)
    g = psi.grid
    n = g.n
    amp = psi.amp
    live = amp != 0
    idx = np.arange(n)
    # G[i, j] for all on-grid shifts j at once (periodic indexing)
    plus = (idx[:, None] + idx[None, :]) % n
    minus = (idx[:, None] - idx[None, :]) % n
    G = np.zeros((n, n), dtype=complex)
    G[live, :] = (amp[plus][live, :] / (2.0 * amp[live, None])
                  + np.conj(amp[minus][live, :])
                  / (2.0 * np.conj(amp[live, None])))
    rows = sfft.fft(G, axis=1, workers=_fft_workers()).real
    rows *= g.dq / (2.0 * np.pi * g.hbar)
    return np.fft.fftshift(rows, axes=1)


def bayes_product(psi: Wavefunction, conditional: np.ndarray,
                  eps_factor: float = DEFAULT_MASK_EPS) -> QuasiDistribution:
    """rho(q) * P_S(p|q) per cell; must reconstruct the Margenau-Hill
    distribution within 1e-7 per cell or the two pipelines have diverged
    (SelfCheckError)."""
    require_normalized(psi)
    g = psi.grid
    if conditional.shape != (g.n, g.n):
        raise PreconditionError("conditional distribution has wrong shape %s"
                                % (conditional.shape,))
    values = psi.rho()[:, None] * conditional
    reference = margenau_hill_transform(psi)
    dev = float(np.max(np.abs(values - reference.values)))
    if dev > BAYES_CELL_TOL:
        raise SelfCheckError(
            "Bayes product deviates from the Margenau-Hill distribution by "
            "%.3g per cell (tolerance %.1g)" % (dev, BAYES_CELL_TOL))
    return QuasiDistribution(kind="margenau_hill", grid=g, pgrid=g.p,
                             dp=g.dp, values=values)


def variance_difference_term(psi: Wavefunction,
                             eps_factor: float = DEFAULT_MASK_EPS
                             ) -> RealProfile:
    """Correction term t(q) with sigma2_W = sigma2_MH + t and
    sigma2_W = sigma2_C - t pointwise:

        t = (2 |p psi|^2 - 2 Re[conj(psi) p^2 psi]) / (4 rho),

    i.e. half the gap between the sandwich and symmetrized p^2 densities,
    over rho."""
    require_normalized(psi)
    p_psi = apply_momentum_power(psi, 1)
    p2_psi = apply_momentum_power(psi, 2)
    sandwich = np.abs(p_psi) ** 2
    sym = np.real(np.conj(psi.amp) * p2_psi)
    rho = psi.rho()
    mask = psi.mask(eps_factor)
    values = np.zeros(psi.grid.n)
    values[mask] = (2.0 * sandwich[mask] - 2.0 * sym[mask]) / (4.0 * rho[mask])
    return RealProfile(psi.grid, values, mask)
