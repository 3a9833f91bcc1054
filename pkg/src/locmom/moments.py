"""Local values, local variances, and variance decompositions under the
competing C and S prescriptions, for momentum powers and for operators
given by their action.

For a Hermitian operator A and a point q on the grid, delta(q_hat - q) is
absorbed analytically: the symmetrized local density is evaluated as

    <A_q> = Re[ conj(psi(q)) * (A psi)(q) ]

and the "sandwich" density for A^2 as |(A psi)(q)|^2.  This is exact at the
grid points; no delta-width parameter enters.  Quotients by rho(q) are only
formed on the mask where rho exceeds the shared threshold; points below it
are masked, not regularized (the quotients are genuinely singular at nodes).

The S local variance may be negative; the C one is a square and may not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (DEFAULT_MASK_EPS, RealProfile, Wavefunction,
                   apply_momentum_power, require_normalized)
from .errors import PreconditionError

MOMENT_ORDER_CAP = 4

DEFINITIONS = ("S", "C", "MH", "W")


@dataclass(frozen=True)
class ObservableSpec:
    """An observable given by its action on wavefunctions.

    apply_square is the action of the operator's square; it cannot be
    inferred pointwise from apply, and several operations require it.
    """

    kind: str
    order: int
    apply: Callable[[Wavefunction], np.ndarray]
    apply_square: Callable[[Wavefunction], np.ndarray] | None = None


def momentum_power(n: int) -> ObservableSpec:
    """The observable p_hat^n, 1 <= n <= 4, acting spectrally."""
    if not 1 <= n <= MOMENT_ORDER_CAP:
        raise PreconditionError(
            "momentum_power order must be in 1..%d, got %d"
            % (MOMENT_ORDER_CAP, n))
    return ObservableSpec(
        kind="momentum_power", order=n,
        apply=lambda psi: apply_momentum_power(psi, n),
        apply_square=lambda psi: apply_momentum_power(psi, 2 * n))


def position_function(g: np.ndarray) -> ObservableSpec:
    """A diagonal observable g(q_hat), g sampled on the grid."""
    g = np.asarray(g, dtype=float)
    return ObservableSpec(
        kind="position_function", order=1,
        apply=lambda psi: g * psi.amp,
        apply_square=lambda psi: g ** 2 * psi.amp)


def linear_action(apply: Callable[[Wavefunction], np.ndarray],
                  apply_square: Callable[[Wavefunction], np.ndarray] | None = None
                  ) -> ObservableSpec:
    """A generic observable; supply the action of its square as well if any
    second-moment operation will be used."""
    return ObservableSpec(kind="linear_action", order=1,
                          apply=apply, apply_square=apply_square)


@dataclass(frozen=True)
class LocalProfile:
    """A local moment or variance profile tagged by definition and order."""

    definition: str          # one of "S", "C", "MH", "W"
    order: int | str         # moment order, or the tag "variance"
    profile: RealProfile


@dataclass(frozen=True)
class VarianceDecomposition:
    """Total variance split into the q-average of local variances plus the
    q-variance of local averages."""

    definition: str
    avg_local_variance: float
    variance_of_local_avg: float
    total: float


def _require_square(A: ObservableSpec) -> Callable:
    if A.apply_square is None:
        raise PreconditionError("square action required: observable %r does "
                                "not supply apply_square" % A.kind)
    return A.apply_square


def _masked_quotient(psi: Wavefunction, numerator: np.ndarray,
                     eps_factor: float) -> RealProfile:
    rho = psi.rho()
    mask = psi.mask(eps_factor)
    if not mask.any():
        raise PreconditionError("state has no support")
    values = np.zeros(psi.grid.n)
    values[mask] = numerator[mask] / rho[mask]
    return RealProfile(psi.grid, values, mask)


def local_density_S(psi: Wavefunction, A: ObservableSpec) -> RealProfile:
    """Symmetrized local density Re[conj(psi) (A psi)], defined at every
    grid point; integrates to the global average <A>."""
    require_normalized(psi)
    density = np.real(np.conj(psi.amp) * A.apply(psi))
    return RealProfile(psi.grid, density, np.ones(psi.grid.n, dtype=bool))


def local_value_S(psi: Wavefunction, A: ObservableSpec,
                  eps_factor: float = DEFAULT_MASK_EPS) -> LocalProfile:
    """Local value Re[(A psi)(q)/psi(q)], i.e. local_density_S / rho."""
    density = local_density_S(psi, A)
    prof = _masked_quotient(psi, density.values, eps_factor)
    return LocalProfile("S", A.order, prof)


def local_variance_C(psi: Wavefunction, A: ObservableSpec,
                     eps_factor: float = DEFAULT_MASK_EPS) -> LocalProfile:
    """C local variance Im[(A psi)(q)/psi(q)]^2 (manifestly nonnegative)."""
    require_normalized(psi)
    mask = psi.mask(eps_factor)
    if not mask.any():
        raise PreconditionError("state has no support")
    values = np.zeros(psi.grid.n)
    ratio = A.apply(psi)[mask] / psi.amp[mask]
    values[mask] = np.imag(ratio) ** 2
    return LocalProfile("C", "variance",
                        RealProfile(psi.grid, values, mask))


def local_second_moment_S(psi: Wavefunction, A: ObservableSpec,
                          eps_factor: float = DEFAULT_MASK_EPS) -> LocalProfile:
    """Local average of A^2 under S: Re[conj(psi) (A^2 psi)] / rho."""
    require_normalized(psi)
    apply_square = _require_square(A)
    density = np.real(np.conj(psi.amp) * apply_square(psi))
    prof = _masked_quotient(psi, density, eps_factor)
    return LocalProfile("S", A.order, prof)


def local_variance_S(psi: Wavefunction, A: ObservableSpec,
                     eps_factor: float = DEFAULT_MASK_EPS) -> LocalProfile:
    """S local variance: second moment minus squared local value.

    Not semidefinite positive; for a Gaussian it is negative beyond
    |q - q0| > s*sqrt(2)."""
    second = local_second_moment_S(psi, A, eps_factor)
    value = local_value_S(psi, A, eps_factor)
    vals = second.profile.values - value.profile.values ** 2
    vals[~second.profile.mask] = 0.0
    return LocalProfile("S", "variance",
                        RealProfile(psi.grid, vals, second.profile.mask))


def sandwich_density(psi: Wavefunction, A: ObservableSpec) -> RealProfile:
    """The other local density for A^2: |(A psi)(q)|^2, nonnegative,
    integrating to <A^2>."""
    require_normalized(psi)
    density = np.abs(A.apply(psi)) ** 2
    return RealProfile(psi.grid, density, np.ones(psi.grid.n, dtype=bool))


def density_inequality_witness(psi: Wavefunction, A: ObservableSpec,
                               eps_factor: float = DEFAULT_MASK_EPS) -> float:
    """Max over masked-in q of |sandwich - symmetrized A^2 density|.

    Zero for eigenstates of A and for diagonal observables; strictly
    positive for generic states."""
    apply_square = _require_square(A)
    sandwich = sandwich_density(psi, A).values
    sym = np.real(np.conj(psi.amp) * apply_square(psi))
    mask = psi.mask(eps_factor)
    return float(np.max(np.abs(sandwich - sym)[mask]))


def global_average(psi: Wavefunction, A: ObservableSpec) -> float:
    """<psi|A|psi> evaluated directly (A assumed Hermitian)."""
    require_normalized(psi)
    return float(np.real(np.sum(np.conj(psi.amp) * A.apply(psi))) * psi.grid.dq)


def _square_average(psi: Wavefunction, A: ObservableSpec) -> float:
    apply_square = _require_square(A)
    return float(np.real(np.sum(np.conj(psi.amp) * apply_square(psi)))
                 * psi.grid.dq)


def _local_variance_profile(psi: Wavefunction, A: ObservableSpec,
                            definition: str, eps_factor: float) -> LocalProfile:
    if definition == "S":
        return local_variance_S(psi, A, eps_factor)
    if definition == "C":
        return local_variance_C(psi, A, eps_factor)
    # MH / W come from the phase-space module; its momentum symbols cover
    # momentum powers and diagonal observables only.
    from . import phasespace

    if A.kind == "position_function":
        # diagonal observable: all four local variances vanish identically
        mask = psi.mask(eps_factor)
        return LocalProfile(definition, "variance",
                            RealProfile(psi.grid, np.zeros(psi.grid.n), mask))
    if A.kind != "momentum_power":
        raise PreconditionError(
            "phase-space local variance needs a momentum power or a "
            "position function; no phase-space symbol for %r" % A.kind)
    if 2 * A.order > MOMENT_ORDER_CAP:
        raise PreconditionError(
            "phase-space variance of p^%d needs moment order %d > cap %d"
            % (A.order, 2 * A.order, MOMENT_ORDER_CAP))
    if definition == "MH":
        F = phasespace.margenau_hill_transform(psi)
    elif definition == "W":
        F = phasespace.wigner_transform(psi)
    else:
        raise PreconditionError("unknown definition %r" % definition)
    if A.order == 1:
        return phasespace.phase_space_local_variance(F, psi, eps_factor)
    m1 = phasespace.phase_space_local_moment(F, psi, A.order, eps_factor)
    m2 = phasespace.phase_space_local_moment(F, psi, 2 * A.order, eps_factor)
    vals = m2.profile.values - m1.profile.values ** 2
    vals[~m1.profile.mask] = 0.0
    return LocalProfile(definition, "variance",
                        RealProfile(psi.grid, vals, m1.profile.mask))


def _local_value_profile(psi: Wavefunction, A: ObservableSpec,
                         definition: str, eps_factor: float) -> LocalProfile:
    if definition in ("S", "C"):
        return local_value_S(psi, A, eps_factor)
    from . import phasespace

    if A.kind == "position_function":
        return local_value_S(psi, A, eps_factor)
    if A.kind != "momentum_power":
        raise PreconditionError(
            "phase-space local value needs a momentum power or a position "
            "function; no phase-space symbol for %r" % A.kind)
    if definition == "MH":
        F = phasespace.margenau_hill_transform(psi)
    else:
        F = phasespace.wigner_transform(psi)
    return phasespace.phase_space_local_moment(F, psi, A.order, eps_factor)


def _moment_densities(psi: Wavefunction, A: ObservableSpec,
                      definition: str) -> tuple[np.ndarray, np.ndarray]:
    """First-moment and second-moment densities of the observable under the
    given definition, defined at every grid point (no quotients)."""
    if A.kind == "position_function" or definition in ("S", "C"):
        apply_square = _require_square(A)
        field = A.apply(psi)
        first = np.real(np.conj(psi.amp) * field)
        if definition == "C":
            second = np.abs(field) ** 2
        else:
            second = np.real(np.conj(psi.amp) * apply_square(psi))
        return first, second
    from . import phasespace

    if A.kind != "momentum_power":
        raise PreconditionError(
            "phase-space local variance needs a momentum power or a "
            "position function; no phase-space symbol for %r" % A.kind)
    if 2 * A.order > MOMENT_ORDER_CAP:
        raise PreconditionError(
            "phase-space variance of p^%d needs moment order %d > cap %d"
            % (A.order, 2 * A.order, MOMENT_ORDER_CAP))
    if definition == "MH":
        F = phasespace.margenau_hill_transform(psi)
    else:
        F = phasespace.wigner_transform(psi)
    first = (F.values @ F.pgrid ** A.order) * F.dp
    second = (F.values @ F.pgrid ** (2 * A.order)) * F.dp
    return first, second


def variance_decomposition(psi: Wavefunction, A: ObservableSpec,
                           definition: str,
                           eps_factor: float = DEFAULT_MASK_EPS
                           ) -> VarianceDecomposition:
    """Split sigma^2_A into avg local variance + variance of local averages.

    The sum must reproduce <A^2> - <A>^2; the caller checks it against the
    returned total.  The components are assembled at the density level,

        avg local variance      = int (M2 - D^2/rho) dq
        variance of local avgs  = int (D/sqrt(rho) - <A> sqrt(rho))^2 dq,

    because the bounded combinations M2 - D^2/rho and D^2/rho (with
    D^2/rho <= the sandwich density) stay finite at nodes where the local
    variance itself diverges; a node carries finite variance-density
    weight under the C and W definitions even though rho vanishes there.
    The quotient is dropped below the rho mask (its true value there is
    bounded by the sandwich density, i.e. negligible).  Raises if the
    masked-out region carries probability above 1e-8, which would make the
    split unreliable.
    """
    require_normalized(psi)
    if definition not in DEFINITIONS:
        raise PreconditionError("definition must be one of %s"
                                % (DEFINITIONS,))
    rho = psi.rho()
    mask = psi.mask(eps_factor)
    masked_out = float(np.sum(rho[~mask]) * psi.grid.dq)
    if masked_out > 1e-8:
        raise PreconditionError(
            "masked region excludes probability %.3g > 1e-8; "
            "decomposition unreliable" % masked_out)

    mean = global_average(psi, A)
    dq = psi.grid.dq
    if A.kind == "position_function":
        # diagonal observable: zero local spread under every definition,
        # and the q-variance of g(q) needs no quotient at all
        g = np.real(A.apply(psi) / np.where(psi.amp == 0, 1.0, psi.amp))
        g[psi.amp == 0] = 0.0
        avg_local_variance = 0.0
        variance_of_local_avg = float(np.sum((g - mean) ** 2 * rho) * dq)
    else:
        first, second = _moment_densities(psi, A, definition)
        quot = first[mask] ** 2 / rho[mask]
        avg_local_variance = float(np.sum(second) * dq - np.sum(quot) * dq)
        spread = (first[mask] / np.sqrt(rho[mask])
                  - mean * np.sqrt(rho[mask])) ** 2
        variance_of_local_avg = float(np.sum(spread) * dq)
    return VarianceDecomposition(
        definition=definition,
        avg_local_variance=avg_local_variance,
        variance_of_local_avg=variance_of_local_avg,
        total=avg_local_variance + variance_of_local_avg)


def direct_variance(psi: Wavefunction, A: ObservableSpec) -> float:
    """sigma^2_A = <A^2> - <A>^2 computed without local quantities."""
    return _square_average(psi, A) - global_average(psi, A) ** 2
