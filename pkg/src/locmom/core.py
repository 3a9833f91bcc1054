"""Uniform periodic position grid and the spectral machinery on top of it.

Conventions used throughout the package:

* position grid     q_j = q_min + j*dq,  j = 0..n-1,  dq = (q_max - q_min)/n
  (periodic: q_max is identified with q_min);
* momentum grid     p_k = 2*pi*hbar*k/(n*dq) with k wrapped per FFT
  convention internally; every externally visible momentum array is
  re-sorted ascending, p in [-pi*hbar/dq, pi*hbar/dq);
* transform pair    phi(p) = dq/sqrt(2*pi*hbar) * sum_j psi(q_j) e^{-i p q_j/hbar}
                    psi(q) = dp/sqrt(2*pi*hbar) * sum_k phi(p_k) e^{+i p_k q/hbar}
  which is unitary on the grid (discrete Parseval holds to roundoff);
* integrals         rectangle rule, sum(values)*dq, exact for periodic
  band-limited integrands.

All operations are pure functions of immutable inputs; results are freshly
allocated arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import ConfigError, PreconditionError

# Shared relative threshold below which the probability density is considered
# too small for quotient-based local quantities: points with
# rho < DEFAULT_MASK_EPS * max(rho) are masked out.
DEFAULT_MASK_EPS = 1e-10

# Amplitude below which a synthesized localized state counts as decayed at
# the window edges.
EDGE_DECAY_TOL = 1e-12

MOMENTUM_POWER_CAP = 8


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic position grid plus the physical constants hbar, mass.

    Construct through :func:`make_grid`, which validates the parameters.
    """

    n: int
    q_min: float
    q_max: float
    hbar: float = 1.0
    mass: float = 1.0

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n

    @property
    def length(self) -> float:
        return self.q_max - self.q_min

    @property
    def dp(self) -> float:
        """Spacing of the conjugate momentum grid, 2*pi*hbar/(n*dq)."""
        return 2.0 * np.pi * self.hbar / (self.n * self.dq)

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        """Momentum grid in ascending order (external view)."""
        return np.fft.fftshift(self.p_wrapped)

    @property
    def p_wrapped(self) -> np.ndarray:
        """Momentum grid in wrapped FFT order (internal view)."""
        return 2.0 * np.pi * self.hbar * np.fft.fftfreq(self.n, d=self.dq)


def make_grid(n: int, q_min: float, q_max: float,
              hbar: float = 1.0, mass: float = 1.0) -> GridSpec:
    """Build a validated GridSpec.

    n must be even and at least 8 (powers of two recommended), the window
    must be non-empty and hbar, mass positive.
    """
    if n % 2 != 0 or n < 8:
        raise ConfigError("n must be even and >= 8, got n=%d" % n)
    if not q_max > q_min:
        raise ConfigError("inverted window: q_max=%g must exceed q_min=%g"
                          % (q_max, q_min))
    if not hbar > 0:
        raise ConfigError("hbar must be positive, got %g" % hbar)
    if not mass > 0:
        raise ConfigError("mass must be positive, got %g" % mass)
    return GridSpec(n=int(n), q_min=float(q_min), q_max=float(q_max),
                    hbar=float(hbar), mass=float(mass))


@dataclass(frozen=True)
class Wavefunction:
    """Complex amplitudes psi(q_j) on a grid (units length^(-1/2))."""

    grid: GridSpec
    amp: np.ndarray

    def rho(self) -> np.ndarray:
        """Probability density rho(q) = |psi(q)|^2."""
        return np.abs(self.amp) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2) * self.grid.dq))

    def mask(self, eps_factor: float = DEFAULT_MASK_EPS) -> np.ndarray:
        """Boolean mask of points where rho exceeds eps_factor * max(rho)."""
        rho = self.rho()
        return rho >= eps_factor * rho.max()


@dataclass(frozen=True)
class RealProfile:
    """Real-valued function of q with a validity mask.

    Masked-out points carry no claim; consumers must not read them.
    """

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray


def normalize(psi: Wavefunction) -> Wavefunction:
    """Rescale so that sum |psi_j|^2 dq = 1."""
    amp = np.asarray(psi.amp, dtype=complex)
    if not np.all(np.isfinite(amp.view(float))):
        raise PreconditionError("wavefunction amplitudes are not finite")
    nrm = np.sqrt(np.sum(np.abs(amp) ** 2) * psi.grid.dq)
    if nrm == 0.0:
        raise PreconditionError("cannot normalize the zero wavefunction")
    return Wavefunction(psi.grid, amp / nrm)


def require_normalized(psi: Wavefunction, tol: float = 1e-8) -> None:
    if abs(psi.norm() - 1.0) > tol:
        raise PreconditionError(
            "wavefunction not normalized: norm=%.12g" % psi.norm())


def momentum_representation(psi: Wavefunction) -> np.ndarray:
    """Momentum amplitudes phi(p_k) on the ascending momentum grid.

    phi(p_k) = dq/sqrt(2*pi*hbar) * sum_j psi(q_j) exp(-i p_k q_j / hbar).
    Unitary: sum |phi_k|^2 dp = sum |psi_j|^2 dq to roundoff.
    """
    require_normalized(psi)
    return np.fft.fftshift(_momentum_representation_wrapped(psi))


def _momentum_representation_wrapped(psi: Wavefunction) -> np.ndarray:
    g = psi.grid
    phase = np.exp(-1j * g.p_wrapped * g.q_min / g.hbar)
    return g.dq / np.sqrt(2.0 * np.pi * g.hbar) * phase * sfft.fft(psi.amp)


def momentum_to_position(grid: GridSpec, phi: np.ndarray) -> np.ndarray:
    """Inverse of momentum_representation; phi on the ascending grid."""
    phi_wrapped = np.fft.ifftshift(np.asarray(phi, dtype=complex))
    phase = np.exp(1j * grid.p_wrapped * grid.q_min / grid.hbar)
    spectrum = phi_wrapped * phase / (grid.dq / np.sqrt(2.0 * np.pi * grid.hbar))
    return sfft.ifft(spectrum)


def apply_momentum_power(psi: Wavefunction, n: int) -> np.ndarray:
    """Return the complex field <q|p_hat^n|psi> computed spectrally.

    Multiplies by (hbar k)^n in the momentum representation and transforms
    back; the wrapped grid places the Nyquist mode at -pi*hbar/dq.  n = 0
    returns the amplitudes unchanged.  Practical cap n <= 8: higher powers
    amplify spectral edge noise beyond useful accuracy.
    """
    if n < 0 or n != int(n):
        raise PreconditionError("momentum power must be a non-negative integer")
    if n > MOMENTUM_POWER_CAP:
        raise PreconditionError(
            "momentum power %d exceeds the cap %d" % (n, MOMENTUM_POWER_CAP))
    if n == 0:
        return np.array(psi.amp, dtype=complex)
    g = psi.grid
    return sfft.ifft((g.p_wrapped ** n) * sfft.fft(psi.amp))


def integrate(profile: RealProfile) -> float:
    """Rectangle-rule integral sum(values)*dq; masked-out points contribute
    zero (callers relying on the full integral must pass all-true masks)."""
    vals = np.where(profile.mask, profile.values, 0.0)
    return float(np.sum(vals) * profile.grid.dq)


def spatial_derivative(field, grid: GridSpec | None = None):
    """Spectral d/dq of a RealProfile or of a raw (real or complex) array.

    Multiplies by ik in the transform domain with the Nyquist mode zeroed,
    so real input yields real output.  Exact for band-limited inputs; the
    caller is responsible for the input being smooth relative to the grid.
    """
    if isinstance(field, RealProfile):
        deriv = spatial_derivative(field.values, field.grid)
        return RealProfile(field.grid, deriv, field.mask.copy())
    if grid is None:
        raise ValueError("grid is required when differentiating a raw array")
    values = np.asarray(field)
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.dq)
    k[grid.n // 2] = 0.0
    out = sfft.ifft(1j * k * sfft.fft(values))
    if not np.iscomplexobj(values):
        return out.real
    return out
