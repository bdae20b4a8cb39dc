"""Spatial grid, wavefunction containers, and spectral operations.

Conventions (natural units, hbar = 1):

* the grid is periodic with points x_j = x_min + j*dx, j = 0..n-1,
  domain length L = n*dx, and n a power of two;
* Fourier wavenumbers follow FFT ordering with max |k| = pi/dx;
* the position<->momentum transform is the unitary pair
  phi(p) = (2*pi)^(-1/2) * Integral psi(x) exp(-i*p*x) dx, so Parseval
  holds and round trips are exact to rounding.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BoundaryLeakError, GridError, ResolutionError, ValidationError

__all__ = [
    "Grid1D",
    "WaveFunction",
    "MomentumWaveFunction",
    "make_gaussian",
    "superpose",
    "to_momentum",
    "to_position",
    "spectral_derivative",
    "spectral_diff",
    "inner",
    "norm2",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic 1D grid."""

    n: int
    x_min: float
    dx: float

    def __post_init__(self):
        if self.n < 8 or not _is_power_of_two(self.n):
            raise GridError(f"grid size must be a power of two >= 8, got {self.n}")
        if not (self.dx > 0.0 and np.isfinite(self.dx)):
            raise GridError(f"grid spacing must be positive, got {self.dx}")
        if not np.isfinite(self.x_min):
            raise GridError("x_min must be finite")

    @property
    def length(self) -> float:
        return self.n * self.dx

    @cached_property
    def x(self) -> np.ndarray:
        xs = self.x_min + self.dx * np.arange(self.n)
        xs.setflags(write=False)
        return xs

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers in FFT ordering; max |k| = pi/dx."""
        ks = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        ks.setflags(write=False)
        return ks

    @property
    def dp(self) -> float:
        """Momentum-grid spacing of the conjugate (FFT) grid."""
        return 2.0 * np.pi / self.length

    @cached_property
    def p(self) -> np.ndarray:
        """Momentum grid in ascending order."""
        ps = np.fft.fftshift(self.k).copy()
        ps.setflags(write=False)
        return ps

    @classmethod
    def from_extent(cls, n: int, x_min: float, x_max: float) -> "Grid1D":
        return cls(n=n, x_min=x_min, dx=(x_max - x_min) / n)


def _check_amps(grid: Grid1D, amps: np.ndarray) -> np.ndarray:
    amps = np.asarray(amps, dtype=np.complex128)
    if amps.shape != (grid.n,):
        raise ValidationError(f"amplitude array has shape {amps.shape}, expected ({grid.n},)")
    if not np.all(np.isfinite(amps.view(np.float64))):
        raise ValidationError("amplitudes contain NaN or Inf")
    return amps


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a position grid at one instant."""

    grid: Grid1D
    amps: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        amps = _check_amps(self.grid, self.amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def norm2(self) -> float:
        """Squared L2 norm, Sum |psi_j|^2 * dx."""
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        n2 = self.norm2()
        if n2 <= 0.0 or not np.isfinite(n2):
            raise ValidationError(f"cannot normalize state with norm^2 = {n2}")
        return WaveFunction(self.grid, self.amps / np.sqrt(n2), self.t)

    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def edge_amplitude(self) -> float:
        return float(max(abs(self.amps[0]), abs(self.amps[-1])))


@dataclass(frozen=True)
class MomentumWaveFunction:
    """Complex amplitudes on the conjugate momentum grid (ascending p)."""

    grid: Grid1D
    amps: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        amps = _check_amps(self.grid, self.amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def p(self) -> np.ndarray:
        return self.grid.p

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dp)

    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def inner(a: WaveFunction, b: WaveFunction) -> complex:
    """<a|b> = Sum conj(a_j) b_j dx."""
    if a.grid != b.grid:
        raise ValidationError("inner product requires a shared grid")
    return complex(np.sum(np.conj(a.amps) * b.amps) * a.grid.dx)


def norm2(a: WaveFunction) -> float:
    return a.norm2()


# Amplitude ratio below which a Gaussian tail counts as negligible.
_TAIL_TOL = 1e-12


def make_gaussian(grid: Grid1D, x0: float, p0: float, sigma: float) -> WaveFunction:
    """Normalized Gaussian packet exp(-(x-x0)^2/(4 sigma^2) + i p0 x).

    sigma is the standard deviation of |psi|^2.  Raises ResolutionError
    when sigma is not resolvable on the grid and BoundaryLeakError when
    the envelope does not decay below 1e-12 at the domain edges.
    """
    if not (sigma > 3.0 * grid.dx):
        raise ResolutionError(
            f"sigma = {sigma} must exceed 3*dx = {3.0 * grid.dx} for the grid to resolve it")
    x_lo, x_hi = grid.x_min, grid.x_min + grid.length
    for edge in (x_lo, x_hi):
        if np.exp(-((edge - x0) ** 2) / (4.0 * sigma**2)) >= _TAIL_TOL:
            raise BoundaryLeakError(
                f"Gaussian tail at boundary x = {edge} exceeds {_TAIL_TOL}")
    x = grid.x
    amps = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x)
    return WaveFunction(grid, amps).normalized()


def superpose(states: Sequence[WaveFunction], weights: Sequence[complex] | None = None) -> WaveFunction:
    """Normalized linear combination of states on a shared grid."""
    if not states:
        raise ValidationError("superpose needs at least one state")
    grid = states[0].grid
    if weights is None:
        weights = [1.0] * len(states)
    if len(weights) != len(states):
        raise ValidationError("one weight per state required")
    amps = np.zeros(grid.n, dtype=np.complex128)
    for w, s in zip(weights, states):
        if s.grid != grid:
            raise ValidationError("superpose requires a shared grid")
        amps = amps + w * s.amps
    return WaveFunction(grid, amps, states[0].t).normalized()


def to_momentum(psi: WaveFunction) -> MomentumWaveFunction:
    """Unitary transform to the momentum representation."""
    grid = psi.grid
    phase = np.exp(-1j * grid.k * grid.x_min)
    amps_p = np.fft.fft(psi.amps) * (grid.dx / np.sqrt(2.0 * np.pi)) * phase
    return MomentumWaveFunction(grid, np.fft.fftshift(amps_p), psi.t)


def to_position(phi: MomentumWaveFunction) -> WaveFunction:
    """Inverse of to_momentum."""
    grid = phi.grid
    amps_p = np.fft.ifftshift(phi.amps)
    phase = np.exp(1j * grid.k * grid.x_min)
    amps = np.fft.ifft(amps_p * phase) * (np.sqrt(2.0 * np.pi) / grid.dx)
    return WaveFunction(grid, amps, phi.t)


def spectral_diff(values: np.ndarray, spacing: float, order: int = 1) -> np.ndarray:
    """Spectral derivative of a periodic sampled field (any complex array)."""
    if order not in (1, 2):
        raise ValidationError(f"derivative order must be 1 or 2, got {order}")
    values = np.asarray(values)
    n = values.shape[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(values))
    if np.isrealobj(values):
        return out.real
    return out


def spectral_derivative(psi: WaveFunction, order: int = 1) -> np.ndarray:
    """d^order psi / dx^order via multiplication by (ik)^order in Fourier space."""
    return spectral_diff(psi.amps, psi.grid.dx, order)
