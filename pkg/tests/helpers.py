"""Shared analytic oracles and small utilities for the test suite.

Everything here is independent of the code paths under test: closed-form
solutions, brute-force discrete transforms, and finite differences.
"""

import numpy as np

from qtlab import Grid1D, WaveFunction, make_gaussian, superpose


def l2_distance(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * dx))


def free_gaussian_exact(x, t, x0, p0, sigma, mass):
    """Closed-form free evolution of exp(-(x-x0)^2/4s^2 + i p0 x)."""
    beta = 1.0 + 1j * t / (2.0 * mass * sigma**2)
    return ((2.0 * np.pi * sigma**2) ** -0.25 / np.sqrt(beta)
            * np.exp(-((x - x0 - p0 * t / mass) ** 2) / (4.0 * sigma**2 * beta)
                     + 1j * p0 * (x - x0) - 1j * p0**2 * t / (2.0 * mass)
                     + 1j * p0 * x0))


def coherent_exact(x, t, xc0, pc0, mass=1.0, omega=1.0):
    """Closed-form oscillator coherent state following the classical orbit."""
    xc = xc0 * np.cos(omega * t) + pc0 / (mass * omega) * np.sin(omega * t)
    pc = pc0 * np.cos(omega * t) - mass * omega * xc0 * np.sin(omega * t)
    return ((mass * omega / np.pi) ** 0.25 * np.exp(-0.5j * omega * t)
            * np.exp(-mass * omega * (x - xc) ** 2 / 2.0
                     + 1j * pc * x - 0.5j * xc * pc))


def oscillator_eigenstate(grid: Grid1D, level: int, mass=1.0, omega=1.0) -> WaveFunction:
    """Normalized n = 0 or n = 1 oscillator eigenstate on the grid."""
    x = grid.x
    envelope = np.exp(-mass * omega * x**2 / 2.0)
    if level == 0:
        amps = envelope
    elif level == 1:
        amps = x * envelope
    else:
        raise ValueError("only levels 0 and 1 are provided")
    return WaveFunction(grid, amps.astype(complex)).normalized()


def random_superposition(grid: Grid1D, rng: np.random.Generator,
                         n_packets=(3, 7)) -> WaveFunction:
    """Random multi-Gaussian state, boundary safe on a [-20, 20] grid."""
    k = int(rng.integers(*n_packets))
    states, weights = [], []
    for _ in range(k):
        states.append(make_gaussian(grid,
                                    float(rng.uniform(-5.0, 5.0)),
                                    float(rng.uniform(-2.0, 2.0)),
                                    float(rng.uniform(0.7, 1.3))))
        weights.append(complex(rng.normal(), rng.normal()))
    return superpose(states, weights)


def dft_momentum_oracle(psi: WaveFunction):
    """Brute-force O(n^2) transform phi(p) = (2 pi)^(-1/2) Sum psi e^(-ipx) dx.

    Independent of np.fft; returns (p sorted ascending, phi values).
    """
    grid = psi.grid
    p = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx))
    phase = np.exp(-1j * np.outer(p, grid.x))
    phi = phase @ psi.amps * grid.dx / np.sqrt(2.0 * np.pi)
    return p, phi


def wigner_brute_force(psi: WaveFunction):
    """Direct quadrature Wigner transform on the same (X, P) lattice.

    F(X, P) = (2 pi)^-1 Sum_eta conj(psi)(X - eta/2) psi(X + eta/2)
    e^(-i eta P) d eta with eta = l*dx, half-grid samples by band-limited
    interpolation computed through an explicit DFT sum (no np.fft reuse
    beyond frequency bookkeeping).
    """
    grid = psi.grid
    n = grid.n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=grid.dx)
    # Band-limited interpolator evaluated on integer and half-integer points.
    coef = np.array([np.sum(psi.amps * np.exp(-1j * kk * grid.x)) / n for kk in k])

    def sample(points):
        return np.array([np.sum(coef * np.exp(1j * k * xx)) for xx in points])

    p_axis = np.fft.fftshift(k).copy()
    lags = np.arange(-n // 2, n // 2)
    values = np.zeros((n, n))
    for a, xa in enumerate(grid.x):
        pts_plus = xa + lags * grid.dx / 2.0
        pts_minus = xa - lags * grid.dx / 2.0
        corr = np.conj(sample(pts_minus)) * sample(pts_plus)
        for b, pb in enumerate(p_axis):
            values[a, b] = np.real(
                np.sum(corr * np.exp(-1j * lags * grid.dx * pb)) * grid.dx
                / (2.0 * np.pi))
    return values
