"""Classical quadratic flows and their double-cover action on Gaussians.

classical_flow() gives the exact Sp(2) matrix of H = p^2/2m + K x^2/2;
generating_function() the quadratic two-point action S = a x^2 + b x x0
+ c x0^2 whose derivatives reproduce the flow (p = dS/dx,
p0 = -dS/dx0).

metaplectic_step() moves a Gaussian ansatz

    psi(x) = exp(i alpha (x - xc)^2 + i pc (x - xc) + kappa)

by the Moebius action of the flow matrix [[A, B], [C, D]]:

    alpha' = (C + 2 D alpha) / (2 (A + 2 B alpha)),

with prefactor w^(-1/2), w = A + 2 B alpha, whose complex argument is
tracked continuously through caustics (closed-form phase tracking, no
square-root branch following).  Over one full oscillator period the
classical matrix returns to the identity while arg(w) advances by 2 pi,
so the state picks up the half-turn phase -pi: the 2-to-1 covering made
numerical.  full_period_phase() reads off exactly that phase, and
projection_check() confirms that the Wigner function of the stepped
state is the classically transported Wigner function of the input.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CausticError, ValidationError
from .evolution import Potential
from .grid import Grid1D, WaveFunction
from .phase_space import WignerGrid, wigner

__all__ = [
    "QuadHamiltonian",
    "SymplecticMap",
    "GeneratingFunction",
    "GaussianState",
    "classical_flow",
    "generating_function",
    "metaplectic_step",
    "projection_check",
    "full_period_phase",
]


@dataclass(frozen=True)
class QuadHamiltonian:
    """H = p^2/2m + K x^2/2 with K >= 0 (K = 0 is the free particle)."""

    mass: float
    k_spring: float = 0.0

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValidationError("mass must be positive")
        if self.k_spring < 0.0:
            raise ValidationError("k_spring must be non-negative")

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.k_spring / self.mass))

    @property
    def is_free(self) -> bool:
        return self.k_spring == 0.0

    def potential(self) -> Potential:
        if self.is_free:
            return Potential.free()
        return Potential.harmonic(self.k_spring)

    def value(self, x: float, p: float) -> float:
        return p**2 / (2.0 * self.mass) + 0.5 * self.k_spring * x**2


@dataclass(frozen=True)
class SymplecticMap:
    """2x2 matrix acting on (x, p); det = 1 within 1e-12."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.shape != (2, 2):
            raise ValidationError("symplectic map must be a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > 1e-12:
            raise ValidationError(f"matrix is not symplectic: det = {det}")

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        return SymplecticMap(self.matrix @ other.matrix)

    def apply(self, x: float, p: float):
        m = self.matrix
        return m[0, 0] * x + m[0, 1] * p, m[1, 0] * x + m[1, 1] * p

    def inverse(self) -> "SymplecticMap":
        m = self.matrix
        return SymplecticMap(np.array([[m[1, 1], -m[0, 1]],
                                       [-m[1, 0], m[0, 0]]]))


def classical_flow(h: QuadHamiltonian, t: float) -> SymplecticMap:
    """Exact flow matrix: free shear or harmonic rotation."""
    if h.is_free:
        return SymplecticMap(np.array([[1.0, t / h.mass], [0.0, 1.0]]))
    w = h.omega
    c, s = np.cos(w * t), np.sin(w * t)
    return SymplecticMap(np.array([[c, s / (h.mass * w)],
                                   [-h.mass * w * s, c]]))


@dataclass(frozen=True)
class GeneratingFunction:
    """Quadratic two-point action S(x, x0) = a x^2 + b x x0 + c x0^2."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.b == 0.0:
            raise ValidationError("generating function requires d2S/dx dx0 = b != 0")

    def action(self, x, x0):
        return self.a * np.asarray(x) ** 2 + self.b * np.asarray(x) * np.asarray(x0) \
            + self.c * np.asarray(x0) ** 2

    def p_final(self, x, x0):
        return 2.0 * self.a * np.asarray(x) + self.b * np.asarray(x0)

    def p_initial(self, x, x0):
        return -(self.b * np.asarray(x) + 2.0 * self.c * np.asarray(x0))


def generating_function(h: QuadHamiltonian, t: float) -> GeneratingFunction:
    """Coefficients (a, b, c); caustics (sin(wt) = 0, or t = 0) are errors."""
    if h.is_free:
        if t == 0.0:
            raise CausticError("free generating function does not exist at t = 0")
        half = h.mass / (2.0 * t)
        return GeneratingFunction(a=half, b=-2.0 * half, c=half)
    w = h.omega
    s = np.sin(w * t)
    if abs(s) < 1e-12:
        raise CausticError(f"sin(omega t) = {s:.3e}: caustic at t = {t}")
    mw = h.mass * w
    return GeneratingFunction(a=mw * np.cos(w * t) / (2.0 * s),
                              b=-mw / s,
                              c=mw * np.cos(w * t) / (2.0 * s))


@dataclass(frozen=True)
class GaussianState:
    """Gaussian ansatz exp(i alpha (x-xc)^2 + i pc (x-xc) + log_amp).

    Im(alpha) > 0 for normalizability; a packet of position spread sigma
    has alpha = i/(4 sigma^2).  Re(log_amp) fixes the norm, Im(log_amp)
    is the global phase.
    """

    alpha: complex
    center: tuple
    log_amp: complex

    def __post_init__(self):
        if not np.imag(self.alpha) > 0.0:
            raise ValidationError("GaussianState requires Im(alpha) > 0")

    @classmethod
    def from_packet(cls, sigma: float, x0: float = 0.0, p0: float = 0.0,
                    phase: float = 0.0) -> "GaussianState":
        if not sigma > 0.0:
            raise ValidationError("sigma must be positive")
        alpha = 0.25j / sigma**2
        log_amp = 0.25 * np.log(2.0 * np.imag(alpha) / np.pi) + 1j * phase
        return cls(alpha=alpha, center=(x0, p0), log_amp=log_amp)

    @property
    def sigma(self) -> float:
        return float(1.0 / np.sqrt(4.0 * np.imag(self.alpha)))

    @property
    def phase(self) -> float:
        return float(np.imag(self.log_amp))

    def to_wavefunction(self, grid: Grid1D, t: float = 0.0) -> WaveFunction:
        xc, pc = self.center
        dx = grid.x - xc
        amps = np.exp(1j * self.alpha * dx**2 + 1j * pc * dx + self.log_amp)
        return WaveFunction(grid, amps, t)

    def wigner_values(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Closed-form Wigner function on a meshgrid (x rows, p columns)."""
        xc, pc = self.center
        im, re = np.imag(self.alpha), np.real(self.alpha)
        dx = np.asarray(x)[:, None] - xc
        dp = np.asarray(p)[None, :] - pc - 2.0 * re * dx
        return (1.0 / np.pi) * np.exp(-2.0 * im * dx**2 - dp**2 / (2.0 * im))


def _tracked_argument(h: QuadHamiltonian, alpha: complex, t: float) -> tuple:
    """w = A + 2 B alpha and its continuously tracked argument.

    For the oscillator, arg(w) crosses multiples of pi exactly when
    sin(wt) does, so theta = pi*floor(wt/pi) + principal argument of
    w * (-1)^floor(wt/pi).  The free-particle w stays in the upper half
    plane and needs no tracking.
    """
    flow = classical_flow(h, t)
    m = flow.matrix
    w = m[0, 0] + 2.0 * m[0, 1] * alpha
    if h.is_free:
        theta = float(np.angle(w))
    else:
        half_turns = int(np.floor(h.omega * t / np.pi))
        rotated = w * (-1.0) ** half_turns
        theta = np.pi * half_turns + float(np.angle(rotated))
    return flow, w, theta


def _center_action(h: QuadHamiltonian, x0: float, p0: float, t: float) -> float:
    """Integral of (p xdot - H) along the classical center path, closed form."""
    if h.is_free:
        return p0**2 * t / (2.0 * h.mass)
    w = h.omega
    s2, c2 = np.sin(2.0 * w * t), np.cos(2.0 * w * t)
    term = (p0**2 - (h.mass * w * x0) ** 2) * s2 / (2.0 * w) \
        - 2.0 * h.mass * w * x0 * p0 * (1.0 - c2) / (2.0 * w)
    return float(term / (2.0 * h.mass))


def metaplectic_step(g: GaussianState, h: QuadHamiltonian, t: float) -> GaussianState:
    """Propagate a Gaussian ansatz for time t >= 0 under a quadratic flow."""
    if t < 0.0:
        raise ValidationError("metaplectic step requires t >= 0")
    if t == 0.0:
        return g
    flow, w, theta = _tracked_argument(h, g.alpha, t)
    m = flow.matrix
    alpha_new = (m[1, 0] + 2.0 * m[1, 1] * g.alpha) / (2.0 * w)
    if not np.imag(alpha_new) > 0.0:
        raise ValidationError("metaplectic step lost normalizability (Im alpha <= 0)")
    xc, pc = g.center
    center_new = flow.apply(xc, pc)
    action = _center_action(h, xc, pc, t)
    log_amp_new = g.log_amp - 0.5 * (np.log(abs(w)) + 1j * theta) + 1j * action
    return GaussianState(alpha=complex(alpha_new), center=center_new,
                         log_amp=complex(log_amp_new))


def projection_check(g: GaussianState, h: QuadHamiltonian, t: float,
                     grid: Grid1D) -> float:
    """Max-abs defect between the stepped state's Wigner function and the
    classical transport F0(M(t)^-1 (X, P)) of the input's."""
    stepped = metaplectic_step(g, h, t)
    numeric: WignerGrid = wigner(stepped.to_wavefunction(grid, t))
    minv = classical_flow(h, t).inverse().matrix
    big_x = grid.x[:, None]
    big_p = grid.p[None, :]
    x_back = minv[0, 0] * big_x + minv[0, 1] * big_p
    p_back = minv[1, 0] * big_x + minv[1, 1] * big_p
    xc, pc = g.center
    im, re = np.imag(g.alpha), np.real(g.alpha)
    dx = x_back - xc
    dp = p_back - pc - 2.0 * re * dx
    transported = (1.0 / np.pi) * np.exp(-2.0 * im * dx**2 - dp**2 / (2.0 * im))
    return float(np.max(np.abs(numeric.values - transported)))


def full_period_phase(h: QuadHamiltonian, g: GaussianState) -> float:
    """Global phase acquired over one full period 2 pi / omega.

    The classical flow returns to the identity; the state returns with
    phase -pi (sign flip), closing only after two periods.
    """
    if h.is_free:
        raise ValidationError("full period requires an oscillator (K > 0)")
    period = 2.0 * np.pi / h.omega
    stepped = metaplectic_step(g, h, period)
    return float(np.imag(stepped.log_amp - g.log_amp))
