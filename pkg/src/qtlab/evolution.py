"""Time evolution for H = p^2/2m + V(x).

Two routes are provided and cross-checked in the tests:

* evolve() -- second-order Strang-split spectral stepping
  exp(-i*V*dt/2) exp(-i*K*dt) exp(-i*V*dt/2);
* kernel_propagate() -- direct quadrature against the exact two-point
  kernel exp(i*S_eps(x, x0)) of the free and harmonic problems, with the
  stationary-phase normalization and half-period (Maslov) phase tracking.

two_point_action() returns S_eps itself; endpoint_momenta() returns the
final/initial momenta dS/dx and -dS/dx0, verified internally against
central finite differences of the action.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryLeakError,
    CausticError,
    ConsistencyError,
    StabilityError,
    ValidationError,
)
from .grid import Grid1D, WaveFunction, spectral_diff

__all__ = [
    "Potential",
    "EvolutionConfig",
    "SnapshotSeries",
    "evolve",
    "energy",
    "apply_hamiltonian",
    "two_point_action",
    "endpoint_momenta",
    "kernel_propagate",
]

# |psi| above this at an edge point aborts a run.
_LEAK_TOL = 1e-8
# Central-difference step scale for the momentum cross-check.
_FD_SCALE = 1e-6
# Allowed relative disagreement between analytic and differenced momenta.
_FD_RTOL = 1e-7


@dataclass(frozen=True)
class Potential:
    """Tagged potential: free, harmonic(k), barrier(height, half_width), or sampled."""

    kind: str
    k_spring: float = 0.0
    height: float = 0.0
    half_width: float = 0.0
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "barrier", "sampled"):
            raise ValidationError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic" and not self.k_spring > 0.0:
            raise ValidationError("harmonic potential requires k_spring > 0")
        if self.kind == "sampled":
            if self.samples is None:
                raise ValidationError("sampled potential requires samples")
            arr = np.asarray(self.samples, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValidationError("sampled potential must be real and finite")
            arr.setflags(write=False)
            object.__setattr__(self, "samples", arr)

    @classmethod
    def free(cls) -> "Potential":
        return cls(kind="free")

    @classmethod
    def harmonic(cls, k_spring: float) -> "Potential":
        return cls(kind="harmonic", k_spring=k_spring)

    @classmethod
    def barrier(cls, height: float, half_width: float) -> "Potential":
        return cls(kind="barrier", height=height, half_width=half_width)

    @classmethod
    def sampled(cls, samples: np.ndarray) -> "Potential":
        return cls(kind="sampled", samples=samples)

    def values(self, grid: Grid1D) -> np.ndarray:
        x = grid.x
        if self.kind == "free":
            return np.zeros(grid.n)
        if self.kind == "harmonic":
            return 0.5 * self.k_spring * x**2
        if self.kind == "barrier":
            return np.where(np.abs(x) <= self.half_width, self.height, 0.0)
        v = np.asarray(self.samples, dtype=np.float64)
        if v.shape != (grid.n,):
            raise ValidationError("sampled potential does not match the grid")
        return v

    def gradient(self, grid: Grid1D) -> np.ndarray:
        """dV/dx; analytic for free/harmonic, spectral for sampled."""
        if self.kind == "free":
            return np.zeros(grid.n)
        if self.kind == "harmonic":
            return self.k_spring * grid.x
        if self.kind == "barrier":
            raise ValidationError("barrier potential has no pointwise gradient")
        return spectral_diff(self.values(grid), grid.dx, 1)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    mass: float
    potential: Potential
    snapshot_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationError("dt must be positive")
        if self.steps < 0:
            raise ValidationError("steps must be non-negative")
        if not self.mass > 0.0:
            raise ValidationError("mass must be positive")
        if self.snapshot_stride < 1:
            raise ValidationError("snapshot_stride must be >= 1")

    def check_stability(self, grid: Grid1D) -> None:
        """Heuristic accuracy bounds: dt*max|V| < 0.5 and dt*max(k^2)/2m < 0.5."""
        vmax = float(np.max(np.abs(self.potential.values(grid))))
        kin_max = float(np.max(grid.k**2)) / (2.0 * self.mass)
        if self.dt * vmax >= 0.5:
            raise StabilityError(
                f"dt*max|V| = {self.dt * vmax:.3g} >= 0.5; reduce dt")
        if self.dt * kin_max >= 0.5:
            raise StabilityError(
                f"dt*max(k^2)/2m = {self.dt * kin_max:.3g} >= 0.5; reduce dt")


@dataclass(frozen=True)
class SnapshotSeries:
    """Ordered wavefunction snapshots on a shared grid."""

    times: np.ndarray
    states: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != times.shape[0]:
            raise ValidationError("one state per time required")
        if times.shape[0] >= 2 and not np.all(np.diff(times) > 0.0):
            raise ValidationError("snapshot times must be strictly increasing")
        for s in self.states:
            if abs(s.norm2() - 1.0) > 1e-8:
                raise ValidationError(
                    f"snapshot at t = {s.t} is not normalized (norm^2 = {s.norm2()})")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def grid(self) -> Grid1D:
        return self.states[0].grid

    def uniform_dt(self) -> float:
        gaps = np.diff(self.times)
        if gaps.size == 0:
            raise ValidationError("series has a single snapshot")
        if not np.allclose(gaps, gaps[0], rtol=1e-9, atol=0.0):
            raise ValidationError("snapshot spacing is not uniform")
        return float(gaps[0])


def _check_leak(amps: np.ndarray, t: float) -> None:
    edge = max(abs(amps[0]), abs(amps[-1]))
    if edge > _LEAK_TOL:
        raise BoundaryLeakError(
            f"|psi| = {edge:.3e} at the domain edge at t = {t:.6g}; "
            "enlarge the domain or shorten the run")


def evolve(psi0: WaveFunction, cfg: EvolutionConfig) -> SnapshotSeries:
    """Strang-split evolution; snapshots every cfg.snapshot_stride steps.

    The final step is always recorded, so the series holds
    ceil(steps/stride) + 1 snapshots.
    """
    grid = psi0.grid
    cfg.check_stability(grid)
    _check_leak(psi0.amps, psi0.t)

    v = cfg.potential.values(grid)
    half_v = np.exp(-0.5j * cfg.dt * v)
    kinetic = np.exp(-0.5j * cfg.dt * grid.k**2 / cfg.mass)

    amps = psi0.amps.copy()
    times = [psi0.t]
    states = [WaveFunction(grid, amps.copy(), psi0.t)]
    for step in range(1, cfg.steps + 1):
        amps *= half_v
        amps = np.fft.ifft(kinetic * np.fft.fft(amps))
        amps *= half_v
        if step % cfg.snapshot_stride == 0 or step == cfg.steps:
            t = psi0.t + step * cfg.dt
            _check_leak(amps, t)
            times.append(t)
            states.append(WaveFunction(grid, amps.copy(), t))
    return SnapshotSeries(np.asarray(times), tuple(states))


def apply_hamiltonian(psi: WaveFunction, mass: float, potential: Potential) -> np.ndarray:
    """H psi = -psi''/2m + V psi, spectral second derivative."""
    lap = spectral_diff(psi.amps, psi.grid.dx, 2)
    return -lap / (2.0 * mass) + potential.values(psi.grid) * psi.amps


def energy(psi: WaveFunction, mass: float, potential: Potential) -> float:
    """<psi|H|psi> for a normalized state."""
    h_psi = apply_hamiltonian(psi, mass, potential)
    return float(np.real(np.sum(np.conj(psi.amps) * h_psi)) * psi.grid.dx)


def _omega(potential: Potential, mass: float) -> float:
    return np.sqrt(potential.k_spring / mass)


def _require_quadratic(potential: Potential) -> None:
    if potential.kind not in ("free", "harmonic"):
        raise ValidationError(
            "two-point kernels are available for free and harmonic potentials only")


def two_point_action(potential: Potential, mass: float, x, x0, eps: float):
    """Two-point action S_eps(x, x0) of the exact short-kernel.

    free:      m (x - x0)^2 / (2 eps)
    harmonic:  m w [(x^2 + x0^2) cos(w eps) - 2 x x0] / (2 sin(w eps))
    """
    _require_quadratic(potential)
    if not eps > 0.0:
        raise ValidationError("eps must be positive")
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if potential.kind == "free":
        return mass * (x - x0) ** 2 / (2.0 * eps)
    w = _omega(potential, mass)
    s = np.sin(w * eps)
    if abs(s) < 1e-12:
        raise CausticError(f"sin(omega*eps) = {s:.3e}: kernel caustic at eps = {eps}")
    return mass * w * ((x**2 + x0**2) * np.cos(w * eps) - 2.0 * x * x0) / (2.0 * s)


def endpoint_momenta(potential: Potential, mass: float, x, x0, eps: float):
    """(p_final, p_initial) = (dS/dx, -dS/dx0) of the two-point action.

    Both momenta are computed analytically and re-derived by central
    finite differences of two_point_action; disagreement beyond 1e-7
    relative raises ConsistencyError.
    """
    _require_quadratic(potential)
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    if potential.kind == "free":
        p_final = mass * (x - x0) / eps
        p_initial = p_final
    else:
        w = _omega(potential, mass)
        s = np.sin(w * eps)
        if abs(s) < 1e-12:
            raise CausticError(f"sin(omega*eps) = {s:.3e}: kernel caustic at eps = {eps}")
        c = np.cos(w * eps)
        p_final = mass * w * (x * c - x0) / s
        p_initial = mass * w * (x - x0 * c) / s

    h_x = _FD_SCALE * np.maximum(1.0, np.abs(x))
    h_x0 = _FD_SCALE * np.maximum(1.0, np.abs(x0))
    act = lambda a, b: two_point_action(potential, mass, a, b, eps)
    p_final_fd = (act(x + h_x, x0) - act(x - h_x, x0)) / (2.0 * h_x)
    p_initial_fd = -(act(x, x0 + h_x0) - act(x, x0 - h_x0)) / (2.0 * h_x0)
    for analytic, fd, name in ((p_final, p_final_fd, "p_final"),
                               (p_initial, p_initial_fd, "p_initial")):
        scale = np.maximum(1.0, np.abs(analytic))
        if np.any(np.abs(analytic - fd) > _FD_RTOL * scale):
            worst = float(np.max(np.abs(analytic - fd) / scale))
            raise ConsistencyError(
                f"{name}: analytic vs finite-difference defect {worst:.3e} > {_FD_RTOL}")
    return p_final, p_initial


def _kernel_amplitude(potential: Potential, mass: float, eps: float) -> complex:
    """Normalization A with half-period phase tracking.

    free:      exp(-i pi/4) sqrt(m / (2 pi eps))
    harmonic:  exp(-i (pi/4 + mu pi/2)) sqrt(m w / (2 pi |sin(w eps)|)),
               mu = floor(w eps / pi).
    """
    if potential.kind == "free":
        return np.exp(-0.25j * np.pi) * np.sqrt(mass / (2.0 * np.pi * eps))
    w = _omega(potential, mass)
    s = np.sin(w * eps)
    if abs(s) < 1e-12:
        raise CausticError(f"sin(omega*eps) = {s:.3e}: kernel caustic at eps = {eps}")
    mu = int(np.floor(w * eps / np.pi))
    phase = np.exp(-1j * (0.25 * np.pi + 0.5 * np.pi * mu))
    return phase * np.sqrt(mass * w / (2.0 * np.pi * abs(s)))


def kernel_propagate(psi0: WaveFunction, potential: Potential, mass: float,
                     eps: float) -> WaveFunction:
    """psi(x, eps) = A * Integral exp(i S_eps(x, x0)) psi0(x0) dx0.

    Direct O(n^2) quadrature on the grid; requires the state to be
    negligible at the boundary so the non-periodic kernel sees a decayed
    integrand.
    """
    _require_quadratic(potential)
    grid = psi0.grid
    _check_leak(psi0.amps, psi0.t)
    x = grid.x
    s_matrix = two_point_action(potential, mass, x[:, None], x[None, :], eps)
    amp = _kernel_amplitude(potential, mass, eps)
    out = amp * (np.exp(1j * s_matrix) @ psi0.amps) * grid.dx
    return WaveFunction(grid, out, psi0.t + eps)
