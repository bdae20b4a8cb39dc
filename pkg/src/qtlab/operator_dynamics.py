"""Finite-dimensional density-operator dynamics in the number basis.

The spring Hamiltonian H = p^2/2m + K x^2/2 is diagonal in its number
basis, which gives an exact evolution oracle by phase conjugation next
to the RK4 integration of the commutator equation i d(rho)/dt = [H, rho].
The anti-commutator identity i(d|psi>/dt <psi| - |psi> d<psi|/dt)
= [H, rho]_+ is checked with the exact time derivative -iH|psi>.

projected_pair() projects both equations onto the position basis of a
grid run: the commutator projection reproduces the continuity residual
and the anti-commutator projection reproduces 2 rho(x) times the
phase-transport residual.  Neither operator-level equation references
the quantum potential; it appears only through the projection.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StabilityError, TruncationError, ValidationError
from .evolution import Potential, SnapshotSeries, apply_hamiltonian
from .madelung import (
    ResidualSeries,
    _anchored_phase_series,
    _density_mask,
    _interior_join,
    _masked,
)

__all__ = [
    "BasisConfig",
    "DensityMatrix",
    "number_energies",
    "position_operator",
    "coherent_vector",
    "evolve_commutator",
    "exact_conjugation",
    "schrodinger_states",
    "anticommutator_residual",
    "projected_pair",
]

# Basis-truncation tail tolerance for constructed states.
_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class BasisConfig:
    n_basis: int
    k_spring: float
    mass: float

    def __post_init__(self):
        if self.n_basis < 8:
            raise ValidationError("number basis needs at least 8 levels")
        if not (self.k_spring > 0.0 and self.mass > 0.0):
            raise ValidationError("k_spring and mass must be positive")

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.k_spring / self.mass))


def number_energies(cfg: BasisConfig) -> np.ndarray:
    return cfg.omega * (np.arange(cfg.n_basis) + 0.5)


def lowering_operator(cfg: BasisConfig) -> np.ndarray:
    a = np.zeros((cfg.n_basis, cfg.n_basis), dtype=np.complex128)
    ns = np.arange(1, cfg.n_basis)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def position_operator(cfg: BasisConfig) -> np.ndarray:
    a = lowering_operator(cfg)
    return (a + a.conj().T) / np.sqrt(2.0 * cfg.mass * cfg.omega)


def coherent_vector(cfg: BasisConfig, alpha: complex) -> np.ndarray:
    """Truncated coherent state; requires Poisson tail mass < 1e-10."""
    amps = np.zeros(cfg.n_basis, dtype=np.complex128)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, cfg.n_basis):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    tail = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if tail > _TAIL_TOL:
        raise TruncationError(
            f"coherent state alpha={alpha} has tail mass {tail:.3e} > {_TAIL_TOL} "
            f"in an {cfg.n_basis}-level basis")
    return amps / np.linalg.norm(amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Pure rho = |psi><psi| or transition rho = |psi><phi|."""

    matrix: np.ndarray
    flavor: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("density matrix must be square")
        if self.flavor == "pure":
            if np.max(np.abs(m - m.conj().T)) > 1e-12:
                raise ValidationError("pure density matrix must be Hermitian")
            if abs(np.trace(m) - 1.0) > 1e-12:
                raise ValidationError("pure density matrix must have unit trace")
            if np.linalg.norm(m @ m - m) > 1e-10:
                raise ValidationError("pure density matrix must satisfy rho^2 = rho")
        elif self.flavor == "transition":
            s = np.linalg.svd(m, compute_uv=False)
            if s[0] <= 0.0 or (s.size > 1 and s[1] > 1e-10 * s[0]):
                raise ValidationError("transition density matrix must have rank 1")
        else:
            raise ValidationError(f"unknown density-matrix flavor {self.flavor!r}")

    @classmethod
    def pure(cls, vec: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vec, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), "pure")

    @classmethod
    def transition(cls, psi: np.ndarray, phi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128)
        phi = np.asarray(phi, dtype=np.complex128)
        return cls(np.outer(psi, phi.conj()), "transition")

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def _commutator_diag(energies: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """[H, rho] for diagonal H."""
    return energies[:, None] * rho - rho * energies[None, :]


def evolve_commutator(rho0: DensityMatrix, cfg: BasisConfig, t: float,
                      dt: float | None = None) -> DensityMatrix:
    """RK4 integration of i d(rho)/dt = [H, rho] to time t.

    The step must satisfy dt <= 1e-3/omega; the default splits t into
    the fewest steps honoring that bound.
    """
    if rho0.matrix.shape[0] != cfg.n_basis:
        raise ValidationError("density matrix does not match the basis size")
    if t < 0.0:
        raise ValidationError("t must be non-negative")
    dt_max = 1e-3 / cfg.omega
    if dt is None:
        steps = max(1, int(np.ceil(t / dt_max))) if t > 0 else 0
    else:
        if dt > dt_max:
            raise StabilityError(f"dt = {dt} exceeds 1e-3/omega = {dt_max}")
        steps = max(1, int(np.ceil(t / dt))) if t > 0 else 0
    energies = number_energies(cfg)
    rho = rho0.matrix.copy()
    if steps:
        h = t / steps
        for _ in range(steps):
            k1 = -1j * _commutator_diag(energies, rho)
            k2 = -1j * _commutator_diag(energies, rho + 0.5 * h * k1)
            k3 = -1j * _commutator_diag(energies, rho + 0.5 * h * k2)
            k4 = -1j * _commutator_diag(energies, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return DensityMatrix(rho, rho0.flavor)


def exact_conjugation(rho0: DensityMatrix, cfg: BasisConfig, t: float) -> DensityMatrix:
    """rho(t) = exp(-iHt) rho0 exp(iHt) via diagonal phases."""
    energies = number_energies(cfg)
    phase = np.exp(-1j * energies * t)
    return DensityMatrix(phase[:, None] * rho0.matrix * np.conj(phase)[None, :],
                         rho0.flavor)


def schrodinger_states(cfg: BasisConfig, psi0: np.ndarray,
                       times: np.ndarray) -> np.ndarray:
    """Exact state trajectory psi(t_k) in the number basis, shape (T, N)."""
    psi0 = np.asarray(psi0, dtype=np.complex128)
    energies = number_energies(cfg)
    times = np.asarray(times, dtype=np.float64)
    return np.exp(-1j * times[:, None] * energies[None, :]) * psi0[None, :]


def anticommutator_residual(states: np.ndarray, cfg: BasisConfig) -> np.ndarray:
    """Frobenius residual of i(dpsi⊗psi - psi⊗dpsi) = [H, rho]_+ per state.

    dpsi/dt is taken from the evolution equation itself (-iH psi), so
    the residual probes the algebraic identity, not time discretization.
    """
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim == 1:
        states = states[None, :]
    energies = number_energies(cfg)
    out = np.empty(states.shape[0])
    for i, psi in enumerate(states):
        dpsi = -1j * energies * psi
        rho = np.outer(psi, psi.conj())
        lhs = 1j * (np.outer(dpsi, psi.conj()) - np.outer(psi, dpsi.conj()))
        h_rho = energies[:, None] * rho
        rhs = h_rho + rho * energies[None, :]
        out[i] = np.linalg.norm(lhs - rhs)
    return out


def projected_pair(series: SnapshotSeries, mass: float, k_spring: float):
    """Position projections of the commutator / anti-commutator equations.

    Returns (continuity, energy) ResidualSeries over interior snapshots:

    continuity: d|psi|^2/dt + <[rho, H]_-> projected on x, evaluated as
                d(rho)/dt - 2 Im(conj(psi) H psi);
    energy:     2 rho dS/dt + <[rho, H]_+> projected on x, evaluated as
                2 rho dS/dt + 2 Re(conj(psi) H psi).

    Both are built from H and rho only; the quantum potential enters
    nowhere here, yet the energy residual equals 2 rho(x) times the
    quantum Hamilton-Jacobi residual of the same run.
    """
    if not k_spring > 0.0:
        raise ValidationError("projected pair requires a harmonic potential")
    if len(series) < 3:
        raise ValidationError("projected pair needs at least 3 snapshots")
    dt = series.uniform_dt()
    potential = Potential.harmonic(k_spring)

    rhos = [s.density() for s in series.states]
    masks = [_density_mask(r) for r in rhos]
    z_fields = []
    for s in series.states:
        h_psi = apply_hamiltonian(s, mass, potential)
        z_fields.append(np.conj(s.amps) * h_psi)
    phases, _, _, _ = _anchored_phase_series(series)

    cont_res = []
    energy_res = []
    out_masks = []
    for i in range(1, len(series) - 1):
        mask = _interior_join(masks, i)
        drho_dt = (rhos[i + 1] - rhos[i - 1]) / (2.0 * dt)
        ds_dt = (phases[i + 1] - phases[i - 1]) / (2.0 * dt)
        cont = drho_dt - 2.0 * np.imag(z_fields[i])
        energy = 2.0 * rhos[i] * ds_dt + 2.0 * np.real(z_fields[i])
        cont_res.append(_masked(cont, mask))
        energy_res.append(_masked(energy, mask))
        out_masks.append(mask)
    times = series.times[1:-1]
    return (ResidualSeries(times, tuple(cont_res), tuple(out_masks)),
            ResidualSeries(times, tuple(energy_res), tuple(out_masks)))
