"""Hydrodynamic fields of a wavefunction.

For psi = R exp(iS) (hbar = 1) this module extracts

* rho = |psi|^2 and the phase-gradient (Bohm) momentum
  p_B = grad S = Im(conj(psi) psi') / rho,
* the osmotic momentum p_o = grad rho / (2 rho),
* the quantum potential Q = -(1/2m) R''/R, evaluated through the
  node-safe identity R''/R = rho''/(2 rho) - rho'^2/(4 rho^2),
* the complex weak momentum value w = (-i psi')/psi with
  Re w = p_B and Im w = -p_o,

and the residuals of the continuity and phase-transport (quantum
Hamilton-Jacobi) equations along a snapshot series, in both the x- and
the p-representation.

Fields are valid only where rho >= rho_floor = 1e-8 * max(rho); masked
points carry NaN.  The phase field S is integrated spatially from the
maximum-density point; across masked gaps its offset is arbitrary.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MaskError, ValidationError
from .evolution import Potential, SnapshotSeries
from .grid import Grid1D, WaveFunction, spectral_diff, to_momentum

__all__ = [
    "MadelungFields",
    "WeakValueField",
    "ResidualSeries",
    "decompose",
    "weak_momentum",
    "bohm_osmotic_split",
    "continuity_residual",
    "qhj_residual",
    "qhj_residual_p",
]

# Relative density floor below which derived fields are undefined.
RHO_FLOOR_REL = 1e-8

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MadelungFields:
    grid: Grid1D
    t: float
    rho: np.ndarray
    phase: np.ndarray          # S, anchored at the maximum-density point
    grad_s: np.ndarray         # Bohm momentum, NaN off mask
    p_osmotic: np.ndarray      # grad rho / (2 rho), NaN off mask
    quantum_potential: np.ndarray  # Q, NaN off mask
    mask: np.ndarray


@dataclass(frozen=True)
class WeakValueField:
    grid: Grid1D
    t: float
    w: np.ndarray              # complex weak momentum value, NaN off mask
    mask: np.ndarray


@dataclass(frozen=True)
class ResidualSeries:
    """Residual fields at the interior snapshots of a series."""

    times: np.ndarray
    residuals: tuple           # arrays with NaN off mask
    masks: tuple

    def max_abs(self) -> float:
        worst = 0.0
        for r, m in zip(self.residuals, self.masks):
            if np.any(m):
                worst = max(worst, float(np.max(np.abs(r[m]))))
        return worst


def _density_mask(rho: np.ndarray) -> np.ndarray:
    peak = float(np.max(rho))
    if peak <= 0.0:
        raise MaskError("state has zero density everywhere")
    mask = rho >= RHO_FLOOR_REL * peak
    if not np.any(mask):
        raise MaskError("density is below the validity floor everywhere")
    return mask


def _check_normalized(psi: WaveFunction) -> None:
    if abs(psi.norm2() - 1.0) > 1e-8:
        raise ValidationError(f"state is not normalized (norm^2 = {psi.norm2()})")


def _masked(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.where(mask, values, np.nan)
    return out


def _cumulative_trapezoid(values: np.ndarray, spacing: float) -> np.ndarray:
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum((values[1:] + values[:-1]) * (0.5 * spacing), out=out[1:])
    return out


def _phase_fields(amps: np.ndarray, spacing: float, rho: np.ndarray,
                  mask: np.ndarray):
    """grad S (NaN off mask), sanitized grad S, and the anchored S field."""
    dpsi = spectral_diff(amps, spacing, 1)
    current = np.imag(np.conj(amps) * dpsi)
    floor = RHO_FLOOR_REL * float(np.max(rho))
    grad_s_safe = current / np.maximum(rho, floor)
    ref = int(np.argmax(rho))
    phase = _cumulative_trapezoid(grad_s_safe, spacing)
    phase = phase - phase[ref] + float(np.angle(amps[ref]))
    return _masked(grad_s_safe, mask), grad_s_safe, phase, ref


def _quantum_potential(rho: np.ndarray, spacing: float, mass: float,
                       mask: np.ndarray) -> np.ndarray:
    # R''/R written in rho to stay finite near nodes, where sqrt(rho)
    # has a kink that would poison a direct spectral second derivative.
    drho = spectral_diff(rho, spacing, 1)
    d2rho = spectral_diff(rho, spacing, 2)
    floor = RHO_FLOOR_REL * float(np.max(rho))
    safe = np.maximum(rho, floor)
    ratio = d2rho / (2.0 * safe) - drho**2 / (4.0 * safe**2)
    return _masked(-ratio / (2.0 * mass), mask)


def decompose(psi: WaveFunction, mass: float = 1.0) -> MadelungFields:
    """Polar decomposition fields of a normalized state.

    grad S is computed as Im(conj(psi) psi')/rho rather than by
    differentiating an unwrapped phase, which avoids 2*pi branch
    ambiguities; S itself is recovered by spatial integration anchored
    at the maximum-density point.
    """
    _check_normalized(psi)
    grid = psi.grid
    rho = psi.density()
    mask = _density_mask(rho)
    grad_s, _, phase, _ = _phase_fields(psi.amps, grid.dx, rho, mask)
    # grad rho / (2 rho) in the product form 2 Re(conj(psi) psi') / (2 rho),
    # sharing the discrete derivative with grad_s and the weak value.
    dpsi = spectral_diff(psi.amps, grid.dx, 1)
    floor = RHO_FLOOR_REL * float(np.max(rho))
    p_osm = _masked(np.real(np.conj(psi.amps) * dpsi) / np.maximum(rho, floor), mask)
    q = _quantum_potential(rho, grid.dx, mass, mask)
    return MadelungFields(grid=grid, t=psi.t, rho=rho, phase=phase,
                          grad_s=grad_s, p_osmotic=p_osm,
                          quantum_potential=q, mask=mask)


def weak_momentum(psi: WaveFunction) -> WeakValueField:
    """Weak value of momentum at each position, w(x) = (-i psi')/psi."""
    _check_normalized(psi)
    rho = psi.density()
    mask = _density_mask(rho)
    dpsi = spectral_diff(psi.amps, psi.grid.dx, 1)
    amps_safe = np.where(mask, psi.amps, 1.0)
    w = np.where(mask, -1j * dpsi / amps_safe, np.nan + 0j)
    return WeakValueField(grid=psi.grid, t=psi.t, w=w, mask=mask)


def bohm_osmotic_split(psi: WaveFunction, mass: float = 1.0):
    """(p_B, p_osmotic) from the symmetric/antisymmetric weak-value combinations.

    p_B = (w + conj(w))/2 and p_osmotic = i (w - conj(w))/2; both are
    checked against the decompose() fields to 1e-10 on the mask.
    """
    field = weak_momentum(psi)
    w = field.w
    p_b = np.real((w + np.conj(w)) / 2.0)
    p_osm = np.real(1j * (w - np.conj(w)) / 2.0)
    ref = decompose(psi, mass)
    m = field.mask
    if (np.max(np.abs(p_b[m] - ref.grad_s[m])) > 1e-10
            or np.max(np.abs(p_osm[m] - ref.p_osmotic[m])) > 1e-10):
        raise ValidationError("weak-value split disagrees with the polar fields")
    return _masked(p_b, m), _masked(p_osm, m)


def _anchored_phase_series(series: SnapshotSeries):
    """Per-snapshot anchored S fields with temporal 2*pi continuity.

    The integration constant of each snapshot is pinned at its own
    maximum-density point and then shifted by a multiple of 2*pi so the
    value there moves as little as possible between snapshots.
    """
    grid = series.grid
    phases = []
    masks = []
    rhos = []
    grads = []
    for state in series.states:
        rho = state.density()
        mask = _density_mask(rho)
        grad_masked, grad_safe, phase, ref = _phase_fields(
            state.amps, grid.dx, rho, mask)
        if phases:
            prev = phases[-1]
            shift = _TWO_PI * np.round((prev[ref] - phase[ref]) / _TWO_PI)
            phase = phase + shift
        phases.append(phase)
        masks.append(mask)
        rhos.append(rho)
        grads.append(grad_safe)
    return phases, grads, rhos, masks


def _interior_join(masks, i):
    return masks[i - 1] & masks[i] & masks[i + 1]


def continuity_residual(series: SnapshotSeries, mass: float) -> ResidualSeries:
    """r = d rho/dt + d/dx (rho grad S / m) at interior snapshots.

    The flux is evaluated as Im(conj(psi) psi')/m, which equals
    rho*grad_S/m on the mask and stays finite at nodes; time derivative
    by central differences over the (uniform) snapshot spacing.
    """
    if len(series) < 3:
        raise ValidationError("continuity residual needs at least 3 snapshots")
    dt = series.uniform_dt()
    grid = series.grid
    rhos = [s.density() for s in series.states]
    masks = [_density_mask(r) for r in rhos]
    fluxes = []
    for s in series.states:
        dpsi = spectral_diff(s.amps, grid.dx, 1)
        fluxes.append(np.imag(np.conj(s.amps) * dpsi) / mass)
    residuals = []
    out_masks = []
    for i in range(1, len(series) - 1):
        drho_dt = (rhos[i + 1] - rhos[i - 1]) / (2.0 * dt)
        div_flux = spectral_diff(fluxes[i], grid.dx, 1)
        mask = _interior_join(masks, i)
        residuals.append(_masked(drho_dt + div_flux, mask))
        out_masks.append(mask)
    return ResidualSeries(series.times[1:-1], tuple(residuals), tuple(out_masks))


def qhj_residual(series: SnapshotSeries, mass: float,
                 potential: Potential) -> ResidualSeries:
    """r = dS/dt + (grad S)^2/2m + Q + V at interior snapshots."""
    if len(series) < 3:
        raise ValidationError("phase-transport residual needs at least 3 snapshots")
    dt = series.uniform_dt()
    grid = series.grid
    v = potential.values(grid)
    phases, grads, rhos, masks = _anchored_phase_series(series)
    qs = [_quantum_potential(r, grid.dx, mass, m) for r, m in zip(rhos, masks)]
    residuals = []
    out_masks = []
    for i in range(1, len(series) - 1):
        ds_dt = (phases[i + 1] - phases[i - 1]) / (2.0 * dt)
        mask = _interior_join(masks, i)
        r = ds_dt + grads[i] ** 2 / (2.0 * mass) + qs[i] + v
        residuals.append(_masked(r, mask))
        out_masks.append(mask)
    return ResidualSeries(series.times[1:-1], tuple(residuals), tuple(out_masks))


def qhj_residual_p(series: SnapshotSeries, mass: float, k_spring: float) -> ResidualSeries:
    """Momentum-representation phase-transport residual, harmonic only.

    r = dS_p/dt + p^2/2m + (K/2) x_r^2 - (K/(2 R_p)) d^2 R_p/dp^2 with
    x_r = -dS_p/dp; the snapshots are transformed to p-space internally.
    """
    if not k_spring > 0.0:
        raise ValidationError("p-representation residual requires a harmonic potential (K > 0)")
    if len(series) < 3:
        raise ValidationError("phase-transport residual needs at least 3 snapshots")
    dt = series.uniform_dt()
    grid = series.grid
    dp = grid.dp
    p = grid.p

    phis = [to_momentum(s) for s in series.states]
    rhos = [phi.density() for phi in phis]
    masks = [_density_mask(r) for r in rhos]
    phases = []
    grads = []
    for phi, rho, mask in zip(phis, rhos, masks):
        _, grad_safe, phase, ref = _phase_fields(phi.amps, dp, rho, mask)
        if phases:
            prev = phases[-1]
            shift = _TWO_PI * np.round((prev[ref] - phase[ref]) / _TWO_PI)
            phase = phase + shift
        phases.append(phase)
        grads.append(grad_safe)
    # -(K/(2 R)) R'' in the node-safe rho form, with p-spacing.
    qs = []
    for rho, mask in zip(rhos, masks):
        drho = spectral_diff(rho, dp, 1)
        d2rho = spectral_diff(rho, dp, 2)
        floor = RHO_FLOOR_REL * float(np.max(rho))
        safe = np.maximum(rho, floor)
        ratio = d2rho / (2.0 * safe) - drho**2 / (4.0 * safe**2)
        qs.append(_masked(-0.5 * k_spring * ratio, mask))
    residuals = []
    out_masks = []
    for i in range(1, len(series) - 1):
        ds_dt = (phases[i + 1] - phases[i - 1]) / (2.0 * dt)
        x_r = -grads[i]
        mask = _interior_join(masks, i)
        r = ds_dt + p**2 / (2.0 * mass) + 0.5 * k_spring * x_r**2 + qs[i]
        residuals.append(_masked(r, mask))
        out_masks.append(mask)
    return ResidualSeries(series.times[1:-1], tuple(residuals), tuple(out_masks))
