"""Trajectory bundles along the guidance field xdot = grad S / m.

Bundles are integrated with classical RK4 over each snapshot interval
(cubic spatial interpolation of the velocity field, linear interpolation
in time) through the selected kernel backend.  Paths entering the
masked near-node region or leaving the domain are truncated and
flagged; the run continues for the remaining paths.

Seeding is deterministic: N equal-probability quantiles of |psi0|^2 via
the inverse of the piecewise-linear (trapezoid) CDF on the grid.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import (
    STATUS_ALIVE,
    STATUS_LEFT_DOMAIN,
    STATUS_MASKED,
    advance_bundle,
    interp_cubic,
)
from .errors import ValidationError
from .evolution import EvolutionConfig, Potential, SnapshotSeries, evolve
from .grid import Grid1D, WaveFunction, make_gaussian, superpose
from .madelung import decompose

__all__ = [
    "TrajectoryBundle",
    "TwoSlitScenario",
    "HamiltonResiduals",
    "stratified_seeds",
    "integrate_bundle",
    "run_two_slit",
    "hamilton_check",
    "endpoint_l1",
    "quantum_potential_along",
]

_STATUS_NAMES = {STATUS_ALIVE: "alive",
                 STATUS_MASKED: "masked",
                 STATUS_LEFT_DOMAIN: "left_domain"}


@dataclass(frozen=True)
class TrajectoryBundle:
    """Paths x_i(t_k) with the guidance momentum recorded along each."""

    times: np.ndarray          # (T,)
    paths: np.ndarray          # (N, T), NaN after truncation
    momenta: np.ndarray        # (N, T), grad S along the path, NaN after truncation
    seeds: np.ndarray          # (N,)
    status: np.ndarray         # (N,) final status codes
    truncated_at: np.ndarray   # (N,) snapshot index at truncation, -1 if none

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def status_name(self, i: int) -> str:
        return _STATUS_NAMES[int(self.status[i])]

    def alive_through(self, k: int) -> np.ndarray:
        """Boolean mask of paths still alive at snapshot index k."""
        return (self.truncated_at < 0) | (self.truncated_at > k)


@dataclass(frozen=True)
class TwoSlitScenario:
    """Transverse 1D model of the two-slit arrangement."""

    separation: float
    slit_width: float
    propagation_time: float
    n_paths: int

    def __post_init__(self):
        if not self.separation > 4.0 * self.slit_width:
            raise ValidationError(
                "slits are not resolvable: separation must exceed 4*slit_width")
        if not self.propagation_time > 0.0:
            raise ValidationError("propagation_time must be positive")
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")


def stratified_seeds(psi: WaveFunction, count: int) -> np.ndarray:
    """count equal-probability quantiles of |psi|^2 (deterministic)."""
    if count < 1:
        raise ValidationError("seed count must be >= 1")
    grid = psi.grid
    rho = psi.density()
    cdf = np.empty(grid.n)
    cdf[0] = 0.0
    np.cumsum((rho[1:] + rho[:-1]) * (0.5 * grid.dx), out=cdf[1:])
    total = cdf[-1]
    if total <= 0.0:
        raise ValidationError("state carries no probability mass")
    u = (np.arange(count) + 0.5) / count * total
    hi = np.searchsorted(cdf, u, side="right")
    hi = np.clip(hi, 1, grid.n - 1)
    lo = hi - 1
    gap = cdf[hi] - cdf[lo]
    frac = np.where(gap > 0.0, (u - cdf[lo]) / np.where(gap > 0.0, gap, 1.0), 0.5)
    return grid.x[lo] + frac * grid.dx


def _velocity_fields(series: SnapshotSeries, mass: float):
    """Sanitized velocity grad_S/m, the raw grad_S, and validity per snapshot."""
    vels = []
    grads = []
    valids = []
    for state in series.states:
        fields = decompose(state, mass)
        valid = fields.mask
        grad = np.where(valid, fields.grad_s, 0.0)
        grads.append(grad)
        vels.append(grad / mass)
        valids.append(valid.astype(np.uint8))
    return vels, grads, valids


def integrate_bundle(series: SnapshotSeries, seeds, mass: float,
                     substeps: int | None = None) -> TrajectoryBundle:
    """RK4 bundle integration along a snapshot series.

    substeps is the RK4 substep count per snapshot interval; by default
    it is chosen so one substep moves a path at most half a grid cell.
    """
    if len(series) < 2:
        raise ValidationError("bundle integration needs at least 2 snapshots")
    grid = series.grid
    dt_snap = series.uniform_dt()
    seeds = np.asarray(seeds, dtype=np.float64)
    if seeds.ndim != 1 or seeds.size == 0:
        raise ValidationError("seeds must be a non-empty 1D array")

    vels, grads, valids = _velocity_fields(series, mass)
    vmax = max(float(np.max(np.abs(v))) for v in vels)
    if vmax * dt_snap >= 5.0 * grid.dx:
        raise ValidationError(
            f"snapshot stride too coarse: max|v|*dt_snap = {vmax * dt_snap:.3g} "
            f">= 5*dx = {5.0 * grid.dx:.3g}")
    if substeps is None:
        substeps = max(1, int(np.ceil(vmax * dt_snap / (0.5 * grid.dx))))
    if substeps < 1:
        raise ValidationError("substeps must be >= 1")

    p0, ok0 = interp_cubic(seeds, grads[0], valids[0], grid.x_min, grid.dx)
    if not np.all(ok0):
        bad = seeds[~ok0]
        raise ValidationError(f"seeds lie outside the valid region at t0: {bad}")

    n_paths = seeds.size
    n_times = len(series)
    paths = np.full((n_paths, n_times), np.nan)
    momenta = np.full((n_paths, n_times), np.nan)
    status = np.zeros(n_paths, dtype=np.int8)
    truncated_at = np.full(n_paths, -1, dtype=np.int64)
    x = seeds.copy()
    paths[:, 0] = x
    momenta[:, 0] = p0

    for k in range(n_times - 1):
        valid01 = (valids[k] & valids[k + 1]).astype(np.uint8)
        was_alive = status == STATUS_ALIVE
        advance_bundle(x, status, vels[k], vels[k + 1], valid01,
                       grid.x_min, grid.dx, grid.n,
                       float(series.times[k + 1] - series.times[k]), substeps)
        newly_dead = was_alive & (status != STATUS_ALIVE)
        truncated_at[newly_dead] = k
        alive = status == STATUS_ALIVE
        if np.any(alive):
            paths[alive, k + 1] = x[alive]
            pk, okk = interp_cubic(x[alive], grads[k + 1], valids[k + 1],
                                   grid.x_min, grid.dx)
            momenta[alive, k + 1] = np.where(okk, pk, np.nan)
        if not np.any(alive):
            break

    return TrajectoryBundle(times=series.times.copy(), paths=paths,
                            momenta=momenta, seeds=seeds.copy(),
                            status=status, truncated_at=truncated_at)


def two_slit_initial(grid: Grid1D, sc: TwoSlitScenario) -> WaveFunction:
    """Symmetric superposition of two Gaussians at +-separation/2."""
    left = make_gaussian(grid, -0.5 * sc.separation, 0.0, sc.slit_width)
    right = make_gaussian(grid, +0.5 * sc.separation, 0.0, sc.slit_width)
    return superpose([left, right])


def run_two_slit(sc: TwoSlitScenario, grid: Grid1D, cfg: EvolutionConfig):
    """Free evolution of the two-slit state plus a stratified bundle."""
    if cfg.potential.kind != "free":
        raise ValidationError("the two-slit scenario evolves freely")
    if abs(cfg.steps * cfg.dt - sc.propagation_time) > 1e-9 * max(1.0, sc.propagation_time):
        raise ValidationError(
            f"steps*dt = {cfg.steps * cfg.dt} does not match "
            f"propagation_time = {sc.propagation_time}")
    psi0 = two_slit_initial(grid, sc)
    series = evolve(psi0, cfg)
    seeds = stratified_seeds(psi0, sc.n_paths)
    bundle = integrate_bundle(series, seeds, cfg.mass)
    return series, bundle


@dataclass(frozen=True)
class HamiltonResiduals:
    """Per-path maxima of the two Hamilton-equation residuals."""

    r_x: np.ndarray    # max |xdot - p/m| per path
    r_p: np.ndarray    # max |pdot + d(V+Q)/dx| per path

    def max_r_x(self) -> float:
        good = self.r_x[np.isfinite(self.r_x)]
        return float(np.max(good)) if good.size else np.nan

    def max_r_p(self) -> float:
        good = self.r_p[np.isfinite(self.r_p)]
        return float(np.max(good)) if good.size else np.nan


def _force_fields(series: SnapshotSeries, mass: float, potential: Potential):
    """d(V+Q)/dx per snapshot with a 5-point validity mask.

    dV/dx is analytic; dQ/dx uses a 4th-order central difference on the
    masked Q field, valid only where the whole stencil is unmasked.
    """
    grid = series.grid
    dv = potential.gradient(grid)
    forces = []
    valids = []
    inv12dx = 1.0 / (12.0 * grid.dx)
    for state in series.states:
        fields = decompose(state, mass)
        q = np.where(fields.mask, fields.quantum_potential, 0.0)
        dq = (-np.roll(q, -2) + 8.0 * np.roll(q, -1)
              - 8.0 * np.roll(q, 1) + np.roll(q, 2)) * inv12dx
        m = fields.mask
        ok = m & np.roll(m, 1) & np.roll(m, -1) & np.roll(m, 2) & np.roll(m, -2)
        forces.append(dv + dq)
        valids.append(ok.astype(np.uint8))
    return forces, valids


def hamilton_check(bundle: TrajectoryBundle, series: SnapshotSeries,
                   mass: float, potential: Potential) -> HamiltonResiduals:
    """Residuals of xdot = p/m and pdot = -d(V+Q)/dx along each path.

    Time derivatives are central differences over the recorded snapshot
    times; masked or truncated segments are skipped.
    """
    if bundle.paths.shape[1] != len(series):
        raise ValidationError("bundle and series do not share a time axis")
    dt = series.uniform_dt()
    grid = series.grid
    forces, force_valid = _force_fields(series, mass, potential)

    n_paths, n_times = bundle.paths.shape
    r_x = np.full(n_paths, np.nan)
    r_p = np.full(n_paths, np.nan)
    for k in range(1, n_times - 1):
        xk = bundle.paths[:, k]
        usable = (np.isfinite(bundle.paths[:, k - 1]) & np.isfinite(xk)
                  & np.isfinite(bundle.paths[:, k + 1]))
        if not np.any(usable):
            continue
        xdot = (bundle.paths[usable, k + 1] - bundle.paths[usable, k - 1]) / (2.0 * dt)
        pdot = (bundle.momenta[usable, k + 1] - bundle.momenta[usable, k - 1]) / (2.0 * dt)
        res_x = np.abs(xdot - bundle.momenta[usable, k] / mass)
        f, ok = interp_cubic(xk[usable], forces[k], force_valid[k],
                             grid.x_min, grid.dx)
        res_p = np.where(ok, np.abs(pdot + f), np.nan)
        idx = np.flatnonzero(usable)
        r_x[idx] = np.fmax(r_x[idx], res_x)
        r_p[idx] = np.fmax(r_p[idx], res_p)
    return HamiltonResiduals(r_x=r_x, r_p=r_p)


def endpoint_l1(bundle: TrajectoryBundle, series: SnapshotSeries,
                cells_per_bin: int = 8) -> float:
    """L1 distance between the endpoint histogram and |psi(., T)|^2.

    Bins aggregate cells_per_bin grid cells; target bin masses use the
    same trapezoid rule as the stratified seeding CDF.
    """
    grid = series.grid
    endpoints = bundle.paths[:, -1]
    endpoints = endpoints[np.isfinite(endpoints)]
    if endpoints.size == 0:
        raise ValidationError("no surviving paths to histogram")
    rho = series.states[-1].density()
    cell_mass = np.empty(grid.n)
    cell_mass[:-1] = (rho[:-1] + rho[1:]) * (0.5 * grid.dx)
    cell_mass[-1] = (rho[-1] + rho[0]) * (0.5 * grid.dx)
    starts = np.arange(0, grid.n, cells_per_bin)
    target = np.add.reduceat(cell_mass, starts)
    target = target / target.sum()
    edges = np.append(grid.x[starts], grid.x_min + grid.length)
    hist, _ = np.histogram(endpoints, bins=edges)
    emp = hist / endpoints.size
    return float(np.sum(np.abs(emp - target)))


def quantum_potential_along(bundle: TrajectoryBundle, series: SnapshotSeries,
                            mass: float) -> np.ndarray:
    """Q interpolated along each path (diagnostic for the classical limit)."""
    grid = series.grid
    out = np.full_like(bundle.paths, np.nan)
    for k, state in enumerate(series.states):
        fields = decompose(state, mass)
        q = np.where(fields.mask, fields.quantum_potential, 0.0)
        usable = np.isfinite(bundle.paths[:, k])
        if not np.any(usable):
            continue
        vals, ok = interp_cubic(bundle.paths[usable, k], q,
                                fields.mask.astype(np.uint8), grid.x_min, grid.dx)
        col = np.full(usable.sum(), np.nan)
        col[ok] = vals[ok]
        out[usable, k] = col
    return out
