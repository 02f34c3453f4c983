"""Nonlinear time integration via the mild (integral) form of the system.

Each step solves the fixed point of the exponential-trapezoid discretization
of u(t+dt) = G(dt) u(t) + int_0^dt G(dt-s) F(u(t+s)) ds, where G is the exact
linear propagator and F(u) = -(u.grad)u is the inertia forcing:

    u_{j+1} = G(dt) u_t + dt (phi1(M) - phi2(M)) F(u_t) + dt phi2(M) F(u_j)

with M = -dt * (linear symbol) acting scalarly on the shear and compressive
eigenspaces, phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2.  The
quadrature weights integrate a linear-in-s interpolant of F exactly against
the exponential kernel, so the scheme reproduces the linear flow exactly and
stays consistent with the stiff grad-div relaxation at any penalty strength
(the compressive modes relax to F_comp / ((lambda+2mu)|k|^2) instead of a
dt-limited plateau, which a plain trapezoid weight would produce).  The
fixed-point iteration mirrors the contraction-mapping construction of the
short-time solution; its residual ratios are recorded per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticSeries, sobolev_norm_sq
from .semigroup import LameParams
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    _fftn,
    _ifftn,
    divergence,
    l2_norm,
    l2_norm_sq,
)


class PicardDiverged(Exception):
    """Fixed-point residuals stopped contracting (or iteration cap hit)."""


class StepTooSmall(Exception):
    """Step halving descended below dt_min."""


class BlowUpDetected(Exception):
    """Discrete H^1 norm crossed the configured abort ceiling."""

    def __init__(self, message: str, trajectory: "Trajectory | None" = None):
        super().__init__(message)
        self.trajectory = trajectory


class NonPositiveTheta(Exception):
    """Cole-Hopf substitution requires a strictly positive heat state."""


@dataclass(frozen=True)
class StepperConfig:
    """Numerical knobs for the fixed-point exponential stepper."""

    dt_init: float = 1e-3
    picard_tol: float = 1e-10
    picard_max: int = 50
    dt_min: float = 1e-9
    cfl_constant: float = 0.5
    dealias_enabled: bool = True
    skew_symmetric: bool = False  # optional alternative product form, off by default

    def __post_init__(self) -> None:
        if not self.dt_init > self.dt_min > 0:
            raise ValueError("need dt_init > dt_min > 0")
        if self.picard_tol <= 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max < 2:
            raise ValueError("picard_max must be at least 2")


@dataclass
class StepDiagnostics:
    """Per-step fixed-point record."""

    t: float
    dt: float
    iterations: int
    residuals: tuple[float, ...]
    contraction_ratio: float  # max successive residual ratio, < 1 on accepted steps


@dataclass
class Trajectory:
    """Snapshots, per-step diagnostics and termination status of one run."""

    grid: Grid
    params: LameParams
    times: list[float] = field(default_factory=list)
    fields: list[VectorField] = field(default_factory=list)
    series: DiagnosticSeries = field(default_factory=DiagnosticSeries)
    step_records: list[StepDiagnostics] = field(default_factory=list)
    termination: str = "completed"

    @property
    def final_field(self) -> VectorField:
        return self.fields[-1]

    @property
    def final_time(self) -> float:
        return self.times[-1]

    def field_at(self, t: float) -> VectorField:
        for ti, ui in zip(self.times, self.fields):
            if abs(ti - t) <= 1e-12 * max(1.0, abs(t)):
                return ui
        raise KeyError(f"no snapshot stored at t={t}")


def nonlinear_term(u: VectorField, dealias_enabled: bool = True,
                   skew_symmetric: bool = False) -> VectorField:
    """Pseudospectral inertia term (u.grad)u, dealiased when enabled.

    The convective (non-conservative) product form is the default; the
    skew-symmetric average 0.5[(u.grad)u + div(u x u)] is available as an
    explicit opt-in and is never substituted silently.
    """
    g = u.grid
    uphys = u.phys
    kd = g.kvec_deriv
    grad_all = _ifftn(1j * kd[np.newaxis] * u.spec[:, np.newaxis], g)
    out = np.einsum("j...,ij...->i...", uphys, grad_all)
    if skew_symmetric:
        div_form = np.zeros_like(out)
        for i in range(g.dim):
            acc = np.zeros(g.shape, dtype=np.complex128)
            for j in range(g.dim):
                acc += 1j * kd[j] * _fftn(uphys[i] * uphys[j], g)
            div_form[i] = _ifftn(acc, g)
        out = 0.5 * (out + div_form)
    result = VectorField.from_physical(g, out)
    if dealias_enabled:
        spec = result.spec * g.dealias_mask[np.newaxis]
        result = VectorField.from_spectral(g, spec)
    return result


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, stable for z <= 0 (expm1 keeps the small-z branch exact)."""
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - 1 - z)/z^2 with a series branch below |z| = 1e-4."""
    out = np.full_like(z, 0.5)
    small = np.abs(z) < 1e-4
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl**2
    zs = z[small]
    out[small] = 0.5 + zs * (1.0 / 6.0 + zs * (1.0 / 24.0 + zs * (1.0 / 120.0 + zs / 720.0)))
    return out


class _StepWeights:
    """Eigenspace-wise exponential weights for one (grid, dt, params)."""

    def __init__(self, grid: Grid, dt: float, params: LameParams):
        self.grid = grid
        self.dt = dt
        z_shear = -params.mu * grid.k_sq * dt
        z_comp = -params.compressive_diffusivity * grid.k_sq * dt
        self.e_shear = np.exp(z_shear)
        self.e_comp = np.exp(z_comp)
        self.w_old_shear = dt * (_phi1(z_shear) - _phi2(z_shear))
        self.w_old_comp = dt * (_phi1(z_comp) - _phi2(z_comp))
        self.w_new_shear = dt * _phi2(z_shear)
        self.w_new_comp = dt * _phi2(z_comp)
        ksq = grid.k_deriv_sq
        self._inv_ksq = np.where(ksq > 0, 1.0 / np.maximum(ksq, 1e-300), 0.0)

    def _split_apply(self, spec: np.ndarray, shear_mult, comp_mult) -> np.ndarray:
        kd = self.grid.kvec_deriv
        comp = kd * (np.sum(kd * spec, axis=0) * self._inv_ksq)[np.newaxis]
        return shear_mult[np.newaxis] * (spec - comp) + comp_mult[np.newaxis] * comp

    def propagate(self, spec: np.ndarray) -> np.ndarray:
        return self._split_apply(spec, self.e_shear, self.e_comp)

    def weight_old(self, spec: np.ndarray) -> np.ndarray:
        return self._split_apply(spec, self.w_old_shear, self.w_old_comp)

    def weight_new(self, spec: np.ndarray) -> np.ndarray:
        return self._split_apply(spec, self.w_new_shear, self.w_new_comp)


def _default_forcing(config: StepperConfig):
    def forcing(u: VectorField) -> VectorField:
        phi = nonlinear_term(u, config.dealias_enabled, config.skew_symmetric)
        return VectorField.from_spectral(u.grid, -phi.spec)
    return forcing


def cfl_bound(u: VectorField, config: StepperConfig) -> float:
    """Heuristic step ceiling cfl_constant / (N * max|u|); inf for u = 0."""
    umax = u.max_abs()
    if umax == 0.0:
        return np.inf
    return config.cfl_constant / (u.grid.n * umax)


def duhamel_step(
    u_t: VectorField,
    dt: float,
    params: LameParams,
    config: StepperConfig,
    forcing=None,
) -> tuple[VectorField, StepDiagnostics]:
    """One fixed-point exponential-trapezoid step of size dt.

    Raises PicardDiverged when the residual sequence stops contracting or
    the iteration cap is exceeded; the caller decides whether to halve dt.
    """
    if forcing is None:
        forcing = _default_forcing(config)
    grid = u_t.grid
    weights = _StepWeights(grid, dt, params)
    f_old = forcing(u_t).spec
    base = weights.propagate(u_t.spec) + weights.weight_old(f_old)
    scale = max(l2_norm(u_t), 1.0)
    tol = config.picard_tol * scale

    current = base + weights.weight_new(f_old)  # first iterate: F(u_new) ~ F(u_t)
    residuals: list[float] = []
    iterations = 1
    while True:
        f_new = forcing(VectorField.from_spectral(grid, current)).spec
        nxt = base + weights.weight_new(f_new)
        res = l2_norm(VectorField.from_spectral(grid, nxt - current))
        residuals.append(res)
        current = nxt
        if res <= tol:
            break
        iterations += 1
        if len(residuals) >= 2 and residuals[-1] >= residuals[-2]:
            raise PicardDiverged(
                f"residual ratio {residuals[-1] / residuals[-2]:.3g} >= 1 at dt={dt:.3g}"
            )
        if iterations > config.picard_max:
            raise PicardDiverged(f"no contraction within {config.picard_max} iterations")

    ratios = [residuals[i + 1] / residuals[i] for i in range(len(residuals) - 1)
              if residuals[i] > 0]
    diag = StepDiagnostics(
        t=np.nan,  # filled by integrate
        dt=dt,
        iterations=iterations,
        residuals=tuple(residuals),
        contraction_ratio=max(ratios) if ratios else 0.0,
    )
    return VectorField.from_spectral(grid, current), diag


def _record(series: DiagnosticSeries, u: VectorField, t: float,
            picard_iters: int, dt: float) -> None:
    g = u.grid
    l2_sq = l2_norm_sq(u)
    grad_sq = float((2.0 * np.pi) ** g.dim
                    * np.sum(g.k_deriv_sq[np.newaxis] * np.abs(u.spec) ** 2))
    div_l2 = l2_norm(divergence(u))
    hk_vals = {k: sobolev_norm_sq(u, k) for k in series.hk_orders}
    series.append(
        t=t,
        energy=0.5 * l2_sq,
        enstrophy=0.5 * grad_sq,
        div_l2=div_l2,
        u_max=u.max_abs(),
        h1_sq=l2_sq + grad_sq,
        picard_iters=picard_iters,
        dt=dt,
        hk_sq=hk_vals,
    )


def integrate(
    phi: VectorField,
    t_end: float,
    params: LameParams,
    config: StepperConfig,
    forcing=None,
    snapshot_every: int = 1,
    abort_h1_factor: float = 1e8,
    hk_orders: tuple[int, ...] = (),
) -> Trajectory:
    """March phi to t_end with adaptive halving on fixed-point divergence.

    The trajectory stores the initial and final fields plus every
    snapshot_every-th accepted step, and a dense per-step diagnostic series.
    Raises BlowUpDetected (with the partial trajectory attached) when the
    discrete H^1 norm exceeds abort_h1_factor times its initial value, and
    StepTooSmall when halving descends below config.dt_min.
    """
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if forcing is None:
        forcing = _default_forcing(config)
    grid = phi.grid
    traj = Trajectory(grid=grid, params=params,
                      series=DiagnosticSeries(hk_orders=tuple(hk_orders)))
    u = VectorField.from_spectral(grid, phi.spec.copy())
    t = 0.0
    _record(traj.series, u, t, picard_iters=0, dt=0.0)
    traj.times.append(t)
    traj.fields.append(u)
    h1_ceiling = abort_h1_factor * max(traj.series.h1_sq[0], np.finfo(float).tiny)

    step_index = 0
    while t < t_end - 1e-14 * max(1.0, t_end):
        dt = min(config.dt_init, cfl_bound(u, config), t_end - t)
        while True:
            try:
                u_next, diag = duhamel_step(u, dt, params, config, forcing)
                break
            except PicardDiverged:
                dt *= 0.5
                if dt < config.dt_min:
                    traj.termination = "step_too_small"
                    raise StepTooSmall(
                        f"dt fell below dt_min={config.dt_min:.3g} at t={t:.6g}"
                    )
        t += dt
        u = u_next
        step_index += 1
        diag.t = t
        traj.step_records.append(diag)
        _record(traj.series, u, t, picard_iters=diag.iterations, dt=dt)
        at_end = t >= t_end - 1e-14 * max(1.0, t_end)
        if at_end or (snapshot_every > 0 and step_index % snapshot_every == 0):
            traj.times.append(t)
            traj.fields.append(u)
        if traj.series.h1_sq[-1] > h1_ceiling:
            traj.termination = "blow_up"
            raise BlowUpDetected(
                f"H^1 ceiling exceeded at t={t:.6g}: "
                f"{traj.series.h1_sq[-1]:.3e} > {h1_ceiling:.3e}",
                trajectory=traj,
            )
    traj.termination = "completed"
    return traj


def cole_hopf_oracle(grid: Grid, theta0, mu: float, t: float) -> VectorField:
    """Analytic gradient-flow solution u = -2 mu grad log(theta) at time t.

    ``theta0`` is either a callable evaluated on the grid coordinate arrays
    or a ScalarField; it must be strictly positive.  The heat evolution of
    theta is exact mode-wise, so the returned field is exact up to the
    spectral truncation of log(theta).
    """
    if callable(theta0):
        theta_field = ScalarField.from_physical(grid, np.asarray(theta0(*grid.coords()),
                                                                 dtype=np.float64))
    else:
        theta_field = theta0
    if np.min(theta_field.phys) <= 0.0:
        raise NonPositiveTheta("theta must be strictly positive on the grid")
    decay = np.exp(-mu * grid.k_sq * t)
    theta_t = ScalarField.from_spectral(grid, theta_field.spec * decay)
    theta_phys = theta_t.phys
    if np.min(theta_phys) <= 0.0:
        raise NonPositiveTheta("theta lost positivity under heat evolution")
    log_theta = ScalarField.from_physical(grid, np.log(theta_phys))
    out = -2.0 * mu * 1j * grid.kvec_deriv * log_theta.spec[np.newaxis]
    return VectorField.from_spectral(grid, out)
