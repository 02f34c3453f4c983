"""Norms, energy accounting and inequality monitors for trajectories.

Turns the a-priori estimates used in the continuation argument into measured
time series: discrete Sobolev norms, the H^1 Gronwall envelope, the energy
identity of divergence-free runs and the fitted constants of the per-order
differential inequality d/dt ||u||_{H^k}^2 <= c_k ||u||_inf^2 ||u||_{H^k}^2.
All fitted constants are measured outputs; the theory behind the estimates
never quantifies them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import VectorField


def sobolev_norm_sq(u: VectorField, k: int) -> float:
    """Squared discrete H^k norm with multiplier (1 + |k|^2)^k; k=0 is L^2.

    The multiplier uses the differentiation wavenumbers (Nyquist zeroed) so
    the norm agrees with the binomial-weighted sum of spectral-derivative
    norms of order <= k.
    """
    if k < 0:
        raise ValueError(f"Sobolev order must be nonnegative, got {k}")
    g = u.grid
    weight = (1.0 + g.k_deriv_sq) ** k
    return float(
        (2.0 * np.pi) ** g.dim * np.sum(weight[np.newaxis] * np.abs(u.spec) ** 2)
    )


@dataclass
class DiagnosticSeries:
    """Per-step scalar diagnostics with a fixed CSV column order.

    Columns: t, energy, enstrophy, div_l2, u_max, h1_sq, then one ``h{k}_sq``
    column per requested extra order, then picard_iters, dt.
    """

    hk_orders: tuple[int, ...] = ()
    t: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    enstrophy: list = field(default_factory=list)
    div_l2: list = field(default_factory=list)
    u_max: list = field(default_factory=list)
    h1_sq: list = field(default_factory=list)
    hk_sq: dict = field(default_factory=dict)
    picard_iters: list = field(default_factory=list)
    dt: list = field(default_factory=list)

    def __post_init__(self) -> None:
        for k in self.hk_orders:
            self.hk_sq.setdefault(k, [])

    def append(self, *, t, energy, enstrophy, div_l2, u_max, h1_sq,
               picard_iters, dt, hk_sq=None) -> None:
        self.t.append(float(t))
        self.energy.append(float(energy))
        self.enstrophy.append(float(enstrophy))
        self.div_l2.append(float(div_l2))
        self.u_max.append(float(u_max))
        self.h1_sq.append(float(h1_sq))
        self.picard_iters.append(int(picard_iters))
        self.dt.append(float(dt))
        for k in self.hk_orders:
            self.hk_sq[k].append(float((hk_sq or {})[k]))

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> list[str]:
        names = ["t", "energy", "enstrophy", "div_l2", "u_max", "h1_sq"]
        names += [f"h{k}_sq" for k in self.hk_orders]
        names += ["picard_iters", "dt"]
        return names

    def rows(self):
        for i in range(len(self.t)):
            row = [self.t[i], self.energy[i], self.enstrophy[i], self.div_l2[i],
                   self.u_max[i], self.h1_sq[i]]
            row += [self.hk_sq[k][i] for k in self.hk_orders]
            row += [self.picard_iters[i], self.dt[i]]
            yield row

    def to_csv_text(self) -> str:
        """Deterministic CSV body (repr formatting round-trips floats)."""
        lines = [",".join(self.columns())]
        for row in self.rows():
            lines.append(",".join(repr(v) for v in row))
        return "\n".join(lines) + "\n"


def _trapezoid_cumulative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral of samples f(t), starting at 0."""
    out = np.zeros_like(f)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def gronwall_envelope(series: DiagnosticSeries, c1: float):
    """H^1 envelope h1_sq(0) * exp(c1 * int u_max^2 ds) and violation flag.

    Returns (envelope array over the series times, ever_exceeded bool).
    """
    if len(series) == 0:
        raise ValueError("empty diagnostic series")
    if c1 <= 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    t = np.asarray(series.t)
    h1 = np.asarray(series.h1_sq)
    umax_sq = np.asarray(series.u_max) ** 2
    envelope = h1[0] * np.exp(c1 * _trapezoid_cumulative(t, umax_sq))
    violated = bool(np.any(h1 > envelope * (1.0 + 1e-12)))
    return envelope, violated


def fit_gronwall_constant(series: DiagnosticSeries) -> float:
    """Smallest c1 >= 0 whose envelope bounds the observed h1_sq series."""
    t = np.asarray(series.t)
    h1 = np.asarray(series.h1_sq)
    umax_sq = np.asarray(series.u_max) ** 2
    integ = _trapezoid_cumulative(t, umax_sq)
    c_needed = 0.0
    for i in range(1, len(t)):
        if h1[i] > h1[0] and integ[i] > 0:
            c_needed = max(c_needed, np.log(h1[i] / h1[0]) / integ[i])
    return float(c_needed)


def energy_identity_residual(traj, mu: float) -> float:
    """Max relative residual of ||u(t)||^2 + 2 mu int ||grad u||^2 - ||phi||^2.

    Meaningful for divergence-free runs (the reference solver or the
    penalty-limit extrapolation); the enstrophy integral uses the trapezoid
    rule on the recorded series, matching the stepper's order.
    """
    series = traj.series
    t = np.asarray(series.t)
    l2_sq = 2.0 * np.asarray(series.energy)
    grad_sq = 2.0 * np.asarray(series.enstrophy)
    if len(t) == 0:
        raise ValueError("trajectory has no diagnostics")
    total = l2_sq + 2.0 * mu * _trapezoid_cumulative(t, grad_sq)
    denom = max(l2_sq[0], np.finfo(float).tiny)
    return float(np.max(np.abs(total - l2_sq[0])) / denom)


def hk_inequality_check(traj, k: int) -> float:
    """Smallest c_k with d/dt ||u||_{H^k}^2 <= c_k ||u||_inf^2 ||u||_{H^k}^2.

    Fitted over forward differences of the recorded series; returns 0 when
    the derivative is everywhere nonpositive.  Supported orders are k = 0
    (from the energy column) and k = 1 (from h1_sq).
    """
    series = traj.series
    if len(series) < 3:
        raise ValueError("need at least 3 snapshots to fit the inequality")
    if k == 0:
        h = 2.0 * np.asarray(series.energy)
    elif k == 1:
        h = np.asarray(series.h1_sq)
    elif k in series.hk_orders:
        h = np.asarray(series.hk_sq[k])
    else:
        raise ValueError(f"order {k} not recorded in this series")
    t = np.asarray(series.t)
    umax_sq = np.asarray(series.u_max) ** 2
    c_fit = 0.0
    for i in range(len(t) - 1):
        dh = (h[i + 1] - h[i]) / (t[i + 1] - t[i])
        bound_scale = umax_sq[i] * h[i]
        if dh > 0 and bound_scale > 0:
            c_fit = max(c_fit, dh / bound_scale)
    return float(c_fit)
