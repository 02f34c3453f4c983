"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion with the measured numbers.  Criterion 8 carries one strict-xfail
assertion: it requires zero mass for the potential W, but the integral is
analytically -t*(lambda+mu), so the check fails deterministically whenever
lambda+mu > 0; the companion test pins the true value at the same tolerance.
"""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from lamens.diagnostics import energy_identity_residual
from lamens.kernels import (
    KernelPoint,
    SampleSpec,
    _w_radial,
    _z_radial_coeffs,
    verify_gaussian_bound,
    z_kernel,
)
from lamens.penalty import lambda_sweep, reference_ns_solve
from lamens.runtime import dispatch, random_solenoidal, read_snapshot, write_snapshot
from lamens.semigroup import LameParams, apply_semigroup
from lamens.spectral import (
    VectorField,
    l2_diff,
    l2_norm,
    make_grid,
    project_solenoidal,
    solenoidal_fraction,
)
from lamens.stepper import StepperConfig, cole_hopf_oracle, integrate


def theta0(x, *rest):
    return 2.0 + np.cos(x)


def taylor_green(grid, amplitude=1.0):
    x, y = grid.coords()
    return VectorField.from_physical(
        grid, amplitude * np.stack([np.sin(x) * np.cos(y),
                                    -np.cos(x) * np.sin(y)]))


def report(line: str) -> None:
    print(f"\n{line}")


# ---------------------------------------------------------------------- 1


def test_criterion_1_linear_propagator_exactness():
    g = make_grid(3, 16)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        mu = float(rng.uniform(0.05, 3.0))
        lam = float(rng.uniform(-mu, 200.0))
        t = float(rng.uniform(0.0, 1.0))
        params = LameParams(mu=mu, lam=lam)
        k = tuple(int(v) for v in rng.integers(-7, 8, size=3))
        if k == (0, 0, 0):
            k = (1, 0, 0)
        coeff = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        spec = np.zeros((3,) + g.shape, dtype=complex)
        spec[(slice(None),) + g.mode_index(k)] = coeff
        spec[(slice(None),) + g.mode_index(tuple(-v for v in k))] = np.conj(coeff)
        u = VectorField.from_spectral(g, spec)
        out = apply_semigroup(u, t, params).spec[(slice(None),) + g.mode_index(k)]
        symbol = (mu * np.dot(k, k) * np.eye(3)
                  + (mu + lam) * np.outer(k, k).astype(float))
        want = expm(-t * symbol) @ coeff
        worst = max(worst, float(np.linalg.norm(out - want) / np.linalg.norm(want)))
    assert worst <= 1e-12
    report(f"ACCEPTANCE 1 PASS - propagator vs matrix exponential: "
           f"worst relative error {worst:.2e} <= 1e-12 over 50 samples")


# ---------------------------------------------------------------------- 2


def test_criterion_2_semigroup_law_and_monotone_energy():
    g = make_grid(2, 16)
    params = LameParams(mu=0.4, lam=11.0)
    worst_law = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        u = VectorField.from_physical(g, rng.standard_normal((2,) + g.shape))
        for t1 in (0.05, 0.1, 0.3):
            for t2 in (0.05, 0.1, 0.3):
                once = apply_semigroup(u, t1 + t2, params).spec
                twice = apply_semigroup(apply_semigroup(u, t1, params), t2,
                                        params).spec
                gap = np.max(np.abs(once - twice)) / max(np.max(np.abs(once)), 1e-300)
                worst_law = max(worst_law, float(gap))
        norms = [l2_norm(apply_semigroup(u, t, params))
                 for t in np.linspace(0.0, 2.0, 20)]
        for a, b in zip(norms, norms[1:]):
            assert b <= a * (1 + 1e-13)
    assert worst_law <= 1e-12
    report(f"ACCEPTANCE 2 PASS - semigroup law gap {worst_law:.2e} <= 1e-12; "
           f"energy non-increasing on 20-point grids for 10 fields")


# ---------------------------------------------------------------------- 3


def test_criterion_3_stokes_heat_reduction():
    g = make_grid(2, 32)
    mu = 1.0
    rng = np.random.default_rng(5)
    u = project_solenoidal(VectorField.from_physical(
        g, rng.standard_normal((2,) + g.shape)))
    t = 0.15
    heat = VectorField.from_spectral(g, np.exp(-mu * g.k_sq * t)[np.newaxis] * u.spec)
    worst = 0.0
    for lam in (-mu, 0.0, 1e3):
        out = apply_semigroup(u, t, LameParams(mu=mu, lam=lam))
        worst = max(worst, l2_diff(out, heat) / l2_norm(u))
    assert worst <= 1e-13
    report(f"ACCEPTANCE 3 PASS - divergence-free data follows heat flow: "
           f"worst relative gap {worst:.2e} <= 1e-13 at lambda in {{-mu, 0, 1e3}}")


# ---------------------------------------------------------------------- 4, 5


@pytest.fixture(scope="module")
def burgers_run():
    g = make_grid(2, 64)
    mu = 1.0
    phi = cole_hopf_oracle(g, theta0, mu, 0.0)
    config = StepperConfig(dt_init=1e-3, dt_min=1e-9)
    traj = integrate(phi, 0.5, LameParams(mu=mu, lam=-mu), config,
                     snapshot_every=0)
    return g, mu, traj


def test_criterion_4_burgers_oracle(burgers_run):
    g, mu, traj = burgers_run
    oracle = cole_hopf_oracle(g, theta0, mu, traj.final_time)
    err = l2_diff(traj.final_field, oracle)
    assert err <= 1e-6
    # unforced runs in this suite dissipate energy step by step
    for a, b in zip(traj.series.energy, traj.series.energy[1:]):
        assert b <= a + 1e-10
    report(f"ACCEPTANCE 4 PASS - gradient-flow run vs analytic solution: "
           f"L2 error {err:.2e} <= 1e-6 (N=64, dt=1e-3, t_end=0.5)")


def test_criterion_5_picard_contraction(burgers_run):
    _, _, traj = burgers_run
    assert traj.step_records
    worst_ratio = 0.0
    for rec in traj.step_records:
        assert rec.contraction_ratio < 1.0
        for r0, r1 in zip(rec.residuals, rec.residuals[1:]):
            assert r1 < r0  # geometric decrease within the step
        worst_ratio = max(worst_ratio, rec.contraction_ratio)
    report(f"ACCEPTANCE 5 PASS - every accepted step contracts: "
           f"max residual ratio {worst_ratio:.3g} < 1 over "
           f"{len(traj.step_records)} steps")


# ---------------------------------------------------------------------- 6


def test_criterion_6_reference_ns_oracle():
    g = make_grid(2, 64)
    mu, dt, t_end = 0.1, 1e-3, 1.0
    config = StepperConfig(dt_init=dt, dt_min=1e-9)
    traj = reference_ns_solve(taylor_green(g), t_end, mu, config, snapshot_every=0)
    exact = taylor_green(g, amplitude=np.exp(-2.0 * mu * traj.final_time))
    err = l2_diff(traj.final_field, exact)
    residual = energy_identity_residual(traj, mu)
    assert err <= 1e-6
    assert residual <= 1e-5
    for a, b in zip(traj.series.energy, traj.series.energy[1:]):
        assert b <= a + 1e-10
    report(f"ACCEPTANCE 6 PASS - decaying-vortex reference: L2 error {err:.2e} "
           f"<= 1e-6, energy-identity residual {residual:.2e} <= 1e-5")


# ---------------------------------------------------------------------- 7


@pytest.fixture(scope="module")
def penalty_sweep():
    g = make_grid(2, 64)
    mu = 0.1
    config = StepperConfig(dt_init=1e-3, dt_min=1e-9)
    return g, mu, lambda_sweep(taylor_green(g), 0.5, mu, [1e2, 1e3, 1e4], config)


def test_criterion_7_penalty_convergence(penalty_sweep):
    g, mu, sweep = penalty_sweep
    entries = sweep.entries
    assert all(e.ok for e in entries)
    divs = [e.div_l2 for e in entries]
    errs = [e.l2_error_vs_reference for e in entries]
    assert divs[1] <= divs[0] / 5.0
    assert divs[2] <= divs[1] / 5.0
    assert errs[1] < errs[0] and errs[2] < errs[1]
    # extracted pressure at lambda = 1e4 vs the closed form whose gradient
    # balances the vortex inertia term (mean-zero gauge)
    x, y = g.coords()
    t_end = entries[-1].final_time
    p_exact = 0.25 * np.exp(-4.0 * mu * t_end) * (np.cos(2 * x) + np.cos(2 * y))
    p_num = entries[-1].pressure.phys
    rel = float(np.sqrt(np.sum((p_num - p_exact) ** 2) / np.sum(p_exact**2)))
    assert rel <= 0.05
    # div non-increasing in lambda at every recorded time (1.05 noise slack)
    for low, high in zip(entries, entries[1:]):
        for d_low, d_high in zip(low.div_series[1:], high.div_series[1:]):
            assert d_high <= d_low * 1.05
    # energy never exceeds its initial value on any ladder entry
    e0 = entries[0].energy_series[0]
    for entry in entries:
        assert max(entry.energy_series) <= e0 * (1 + 1e-6)
    # extrapolating the two largest entries at least halves the gap
    from lamens.penalty import extrapolate_lambda

    _, diag = extrapolate_lambda(sweep)
    assert diag["reduction"] <= 0.5
    report(f"ACCEPTANCE 7 PASS - div ladder {divs[0]:.3e} -> {divs[1]:.3e} -> "
           f"{divs[2]:.3e} (>=5x per decade), errors monotone "
           f"{errs[0]:.2e} > {errs[1]:.2e} > {errs[2]:.2e}, "
           f"pressure within {rel:.3%} <= 5%, extrapolation reduction "
           f"{diag['reduction']:.3f} <= 0.5")


def test_long_run_stability_shadow():
    # computable shadow of global continuation: the lambda = 1e3 run extended
    # to t_end = 5 completes with no blow-up record and bounded energy
    g = make_grid(2, 64)
    mu = 0.1
    config = StepperConfig(dt_init=1e-3, dt_min=1e-9)
    phi = taylor_green(g)
    traj = integrate(phi, 5.0, LameParams(mu=mu, lam=1e3), config,
                     snapshot_every=0)
    assert traj.termination == "completed"
    e0 = traj.series.energy[0]
    assert max(traj.series.energy) <= e0 * (1 + 1e-6)
    report(f"ACCEPTANCE note PASS - long run to t=5 completed, "
           f"max energy {max(traj.series.energy):.6f} <= initial {e0:.6f} (1+1e-6)")


# ---------------------------------------------------------------------- 8


def fourier_quadrature_z(x, t, params, cutoff=60.0):
    """Radial inversion of the propagator symbol (independent oracle)."""
    a = params.mu
    b = params.compressive_diffusivity
    r = float(np.linalg.norm(x))

    def radial_inverse(g, rr):
        val, _ = quad(lambda s: s * g(s) * np.sin(s * rr), 0.0, cutoff, limit=400)
        return val / (2.0 * np.pi**2 * rr)

    def diff_over_sq(s):
        return (np.exp(-t * b * s**2) - np.exp(-t * a * s**2)) / s**2

    heat = radial_inverse(lambda s: np.exp(-t * a * s**2), r)

    def dF(rr):
        val, _ = quad(lambda s: s * diff_over_sq(s)
                      * (s * np.cos(s * rr) / rr - np.sin(s * rr) / rr**2),
                      0.0, cutoff, limit=400)
        return val / (2.0 * np.pi**2)

    def d2F(rr):
        val, _ = quad(lambda s: s * diff_over_sq(s)
                      * (-s**2 * np.sin(s * rr) / rr
                         - 2.0 * s * np.cos(s * rr) / rr**2
                         + 2.0 * np.sin(s * rr) / rr**3),
                      0.0, cutoff, limit=400)
        return val / (2.0 * np.pi**2)

    x = np.asarray(x, dtype=float)
    hess_f = ((d2F(r) - dF(r) / r) * np.outer(x, x) / r**2
              + (dF(r) / r) * np.eye(3))
    return heat * np.eye(3) - hess_f


def _simpson_weights(n_nodes, h):
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _box_grid(params, t, n_nodes=121, spread=8.0):
    half = spread * np.sqrt(params.compressive_diffusivity * t)
    axis = np.linspace(-half, half, n_nodes)
    h = axis[1] - axis[0]
    w1 = _simpson_weights(n_nodes, h)
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    weights = w1[:, None, None] * w1[None, :, None] * w1[None, None, :]
    r = np.sqrt(x**2 + y**2 + z**2)
    return (x, y, z), r, weights


def test_criterion_8_kernel_oracle_and_z_mass():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(20):
        mu = float(rng.uniform(0.3, 2.0))
        lam = float(rng.uniform(-mu, 10.0))
        t = float(rng.uniform(0.1, 1.0))
        x = rng.uniform(-2.5, 2.5, size=3)
        if np.linalg.norm(x) < 0.2:
            x = x + 0.4
        params = LameParams(mu=mu, lam=lam)
        got = z_kernel(KernelPoint(tuple(x), t, params))
        want = fourier_quadrature_z(x, t, params)
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst <= 1e-8

    # truncated-box quadrature of the kernel mass
    params = LameParams(mu=1.0, lam=3.0)
    t = 0.5
    coords, r, weights = _box_grid(params, t)
    a_coef, b_coef = _z_radial_coeffs(params, t, r)
    mass = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            integrand = b_coef * coords[i] * coords[j]
            if i == j:
                integrand = integrand + a_coef
            mass[i, j] = float(np.sum(weights * integrand))
    gap = np.max(np.abs(mass - np.eye(3)))
    assert gap <= 1e-6
    report(f"ACCEPTANCE 8 PASS - kernel vs Fourier-quadrature oracle: worst "
           f"entry gap {worst:.2e} <= 1e-8 at 20 points; "
           f"|int Z dx - I| = {gap:.2e} <= 1e-6")


@pytest.mark.xfail(strict=True, reason=(
    "zero-mass requirement on the potential W: the truncated-box quadrature "
    "converges to -t*(lambda+mu), which is nonzero whenever lambda+mu > 0, "
    "so this assertion cannot hold"))
def test_criterion_8_w_mass_zero_as_stated():
    params = LameParams(mu=1.0, lam=3.0)
    t = 0.5
    _, r, weights = _box_grid(params, t)
    w_mass = float(np.sum(weights * _w_radial(params, t, r)))
    report(f"ACCEPTANCE 8b - measured int W dx = {w_mass:.8f} "
           f"(= -t*(lambda+mu) = {-t * (params.lam + params.mu)}), asserted 0")
    assert abs(w_mass) <= 1e-6


def test_criterion_8_w_mass_true_identity():
    # companion check pinning the analytic value of the W mass at the same
    # tolerance, which also validates the box quadrature itself
    params = LameParams(mu=1.0, lam=3.0)
    t = 0.5
    _, r, weights = _box_grid(params, t)
    w_mass = float(np.sum(weights * _w_radial(params, t, r)))
    expected = -t * (params.lam + params.mu)
    assert abs(w_mass - expected) <= 1e-6
    report(f"ACCEPTANCE 8c PASS - int W dx = {w_mass:.8f} matches "
           f"-t*(lambda+mu) = {expected} within 1e-6")


# ---------------------------------------------------------------------- 9


def test_criterion_9_gaussian_bound_reports():
    mu = 1.0
    spec = SampleSpec(r_max=4.0, t_min=0.01, t_max=1.0, n_r=17, n_t=9)
    ladder = [LameParams(mu=mu, lam=lam) for lam in (0.0, 1.0, 10.0, 100.0)]
    rep = verify_gaussian_bound(0, ladder, spec, decay_c=1.0 / (16.0 * mu))
    assert all(np.isfinite(c) and c > 0 for c in rep.fitted_c)

    heat = verify_gaussian_bound(0, [LameParams(mu=mu, lam=-mu)], spec,
                                 decay_c=1.0 / (16.0 * mu))
    closed_form = (4.0 * np.pi * mu) ** -1.5
    assert heat.fitted_c[0] == pytest.approx(closed_form, rel=0.05)
    fitted = ", ".join(f"lam={lam:g}: C={c:.3e}"
                       for lam, c in zip(rep.lambdas, rep.fitted_c))
    report(f"ACCEPTANCE 9 PASS - fitted constants finite ({fitted}); "
           f"heat case C={heat.fitted_c[0]:.6f} vs closed form "
           f"{closed_form:.6f} within 5%; growth with lambda reported: "
           f"{rep.monotone_growth} (not asserted)")


# ---------------------------------------------------------------------- 10


def test_criterion_10_gradient_closure():
    g = make_grid(2, 64)
    mu = 1.0
    phi = cole_hopf_oracle(g, theta0, mu, 0.0)
    config = StepperConfig(dt_init=1e-3, dt_min=1e-9)
    worst = 0.0
    for lam in (-mu, 0.0, 10.0):
        traj = integrate(phi, 0.5, LameParams(mu=mu, lam=lam), config,
                         snapshot_every=100)
        for u in traj.fields:
            worst = max(worst, solenoidal_fraction(u))
    assert worst <= 1e-10
    report(f"ACCEPTANCE 10 PASS - solenoidal fraction of gradient data stays "
           f"{worst:.2e} <= 1e-10 through t=0.5 at lambda in {{-mu, 0, 10}}")


# ---------------------------------------------------------------------- 11


def test_criterion_11_persistence_determinism(tmp_path):
    g = make_grid(2, 32)
    u = random_solenoidal(g, seed=42)
    params = LameParams(mu=0.3, lam=25.0)
    p1, p2 = tmp_path / "s1.bin", tmp_path / "s2.bin"
    write_snapshot(u, 0.125, params, p1)
    v, t, back = read_snapshot(p1)
    assert t == 0.125 and back == params
    assert np.array_equal(v.phys, u.phys)
    write_snapshot(v, t, back, p2)
    assert p1.read_bytes() == p2.read_bytes()

    body = ("dim = 2\ngrid_n = 32\nmu = 0.2\nlambda = 50\nt_end = 0.05\n"
            "dt_init = 1e-3\ninitial_condition = random_solenoidal\n"
            "ic_seed = 7\n")
    for name in ("a", "b"):
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(body + f"output_dir = {tmp_path / name}\n")
        assert dispatch(["simulate", "--config", str(cfg)]) == 0
    csv_a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    csv_b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
    assert csv_a == csv_b
    report("ACCEPTANCE 11 PASS - snapshot round trip bit-identical; "
           "seeded rerun reproduces the diagnostics CSV byte-for-byte")
