"""Operational shell: config files, snapshots, run manifests and the CLI.

Config files are flat ``key = value`` text (``#`` comments allowed); parsing
validates every constraint and reports all violations at once.  Snapshots
use a fixed little-endian binary layout so write/read round-trips are
bit-exact and runs can be resumed or compared byte-for-byte.  Every run
directory receives a manifest listing each emitted file.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
import time
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import SampleSpec, verify_gaussian_bound
from .penalty import lambda_sweep
from .semigroup import LameParams
from .spectral import (
    Grid,
    VectorField,
    l2_diff,
    l2_norm,
    make_grid,
    project_solenoidal,
)
from .stepper import (
    BlowUpDetected,
    StepTooSmall,
    StepperConfig,
    cole_hopf_oracle,
    integrate,
)

SNAPSHOT_MAGIC = b"LAMENS01"

INITIAL_CONDITIONS = (
    "taylor_green_2d",
    "taylor_green_3d",
    "abc_flow",
    "gradient_cole_hopf",
    "random_solenoidal",
    "snapshot_file",
)


class BadMagic(Exception):
    """Snapshot file does not start with the expected magic bytes."""


class TruncatedPayload(Exception):
    """Snapshot payload shorter than the header promises."""


class DimensionMismatch(Exception):
    """Snapshot grid does not match the expected grid."""


@dataclass
class Violation:
    kind: str  # "unknown_key" | "bad_value" | "constraint"
    key: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.key}: {self.message}"


class ConfigError(Exception):
    """Carries the full list of config violations, not just the first."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


@dataclass
class RunConfig:
    """Validated run parameters with documented defaults."""

    dim: int = 2
    grid_n: int = 64
    mu: float = 0.1
    lam: float | None = None
    lambda_list: list[float] | None = None
    t_end: float = 1.0
    dt_init: float = 1e-3
    dt_min: float = 1e-9
    picard_tol: float = 1e-10
    picard_max: int = 50
    cfl_constant: float = 0.5
    dealias: bool = True
    initial_condition: str = "taylor_green_2d"
    ic_seed: int = 0
    ic_spectrum_slope: float = -2.0
    ic_path: str = ""
    output_dir: str = "runs/out"
    snapshot_every: int = 0
    abort_h1_factor: float = 1e8

    def stepper_config(self) -> StepperConfig:
        return StepperConfig(
            dt_init=self.dt_init,
            picard_tol=self.picard_tol,
            picard_max=self.picard_max,
            dt_min=self.dt_min,
            cfl_constant=self.cfl_constant,
            dealias_enabled=self.dealias,
        )

    def echo(self) -> dict:
        out = {}
        for f in dataclass_fields(self):
            out[f.name] = getattr(self, f.name)
        return out


_KEY_ALIASES = {"lambda": "lam"}
_BOOL_KEYS = {"dealias"}
_INT_KEYS = {"dim", "grid_n", "picard_max", "ic_seed", "snapshot_every"}
_FLOAT_KEYS = {"mu", "lam", "t_end", "dt_init", "dt_min", "picard_tol",
               "cfl_constant", "ic_spectrum_slope", "abort_h1_factor"}
_STR_KEYS = {"initial_condition", "ic_path", "output_dir"}
_LIST_KEYS = {"lambda_list"}
_ALL_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_value(key: str, raw: str, violations: list[Violation]):
    raw = raw.strip()
    try:
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        return raw
    except ValueError as exc:
        violations.append(Violation("bad_value", key, str(exc)))
        return None


def parse_config(text: str) -> RunConfig:
    """Parse a flat key-value document into a validated RunConfig.

    Raises ConfigError carrying every violation found (unknown keys, value
    parse failures, and constraint violations such as lambda + mu < 0).
    """
    violations: list[Violation] = []
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            violations.append(Violation("bad_value", f"line {lineno}",
                                        f"expected key = value, got {stripped!r}"))
            continue
        key, raw = stripped.split("=", 1)
        key = _KEY_ALIASES.get(key.strip(), key.strip())
        if key not in _ALL_KEYS:
            violations.append(Violation("unknown_key", key, "not a recognized key"))
            continue
        parsed = _parse_value(key, raw, violations)
        if parsed is not None:
            values[key] = parsed

    cfg = RunConfig(**values)
    _validate_config(cfg, violations)
    if violations:
        raise ConfigError(violations)
    return cfg


def _validate_config(cfg: RunConfig, violations: list[Violation]) -> None:
    def bad(key, message):
        violations.append(Violation("constraint", key, message))

    if cfg.dim not in (2, 3):
        bad("dim", f"must be 2 or 3, got {cfg.dim}")
    if cfg.grid_n < 4 or cfg.grid_n % 2 != 0:
        bad("grid_n", f"must be even and >= 4, got {cfg.grid_n}")
    if not cfg.mu > 0:
        bad("mu", f"must be positive, got {cfg.mu}")
    if cfg.lam is None and cfg.lambda_list is None:
        bad("lambda", "one of lambda or lambda_list is required")
    if cfg.lam is not None and cfg.lambda_list is not None:
        bad("lambda", "give either lambda or lambda_list, not both")
    if cfg.lam is not None and cfg.lam + cfg.mu < 0:
        bad("lambda", f"lambda + mu >= 0 required, got lambda={cfg.lam}, mu={cfg.mu}")
    if cfg.lambda_list is not None:
        if any(b <= a for a, b in zip(cfg.lambda_list, cfg.lambda_list[1:])):
            bad("lambda_list", "must be strictly increasing")
        for lam in cfg.lambda_list:
            if lam + cfg.mu < 0:
                bad("lambda_list",
                    f"lambda + mu >= 0 required, got lambda={lam}, mu={cfg.mu}")
    if not cfg.t_end > 0:
        bad("t_end", f"must be positive, got {cfg.t_end}")
    if not cfg.dt_init > cfg.dt_min > 0:
        bad("dt_init", f"need dt_init > dt_min > 0, got {cfg.dt_init}, {cfg.dt_min}")
    if not cfg.picard_tol > 0:
        bad("picard_tol", f"must be positive, got {cfg.picard_tol}")
    if cfg.picard_max < 2:
        bad("picard_max", f"must be at least 2, got {cfg.picard_max}")
    if not cfg.cfl_constant > 0:
        bad("cfl_constant", f"must be positive, got {cfg.cfl_constant}")
    if cfg.snapshot_every < 0:
        bad("snapshot_every", f"must be nonnegative, got {cfg.snapshot_every}")
    if not cfg.abort_h1_factor > 1:
        bad("abort_h1_factor", f"must exceed 1, got {cfg.abort_h1_factor}")
    if cfg.initial_condition not in INITIAL_CONDITIONS:
        bad("initial_condition",
            f"unknown choice {cfg.initial_condition!r}; options: {INITIAL_CONDITIONS}")
    if cfg.initial_condition == "taylor_green_2d" and cfg.dim != 2:
        bad("initial_condition", "taylor_green_2d requires dim = 2")
    if cfg.initial_condition in ("taylor_green_3d", "abc_flow") and cfg.dim != 3:
        bad("initial_condition", f"{cfg.initial_condition} requires dim = 3")
    if cfg.initial_condition == "snapshot_file" and not cfg.ic_path:
        bad("ic_path", "snapshot_file initial condition needs ic_path")


# ---------------------------------------------------------------------------
# initial conditions


def taylor_green_2d(grid: Grid) -> VectorField:
    x, y = grid.coords()
    u = np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    return VectorField.from_physical(grid, u)


def taylor_green_3d(grid: Grid) -> VectorField:
    x, y, z = grid.coords()
    u = np.stack([
        np.sin(x) * np.cos(y) * np.cos(z),
        -np.cos(x) * np.sin(y) * np.cos(z),
        np.zeros(grid.shape),
    ])
    return VectorField.from_physical(grid, u)


def abc_flow(grid: Grid, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> VectorField:
    x, y, z = grid.coords()
    u = np.stack([
        a * np.sin(z) + c * np.cos(y),
        b * np.sin(x) + a * np.cos(z),
        c * np.sin(y) + b * np.cos(x),
    ])
    return VectorField.from_physical(grid, u)


def random_solenoidal(grid: Grid, seed: int, spectrum_slope: float = -2.0) -> VectorField:
    """Seeded divergence-free field with |u_hat(k)| ~ (1+|k|^2)^{slope/2}.

    Band-limited to the dealiased range and normalized to max|u| = 1.
    """
    rng = np.random.default_rng(seed)
    shape = (grid.dim,) + grid.shape
    coeffs = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    envelope = (1.0 + grid.k_sq) ** (spectrum_slope / 2.0)
    envelope = envelope * grid.dealias_mask
    envelope[(0,) * grid.dim] = 0.0
    raw = VectorField.from_spectral(grid, coeffs * envelope[np.newaxis],
                                    symmetrize=True)
    sol = project_solenoidal(raw)
    peak = sol.max_abs()
    if peak == 0.0:
        return sol
    return VectorField.from_physical(grid, sol.phys / peak)


def cole_hopf_theta0(coords0, *rest):
    """Default strictly positive heat state 2 + cos(x1)."""
    return 2.0 + np.cos(coords0)


def build_initial_condition(cfg: RunConfig, grid: Grid) -> VectorField:
    name = cfg.initial_condition
    if name == "taylor_green_2d":
        return taylor_green_2d(grid)
    if name == "taylor_green_3d":
        return taylor_green_3d(grid)
    if name == "abc_flow":
        return abc_flow(grid)
    if name == "gradient_cole_hopf":
        return cole_hopf_oracle(grid, cole_hopf_theta0, cfg.mu, 0.0)
    if name == "random_solenoidal":
        return random_solenoidal(grid, cfg.ic_seed, cfg.ic_spectrum_slope)
    if name == "snapshot_file":
        u, _, _ = read_snapshot(cfg.ic_path, expected_grid=grid)
        return u
    raise ValueError(f"unknown initial condition {name!r}")


# ---------------------------------------------------------------------------
# snapshot persistence


def write_snapshot(u: VectorField, t: float, params: LameParams, path) -> None:
    """Write magic + header + little-endian float64 payload (x1 fastest)."""
    grid = u.grid
    ncomp = u.phys.shape[0]
    header = struct.pack("<III", grid.dim, grid.n, ncomp)
    scalars = struct.pack("<ddd", float(t), params.mu, params.lam)
    payload = b"".join(
        np.asarray(u.phys[c], dtype="<f8").ravel(order="F").tobytes()
        for c in range(ncomp)
    )
    Path(path).write_bytes(SNAPSHOT_MAGIC + header + scalars + payload)


def read_snapshot(path, expected_grid: Grid | None = None):
    """Read a snapshot; returns (field, t, params).  Bit-exact round trip."""
    blob = Path(path).read_bytes()
    if blob[: len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise BadMagic(f"{path}: bad magic {blob[:8]!r}")
    off = len(SNAPSHOT_MAGIC)
    if len(blob) < off + 12 + 24:
        raise TruncatedPayload(f"{path}: header truncated")
    dim, n, ncomp = struct.unpack_from("<III", blob, off)
    off += 12
    t, mu, lam = struct.unpack_from("<ddd", blob, off)
    off += 24
    expected_payload = ncomp * n**dim * 8
    if len(blob) - off != expected_payload:
        raise TruncatedPayload(
            f"{path}: payload {len(blob) - off} bytes, expected {expected_payload}"
        )
    grid = make_grid(dim, n)
    if expected_grid is not None and (expected_grid.dim, expected_grid.n) != (dim, n):
        raise DimensionMismatch(
            f"{path}: snapshot grid {dim}x{n}, expected "
            f"{expected_grid.dim}x{expected_grid.n}"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=off)
    phys = np.stack([
        flat[c * n**dim:(c + 1) * n**dim].reshape(grid.shape, order="F")
        for c in range(ncomp)
    ])
    field = VectorField.from_physical(grid, phys)
    return field, t, LameParams(mu=mu, lam=lam)


# ---------------------------------------------------------------------------
# manifests and reports


class RunManifest:
    """Inventory of one run directory; every emitted file is listed once."""

    def __init__(self, out_dir: Path, config_echo: dict):
        self.out_dir = out_dir
        self.data = {
            "artifact_version": __version__,
            "config": config_echo,
            "start_wall_time": time.time(),
            "end_wall_time": None,
            "files": [],
            "termination": "completed",
        }

    def add_file(self, path: Path) -> None:
        rel = str(path.relative_to(self.out_dir))
        if rel not in self.data["files"]:
            self.data["files"].append(rel)

    def finish(self, termination: str) -> Path:
        self.data["termination"] = termination
        self.data["end_wall_time"] = time.time()
        path = self.out_dir / "manifest.json"
        self.data["files"].append("manifest.json")
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        return path


def _write_text(path: Path, text: str, manifest: RunManifest) -> None:
    path.write_text(text)
    manifest.add_file(path)


def _emit_snapshot(u, t, params, path: Path, manifest: RunManifest) -> None:
    write_snapshot(u, t, params, path)
    manifest.add_file(path)


# ---------------------------------------------------------------------------
# pipelines


def run_simulate(cfg: RunConfig) -> int:
    if cfg.lam is None:
        print(json.dumps({"error": "constraint",
                          "message": "simulate needs a single lambda"}),
              file=sys.stderr)
        return 2
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(out_dir, cfg.echo())
    grid = make_grid(cfg.dim, cfg.grid_n)
    phi = build_initial_condition(cfg, grid)
    params = LameParams(mu=cfg.mu, lam=cfg.lam)
    termination = "completed"
    try:
        traj = integrate(
            phi, cfg.t_end, params, cfg.stepper_config(),
            snapshot_every=cfg.snapshot_every,
            abort_h1_factor=cfg.abort_h1_factor,
        )
    except BlowUpDetected as exc:
        traj = exc.trajectory
        termination = "blow_up"
    except StepTooSmall:
        manifest.finish("step_too_small")
        return 3

    _write_text(out_dir / "diagnostics.csv", traj.series.to_csv_text(), manifest)
    for idx, (t, u) in enumerate(zip(traj.times, traj.fields)):
        _emit_snapshot(u, t, params, out_dir / f"snapshot_{idx:06d}.bin", manifest)
    manifest.finish(termination)
    return 0 if termination == "completed" else 3


def run_sweep(cfg: RunConfig) -> int:
    if cfg.lambda_list is None:
        print(json.dumps({"error": "constraint",
                          "message": "sweep needs lambda_list"}), file=sys.stderr)
        return 2
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(out_dir, cfg.echo())
    grid = make_grid(cfg.dim, cfg.grid_n)
    phi = build_initial_condition(cfg, grid)
    report = lambda_sweep(phi, cfg.t_end, cfg.mu, cfg.lambda_list,
                          cfg.stepper_config(), snapshot_every=cfg.snapshot_every)

    def finite_or_none(value):
        return float(value) if np.isfinite(value) else None

    records = []
    for i, entry in enumerate(report.entries):
        record = {
            "lambda": entry.lam,
            "status": entry.status,
            "final_time": finite_or_none(entry.final_time),
            "l2_error_vs_reference": finite_or_none(entry.l2_error_vs_reference),
            "sup_error_vs_reference": finite_or_none(entry.sup_error_vs_reference),
            "div_l2": finite_or_none(entry.div_l2),
            "pressure_field_checksum": entry.pressure_field_checksum,
        }
        records.append(record)
        if entry.ok:
            sub = out_dir / f"lambda_{i:02d}"
            sub.mkdir(exist_ok=True)
            lines = ["t,energy,div_l2"]
            for t, en, dv in zip(entry.times, entry.energy_series, entry.div_series):
                lines.append(f"{t!r},{en!r},{dv!r}")
            _write_text(sub / "series.csv", "\n".join(lines) + "\n", manifest)
            _emit_snapshot(entry.final_field, entry.final_time,
                           LameParams(mu=cfg.mu, lam=entry.lam),
                           sub / "final.bin", manifest)
    payload = {
        "mu": report.mu,
        "t_end": report.t_end,
        "entries": records,
        "rate_div_vs_lambda": finite_or_none(report.rate_div),
        "rate_error_vs_lambda": finite_or_none(report.rate_error),
    }
    _write_text(out_dir / "sweep_report.json",
                json.dumps(payload, indent=2, sort_keys=True) + "\n", manifest)
    manifest.finish("completed")
    return 0


def run_kernel_check(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lambdas = [float(tok) for tok in args.lambdas.split(",") if tok.strip()]
    params_list = [LameParams(mu=args.mu, lam=lam) for lam in lambdas]
    spec = SampleSpec(r_max=args.r_max, t_min=args.t_min, t_max=args.t_max)
    manifest = RunManifest(out_dir, {
        "alpha": args.alpha, "mu": args.mu, "lambdas": lambdas,
        "c": args.c, "sample_box": spec.describe(),
    })
    report = verify_gaussian_bound(args.alpha, params_list, spec,
                                   decay_c=args.c, keep_samples=True)
    payload = {
        "alpha_order": report.alpha_order,
        "decay_c": report.decay_c,
        "lambdas": report.lambdas,
        "fitted_c": report.fitted_c,
        "sample_box": report.sample_box,
        "monotone_growth_with_lambda": bool(report.monotone_growth),
    }
    _write_text(out_dir / "bound_report.json",
                json.dumps(payload, indent=2, sort_keys=True) + "\n", manifest)
    lines = ["lambda,r,t,value"]
    for lam, r, t, value in report.samples:
        lines.append(f"{lam!r},{r!r},{t!r},{value!r}")
    _write_text(out_dir / "samples.csv", "\n".join(lines) + "\n", manifest)
    manifest.finish("completed")
    return 0


def run_compare(args) -> int:
    ua, ta, pa = read_snapshot(args.a)
    ub, tb, pb = read_snapshot(args.b)
    if ua.grid != ub.grid:
        print(json.dumps({"error": "dimension_mismatch",
                          "message": f"{ua.grid} vs {ub.grid}"}), file=sys.stderr)
        return 2
    diff = ua.phys - ub.phys
    payload = {
        "t_a": ta, "t_b": tb,
        "l2_difference": l2_diff(ua, ub),
        "max_difference": float(np.max(np.abs(diff))),
        "l2_a": l2_norm(ua), "l2_b": l2_norm(ub),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def run_burgers_oracle(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(args.dim, args.n)
    mu = args.mu
    params = LameParams(mu=mu, lam=-mu)
    manifest = RunManifest(out_dir, {
        "dim": args.dim, "n": args.n, "mu": mu,
        "t_end": args.t_end, "dt": args.dt,
    })
    phi = cole_hopf_oracle(grid, cole_hopf_theta0, mu, 0.0)
    config = StepperConfig(dt_init=args.dt, dt_min=args.dt * 1e-6)
    traj = integrate(phi, args.t_end, params, config, snapshot_every=0)
    oracle = cole_hopf_oracle(grid, cole_hopf_theta0, mu, traj.final_time)
    _emit_snapshot(traj.final_field, traj.final_time, params,
                   out_dir / "computed.bin", manifest)
    _emit_snapshot(oracle, traj.final_time, params,
                   out_dir / "oracle.bin", manifest)
    _write_text(out_dir / "diagnostics.csv", traj.series.to_csv_text(), manifest)
    payload = {
        "t_end": traj.final_time,
        "l2_error_vs_oracle": l2_diff(traj.final_field, oracle),
        "max_contraction_ratio": max(
            (rec.contraction_ratio for rec in traj.step_records), default=0.0),
    }
    _write_text(out_dir / "oracle_report.json",
                json.dumps(payload, indent=2, sort_keys=True) + "\n", manifest)
    manifest.finish("completed")
    return 0


# ---------------------------------------------------------------------------
# CLI


def _load_config(path: str) -> RunConfig:
    return parse_config(Path(path).read_text())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamens",
        description="Grad-div penalty route to incompressible flow on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate one run from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--output-dir", default=None)

    p_sweep = sub.add_parser("sweep", help="run a lambda ladder and report convergence")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--output-dir", default=None)

    p_kernel = sub.add_parser("kernel-check", help="fit Gaussian-bound constants")
    p_kernel.add_argument("--alpha", type=int, default=0, choices=(0, 1, 2))
    p_kernel.add_argument("--lambdas", default="0,1,10,100")
    p_kernel.add_argument("--mu", type=float, default=1.0)
    p_kernel.add_argument("--c", type=float, default=None,
                          help="decay constant; default 1/(16 mu)")
    p_kernel.add_argument("--r-max", type=float, default=4.0)
    p_kernel.add_argument("--t-min", type=float, default=0.01)
    p_kernel.add_argument("--t-max", type=float, default=1.0)
    p_kernel.add_argument("--output-dir", default="runs/kernel_check")

    p_cmp = sub.add_parser("compare", help="L2/max difference of two snapshots")
    p_cmp.add_argument("--a", required=True)
    p_cmp.add_argument("--b", required=True)

    p_bo = sub.add_parser("burgers-oracle",
                          help="gradient-flow run checked against the analytic solution")
    p_bo.add_argument("--dim", type=int, default=2, choices=(2, 3))
    p_bo.add_argument("--n", type=int, default=64)
    p_bo.add_argument("--mu", type=float, default=1.0)
    p_bo.add_argument("--t-end", type=float, default=0.5)
    p_bo.add_argument("--dt", type=float, default=1e-3)
    p_bo.add_argument("--output-dir", default="runs/burgers_oracle")
    return parser


def dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in ("simulate", "sweep"):
            cfg = _load_config(args.config)
            if args.output_dir is not None:
                cfg.output_dir = args.output_dir
            return run_simulate(cfg) if args.command == "simulate" else run_sweep(cfg)
        if args.command == "kernel-check":
            return run_kernel_check(args)
        if args.command == "compare":
            return run_compare(args)
        if args.command == "burgers-oracle":
            return run_burgers_oracle(args)
    except ConfigError as exc:
        record = {"error": "config",
                  "violations": [str(v) for v in exc.violations]}
        print(json.dumps(record), file=sys.stderr)
        return 2
    except (BadMagic, TruncatedPayload, DimensionMismatch) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 2
    return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
