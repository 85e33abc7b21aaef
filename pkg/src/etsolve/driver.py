"""Run orchestration: configuration, ground state, propagation loop, outputs.

Configuration is a flat key = value text file (``#`` starts a comment).
Every key is validated against the known set - unknown keys are errors, so
a typo in a physics parameter cannot pass silently.  All quantities are in
atomic units; times in the observable schedule are in optical cycles.

Outputs (all CSV with headers, written into ``outdir``):

    density_<t>.csv    r, rho           (t in optical cycles)
    dipole.csv         t, a, F
    spectrum.csv       omega, omega_over_up, S
    klog.csv           t, K, err
    kmax.csv           l_max, dt, K_max (scan command)
    meta.json          resolved config, versions, timings, K statistics
    final_state.npz    checkpoint (self-describing, fingerprinted)

Runs are deterministic: a fixed seed and identical configuration reproduce
all numeric outputs bit-identically on one platform.
"""

import hashlib
import json
import math
import time as _time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy
import scipy.sparse.linalg as spla

from . import __version__
from .angular import coupling_table
from .errors import CheckpointError, ConfigError, NumericalError
from .grid import GridSpec, build_grid
from .hamiltonian import StateVector, assemble, field_free_block
from .observables import (density, dipole_acceleration, hhg_spectrum, norm)
from .propagator import KrylovWorkspace, lanczos_step
from .pulse import (GAUGE_LENGTH, GAUGE_VELOCITY, PulseSpec, SHAPE_FIELD,
                    SHAPE_NONE, SHAPE_VECTOR_POTENTIAL, field_and_potential)
from .scaling import ScalingSchedule, map_xi_to_r
from .stiffness import build_filter, format_localization_report, patch


@dataclass
class RunConfig:
    # grid
    r_sigma: float = 0.0
    xi_max: float = 0.0
    n_dvr: int = 0
    n_fe_inner: int = 0
    n_fe_outer: int = 0
    # angular
    l_max: int = 0
    # pulse
    wavelength: float | None = None
    omega: float | None = None
    intensity: float = 0.0
    cycles: float = 1.0
    shape: str = SHAPE_VECTOR_POTENTIAL
    gauge: str = GAUGE_LENGTH
    # scaling
    r_inf: float = 0.0
    # propagation
    dt: float = 0.0
    eps: float = 1e-15
    max_k: int = 1000
    total_cycles: float = 0.0
    # stiffness filter
    filter: bool = False
    n_fe_filter: int = 10
    e_cut: float = 900.0
    # observables
    snapshots: tuple = ()
    hhg: bool = False
    density_points: int = 2000
    density_r_max: float | None = None  # None = auto (simulated radius)
    hhg_omega_max_up: float = 4.0
    hhg_n_omega: int = 400
    # run
    outdir: str = "run"
    seed: int = 0
    # k_max scan
    scan_dt: tuple = ()
    scan_l_max: tuple = ()
    trials: int = 100


_REQUIRED = ("xi_max", "n_dvr", "dt", "total_cycles")

_PARSERS = {
    "r_sigma": float, "xi_max": float, "n_dvr": int,
    "n_fe_inner": int, "n_fe_outer": int,
    "l_max": int,
    "wavelength": float, "omega": float, "intensity": float, "cycles": float,
    "shape": str, "gauge": str,
    "r_inf": float,
    "dt": float, "eps": float, "max_k": int, "total_cycles": float,
    "filter": "bool", "n_fe_filter": int, "e_cut": float,
    "snapshots": "floats", "hhg": "bool",
    "density_points": int, "density_r_max": "auto_float",
    "hhg_omega_max_up": float, "hhg_n_omega": int,
    "outdir": str, "seed": int,
    "scan_dt": "floats", "scan_l_max": "ints", "trials": int,
}


def _parse_value(key, raw):
    kind = _PARSERS[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("on", "true", "yes", "1"):
                return True
            if low in ("off", "false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip()) if raw else ()
        if kind == "ints":
            return tuple(int(x) for x in raw.split(",") if x.strip()) if raw else ()
        if kind == "auto_float":
            return None if raw.lower() == "auto" else float(raw)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key} = {raw!r}: {exc}") from None


def parse_config(text):
    """Parse flat key = value text into a validated RunConfig."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if ("wavelength" in values) == ("omega" in values):
        raise ConfigError("specify exactly one of wavelength or omega")
    cfg = RunConfig(**values)
    if cfg.total_cycles < cfg.cycles and cfg.shape != SHAPE_NONE:
        raise ConfigError(
            f"total_cycles = {cfg.total_cycles} is shorter than the "
            f"{cfg.cycles}-cycle pulse")
    return cfg


def load_config(path):
    return parse_config(Path(path).read_text())


def config_text(cfg):
    """Canonical flat text of a resolved configuration."""
    lines = []
    for key, val in asdict(cfg).items():
        if val is None:
            val = "auto" if key == "density_r_max" else ""
            if not val:
                continue
        elif isinstance(val, bool):
            val = "on" if val else "off"
        elif isinstance(val, tuple):
            val = ",".join(f"{x:.17g}" if isinstance(x, float) else str(x)
                           for x in val)
        elif isinstance(val, float):
            val = f"{val:.17g}"
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def build_problem(cfg):
    """Instantiate grid, coupling, pulse, schedule and assembly from a config."""
    gspec = GridSpec(cfg.r_sigma, cfg.xi_max, cfg.n_dvr,
                     cfg.n_fe_inner, cfg.n_fe_outer)
    grid = build_grid(gspec)
    coupling = coupling_table(cfg.l_max)
    pulse = PulseSpec(intensity=cfg.intensity, cycles=cfg.cycles,
                      wavelength=cfg.wavelength, omega=cfg.omega,
                      shape=cfg.shape, gauge=cfg.gauge)
    schedule = ScalingSchedule(cfg.r_inf, pulse.duration)
    assembly = assemble(grid, coupling, schedule, pulse)
    filt = None
    if cfg.filter:
        filt = build_filter(grid, coupling, cfg.gauge, cfg.n_fe_filter, cfg.e_cut)
        patch(assembly, filt)
    return grid, coupling, pulse, schedule, assembly, filt


def ground_state(grid, n_ell, tol_dense=600):
    """Lowest eigenpair of the unscaled field-free l=0 block.

    Returns a normalized StateVector with everything outside l=0 zero, plus
    the eigenvalue.  The start vector of the iterative solver is fixed so
    repeated runs are bit-identical.
    """
    H0 = field_free_block(grid, 0)
    n = H0.shape[0]
    if n <= tol_dense:
        evals, evecs = np.linalg.eigh(H0.toarray())
        e0, vec = evals[0], evecs[:, 0]
    else:
        v0 = np.exp(-grid.nodes)
        e, v = spla.eigsh(H0, k=1, sigma=-0.55, which="LM", v0=v0, tol=0)
        e0, vec = float(e[0]), v[:, 0]
    # deterministic sign: largest-magnitude component positive
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    state = StateVector.zero(n_ell, n)
    state.coeffs[0] = vec
    state.normalize()
    return state, float(e0)


def grid_fingerprint(cfg):
    """Hash of everything the state layout and dynamics depend on."""
    keys = ("r_sigma", "xi_max", "n_dvr", "n_fe_inner", "n_fe_outer", "l_max",
            "wavelength", "omega", "intensity", "cycles", "shape", "gauge",
            "r_inf", "dt", "eps", "max_k", "filter", "n_fe_filter", "e_cut")
    d = asdict(cfg)
    blob = json.dumps({k: d[k] for k in keys}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_checkpoint(path, state, step_index, cfg):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, coeffs=state.coeffs, t=np.float64(state.t),
                 step=np.int64(step_index),
                 fingerprint=np.bytes_(grid_fingerprint(cfg).encode()),
                 config=np.bytes_(config_text(cfg).encode()))
    tmp.replace(path)


def read_checkpoint(path):
    """Returns (state, step_index, config).  Fingerprint is re-derived from
    the embedded config and must match the stored one."""
    with np.load(path) as data:
        cfg = parse_config(bytes(data["config"]).decode())
        stored = bytes(data["fingerprint"]).decode()
        if stored != grid_fingerprint(cfg):
            raise CheckpointError("checkpoint fingerprint does not match its config")
        state = StateVector(np.asarray(data["coeffs"], dtype=complex),
                            float(data["t"]))
        return state, int(data["step"]), cfg


def restore_into(cfg, path):
    """Validate a checkpoint against the current config and return
    (state, step_index)."""
    state, step_index, ck_cfg = read_checkpoint(path)
    if grid_fingerprint(ck_cfg) != grid_fingerprint(cfg):
        raise CheckpointError(
            "checkpoint belongs to a different grid/configuration")
    return state, step_index


def _write_csv(path, header, rows):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" if isinstance(x, float) else str(x)
                              for x in row) + "\n")
    tmp.replace(path)


@dataclass
class RunMetadata:
    config: dict
    versions: dict
    timings: dict
    nnz: int
    final_norm: float
    ground_energy: float
    k_max: int
    k_mean: float
    n_steps: int
    fingerprint: str
    seed: int
    extra: dict = field(default_factory=dict)

    def write(self, path):
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2, default=str) + "\n")
        tmp.replace(path)


def run(cfg, start=None, outdir=None):
    """Propagate per the configuration and write all scheduled outputs.

    ``start`` may be (state, step_index) from a checkpoint; the time grid is
    indexed (t_i = i dt), so a resumed run reproduces the unbroken one
    bit-identically.
    """
    timings = {}
    tic = _time.perf_counter()
    grid, coupling, pulse, schedule, assembly, filt = build_problem(cfg)
    timings["build"] = _time.perf_counter() - tic

    out = Path(outdir if outdir is not None else cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    if filt is not None:
        (out / "filter_report.txt").write_text(
            format_localization_report(filt) + "\n")

    tic = _time.perf_counter()
    gs_state, e0 = ground_state(grid, coupling.n_ell)
    timings["ground_state"] = _time.perf_counter() - tic

    if start is None:
        state, start_step = gs_state, 0
    else:
        state, start_step = start

    oc = pulse.optical_cycle
    n_steps = int(round(cfg.total_cycles * oc / cfg.dt))
    snap_steps = {int(round(c * oc / cfg.dt)): c for c in cfg.snapshots}

    klog = []
    dip = []
    ws = KrylovWorkspace(cfg.max_k, cfg.eps)

    def emit_snapshot(step_index, cyc):
        t = step_index * cfg.dt
        r_edge = cfg.density_r_max
        if r_edge is None:
            r_edge = float(map_xi_to_r(grid.spec.xi_max, t, grid.spec.r_sigma,
                                       schedule))
        r = np.linspace(0.0, r_edge, cfg.density_points)
        snap = density(state, grid, schedule, t, r)
        _write_csv(out / f"density_{cyc:g}.csv", ("r", "rho"),
                   zip(snap.r.tolist(), snap.rho.tolist()))

    def record_dipole(step_index):
        t = step_index * cfg.dt
        a = dipole_acceleration(state, grid, schedule, pulse, t)
        F = field_and_potential(pulse, t)[0]
        dip.append((t, a, F))

    if cfg.hhg:
        record_dipole(start_step)
    if start_step in snap_steps:
        emit_snapshot(start_step, snap_steps[start_step])

    tic = _time.perf_counter()
    for i in range(start_step, n_steps):
        assembly.update_time((i + 0.5) * cfg.dt)
        flat, rep = lanczos_step(assembly.apply, state.ravel(), cfg.dt,
                                 cfg.eps, cfg.max_k, ws)
        if not np.all(np.isfinite(flat)):
            raise NumericalError(f"non-finite state after step {i + 1}")
        state = StateVector(flat.reshape(state.coeffs.shape), (i + 1) * cfg.dt)
        klog.append(((i + 1) * cfg.dt, rep.k_used, rep.error_estimate))
        if cfg.hhg:
            record_dipole(i + 1)
        if (i + 1) in snap_steps:
            emit_snapshot(i + 1, snap_steps[i + 1])
    timings["propagation"] = _time.perf_counter() - tic

    tic = _time.perf_counter()
    _write_csv(out / "klog.csv", ("t", "K", "err"), klog)
    if cfg.hhg and dip:
        _write_csv(out / "dipole.csv", ("t", "a", "F"), dip)
        T = min(pulse.duration, n_steps * cfg.dt)
        rows = [r for r in dip if r[0] <= T * (1 + 1e-12)]
        times = np.array([r[0] for r in rows])
        accel = np.array([r[1] for r in rows])
        u_p = pulse.ponderomotive_energy
        omega_grid = np.linspace(0.0, cfg.hhg_omega_max_up * u_p,
                                 cfg.hhg_n_omega + 1)[1:] if u_p > 0 else \
            np.linspace(0.0, 2.0, cfg.hhg_n_omega + 1)[1:]
        spec = hhg_spectrum(times, accel, omega_grid, u_p=u_p or None)
        over = spec.omega_over_up if spec.omega_over_up is not None \
            else np.zeros_like(spec.omega)
        _write_csv(out / "spectrum.csv", ("omega", "omega_over_up", "S"),
                   zip(spec.omega.tolist(), over.tolist(), spec.s.tolist()))
    write_checkpoint(out / "final_state.npz", state, n_steps, cfg)
    timings["outputs"] = _time.perf_counter() - tic

    ks = [k for _, k, _ in klog]
    meta = RunMetadata(
        config=asdict(cfg),
        versions={"etsolve": __version__, "numpy": np.__version__,
                  "scipy": scipy.__version__},
        timings=timings,
        nnz=assembly.nnz_estimate(),
        final_norm=norm(state),
        ground_energy=e0,
        k_max=max(ks) if ks else 0,
        k_mean=float(np.mean(ks)) if ks else 0.0,
        n_steps=n_steps,
        fingerprint=grid_fingerprint(cfg),
        seed=cfg.seed,
    )
    meta.write(out / "meta.json")
    return meta


def run_kmax_scan(cfg, outdir=None):
    """Random-vector K_max table over (scan_l_max x scan_dt); writes kmax.csv."""
    from .propagator import kmax_scan

    if not cfg.scan_dt or not cfg.scan_l_max:
        raise ConfigError("scan needs scan_dt and scan_l_max")
    grid, coupling, pulse, schedule, assembly, filt = build_problem(cfg)
    assembly.update_time(0.0)
    table = kmax_scan(assembly, cfg.scan_dt, cfg.scan_l_max,
                      trials=cfg.trials, eps=cfg.eps, max_k=cfg.max_k,
                      seed=cfg.seed)
    out = Path(outdir if outdir is not None else cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(l, dt, (k if math.isfinite(k) else f">{cfg.max_k}"))
            for (l, dt), k in sorted(table.items())]
    _write_csv(out / "kmax.csv", ("l_max", "dt", "K_max"), rows)
    return table
