"""Command-line entry point.

    etsolve run <config>            propagate and write outputs
    etsolve scan-kmax <config>      random-vector K_max table
    etsolve ground-state <config>   field-free ground state + checkpoint
    etsolve resume <checkpoint>     continue a checkpointed run

Exit codes: 0 success, 2 configuration error, 3 stiffness abort,
4 numerical abort.  ETSOLVE_NUM_THREADS caps the BLAS thread count (must be
set before any worker math runs, hence handled here before importing numpy).
"""

import argparse
import os
import sys


def _apply_thread_env():
    n = os.environ.get("ETSOLVE_NUM_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, n)


def main(argv=None):
    _apply_thread_env()

    parser = argparse.ArgumentParser(
        prog="etsolve",
        description="Radial strong-field TDSE solver with exterior time scaling")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "propagate per the configuration"),
                        ("scan-kmax", "measure K_max over (l_max, dt)"),
                        ("ground-state", "compute and checkpoint the ground state")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="flat key = value configuration file")
        p.add_argument("--outdir", help="override the configured output directory")
    p = sub.add_parser("resume", help="continue from a checkpoint")
    p.add_argument("checkpoint", help="final_state.npz from an earlier run")
    p.add_argument("--outdir", help="output directory (default: alongside checkpoint)")
    args = parser.parse_args(argv)

    from . import driver
    from .errors import (CheckpointError, ConfigError, InvalidSpecError,
                         LocalizationError, NumericalError, StiffnessError)

    try:
        if args.command == "run":
            cfg = driver.load_config(args.config)
            meta = driver.run(cfg, outdir=args.outdir)
            print(f"done: {meta.n_steps} steps, K_max={meta.k_max}, "
                  f"final norm={meta.final_norm:.12f}")
        elif args.command == "scan-kmax":
            cfg = driver.load_config(args.config)
            table = driver.run_kmax_scan(cfg, outdir=args.outdir)
            for (l, dt), k in sorted(table.items()):
                print(f"l_max={l:4d}  dt={dt:<8g}  K_max={k}")
        elif args.command == "ground-state":
            cfg = driver.load_config(args.config)
            grid, coupling, *_ = driver.build_problem(cfg)
            state, e0 = driver.ground_state(grid, coupling.n_ell)
            outdir = args.outdir or cfg.outdir
            os.makedirs(outdir, exist_ok=True)
            path = os.path.join(outdir, "ground_state.npz")
            driver.write_checkpoint(path, state, 0, cfg)
            print(f"ground-state energy: {e0:.12f} (checkpoint: {path})")
        else:  # resume
            state, step_index, cfg = driver.read_checkpoint(args.checkpoint)
            outdir = args.outdir or os.path.dirname(os.path.abspath(args.checkpoint))
            meta = driver.run(cfg, start=(state, step_index), outdir=outdir)
            print(f"done: resumed at step {step_index}, K_max={meta.k_max}, "
                  f"final norm={meta.final_norm:.12f}")
    except (ConfigError, InvalidSpecError, CheckpointError, LocalizationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StiffnessError as exc:
        print(f"stiffness abort: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
