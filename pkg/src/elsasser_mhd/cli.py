"""Command line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 failed
verification, 3 blowup detected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .conditions import evaluate_all
from .config import ConfigError, parse_config, parse_sweep_config
from .dynamics import BLOWUP, CFL_VIOLATION, simulate
from .fields import from_elsasser, initial_elsasser
from .io import CorruptCheckpointError, checkpoint_read, checkpoint_write, write_json, write_timeseries
from .norms import hs_norm, lp_norm
from .spectral import divergence_max, to_physical
from .verification import (
    CheckReport,
    PreconditionError,
    check_apriori_thm1,
    check_apriori_thm2,
    check_energy_balance,
    check_scaling_equivalence,
    heat_oracle,
    self_convergence,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_BLOWUP = 3

log = logging.getLogger("elsasser_mhd")


def _load(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from None
    return text


def cmd_simulate(args) -> int:
    cfg = parse_config(_load(args.config))
    out = Path(args.out or cfg.output_directory)
    out.mkdir(parents=True, exist_ok=True)
    initial = initial_elsasser(cfg.initial, cfg.grid, cfg.params)
    result = simulate(initial, cfg.params, cfg.integrator, cfg.conditions, cfg.digest)
    formats = cfg.output_formats
    if "csv" in formats:
        write_timeseries(result.series, out / "timeseries.csv")
    if "json" in formats:
        write_json(
            {
                "config_digest": cfg.digest,
                "status": result.status,
                "steps_taken": result.steps_taken,
                "final_time": result.final.time,
                "kappa": cfg.params.kappa,
                "lambda": cfg.params.lam,
                "conditions": [r.to_dict() for r in result.conditions],
            },
            out / "summary.json",
        )
    if "checkpoint" in formats:
        checkpoint_write(result.final, cfg.params, out / "final.chk")
    if "png" in formats and len(result.series):
        from .figures import plot_monitors

        plot_monitors(result.series, out / "monitors.png", cfg.conditions.epsilon0)
    print(f"{result.status} after {result.steps_taken} steps, t={result.final.time:.6g}; output in {out}")
    if result.status == BLOWUP:
        return EXIT_BLOWUP
    if result.status == CFL_VIOLATION:
        print("cfl-violation: reduce integrator.dt", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = parse_config(_load(args.config))
    initial = initial_elsasser(cfg.initial, cfg.grid, cfg.params)
    reports = evaluate_all(cfg.params, initial, cfg.conditions)
    print(write_json([r.to_dict() for r in reports]))
    return EXIT_OK


def run_verification(cfg) -> list[CheckReport]:
    """The oracle and inequality suite for one configuration."""
    reports = []
    try:
        reports.append(heat_oracle(cfg.grid, cfg.params, cfg.integrator, cfg.initial))
    except PreconditionError as exc:
        reports.append(CheckReport("heat_oracle", True, float("nan"), 1e-10, False, {"reason": str(exc)}))
    initial = initial_elsasser(cfg.initial, cfg.grid, cfg.params)
    run = simulate(initial, cfg.params, cfg.integrator, cfg.conditions, cfg.digest)
    reports.append(check_apriori_thm1(run.series, cfg.conditions))
    reports.append(check_apriori_thm2(run.series, cfg.conditions))
    reports.append(check_energy_balance(run.series, cfg.params))
    reports.append(check_scaling_equivalence(initial, cfg.params, cfg.integrator))
    if cfg.verify_convergence:
        conv_cfg = replace(cfg.integrator, dt=cfg.verify_convergence_dt, t_end=cfg.verify_convergence_t_end)
        conv = self_convergence(initial, cfg.params, conv_cfg)
        if conv.exact_linear or not conv.applicable:
            reason = "linear part exact" if conv.exact_linear else "reference run did not complete"
            reports.append(CheckReport("self_convergence", True, float("nan"), 0.2, False, {"reason": reason, **conv.to_dict()}))
        else:
            margin = 0.2 - abs(conv.order - 2.0)
            reports.append(CheckReport("self_convergence", margin >= 0, margin, 0.0, True, conv.to_dict()))
    return reports


def cmd_verify(args) -> int:
    cfg = parse_config(_load(args.config))
    reports = run_verification(cfg)
    payload = [r.to_dict() for r in reports]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(payload, out / "verification.json")
    print(write_json(payload))
    for r in reports:
        print(f"{r.status:15s} {r.name}", file=sys.stderr)
    return EXIT_VERIFY if any(r.status == "failed" for r in reports) else EXIT_OK


def cmd_sweep(args) -> int:
    from .sweep import run_sweep, sweep_columns, write_sweep_table

    sc = parse_sweep_config(_load(args.config))
    rows = run_sweep(sc)
    cols = sweep_columns(sc)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_table(rows, cols, out / "sweep.csv")
        if sc.axes:
            from .figures import plot_sweep

            plot_sweep(rows, sc.axes[0][0], out / "sweep.png")
    else:
        write_sweep_table(rows, cols, sys.stdout)
    return EXIT_OK


def cmd_norms(args) -> int:
    try:
        state, params = checkpoint_read(args.checkpoint)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    prim = from_elsasser(state)
    out = {"time": state.time, "n": state.grid.n, "re": params.re, "rm": params.rm, "s": params.s_coupling}
    for name, f in (("w_plus", state.w_plus), ("w_minus", state.w_minus), ("u", prim.u), ("b", prim.b)):
        phys = to_physical(f)
        out[name] = {
            "l2": lp_norm(phys, 2.0),
            "l3": lp_norm(phys, 3.0),
            "l9": lp_norm(phys, 9.0),
            "h12": hs_norm(f, 0.5),
            "h1": hs_norm(f, 1.0),
            "h32": hs_norm(f, 1.5),
            "div_max": divergence_max(f),
        }
    out["energy_u"] = 0.5 * out["u"]["l2"] ** 2
    out["energy_b"] = 0.5 * out["b"]["l2"] ** 2
    print(write_json(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elsasser-mhd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and write monitors")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: output.directory)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="evaluate the smallness conditions only")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="run the oracle and inequality suite")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="evaluate a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("norms", help="print all norms of a checkpointed state")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_norms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CorruptCheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
