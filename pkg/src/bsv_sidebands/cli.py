"""
Command-line front end.

Subcommands: model (closed-form observables, optional brute-force oracle
cross-check), scan (phase maps and line cuts), simulate (synthetic shot
CSV), analyze (per-channel statistics reports), selfcheck (oracle
equivalence plus estimator calibration).  Machine-readable JSON goes to
stdout, human logs to stderr; exit code 0 means every requested check
passed, 1 a failed check, 2 a usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config, fock, model, pipeline, scan, selfcheck, serialize

USAGE_ERROR = 2
CHECK_FAILED = 1


def log(message: str) -> None:
    print(message, file=sys.stderr)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="key=value config file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker cap (results are thread-count independent)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsv-sidebands",
        description="Quantum-optical sideband model, Fock oracle and photon statistics pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_model = sub.add_parser("model", help="closed-form sideband observables")
    _add_common(p_model)
    p_model.add_argument("--oracle", action="store_true", help="cross-check against the Fock oracle")
    p_model.add_argument("--tol", type=float, default=1e-6, help="relative tolerance for the oracle check")
    p_model.add_argument("--leakage", type=float, default=1e-8, help="oracle truncation target")
    p_model.add_argument("--max-dim", type=int, default=3_000_000, help="oracle total-dimension cap")

    p_scan = sub.add_parser("scan", help="phase maps over (phi, theta1-theta2)")
    _add_common(p_scan)
    p_scan.add_argument("--cut", type=float, default=None, help="also write a line cut at this dtheta (radians)")

    p_sim = sub.add_parser("simulate", help="synthetic experiment shot CSV")
    _add_common(p_sim)
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_ana = sub.add_parser("analyze", help="per-channel reports from a shot CSV")
    _add_common(p_ana)
    p_ana.add_argument("input", type=Path, help="shot CSV (shot_id,pmt_adu,bsv_monitor,mir_monitor)")
    p_ana.add_argument("--no-postselect", action="store_true", help="skip the pump-band post-selection")

    p_check = sub.add_parser("selfcheck", help="oracle equivalence and estimator calibration")
    _add_common(p_check)
    p_check.add_argument("--full", action="store_true", help="acceptance-scale sweep (slower)")
    p_check.add_argument("--seed", type=int, default=selfcheck.ORACLE_SWEEP_SEED)
    p_check.add_argument("--tol", type=float, default=1e-6)

    return parser


def _emit(payload, outdir: Path | None, name: str) -> None:
    text = serialize.dumps(payload)
    print(text)
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / name).write_text(text + "\n")


def cmd_model(args) -> int:
    cfg = config.load_config(args.config)
    params = config.model_params_from(cfg)
    obs = model.observables(params)
    payload = {
        "mean_n": obs.mean_n,
        "var_x": obs.var_x,
        "var_p": obs.var_p,
        "a_sq": {"re": obs.a_sq.real, "im": obs.a_sq.imag},
        "var_min": obs.var_min,
        "var_max": obs.var_max,
        "efficiency": (
            model.conversion_efficiency(params) if params.squeeze.r > 0 else None
        ),
        "label": scan.classify_state(obs.var_x, obs.var_p).value,
    }
    status = 0
    if args.oracle:
        oracle = fock.oracle_observables(
            params, target_leakage=args.leakage, max_total_dim=args.max_dim
        )
        deltas = {
            "mean_n": _rel(obs.mean_n, oracle["mean_n"]),
            "var_x": _rel(obs.var_x, oracle["var_x"]),
            "var_p": _rel(obs.var_p, oracle["var_p"]),
            "a_sq": _rel(obs.a_sq, oracle["a_sq"]),
        }
        payload["oracle"] = {
            "mean_n": oracle["mean_n"],
            "var_x": oracle["var_x"],
            "var_p": oracle["var_p"],
            "a_sq": {"re": oracle["a_sq"].real, "im": oracle["a_sq"].imag},
            "cutoff0": oracle["cutoff0"],
            "cutoff_sb": oracle["cutoff_sb"],
            "leak0": oracle["leak0"],
            "leak_sb": oracle["leak_sb"],
        }
        payload["deltas"] = deltas
        payload["tol"] = args.tol
        worst = max(deltas.values())
        payload["agree"] = bool(worst < args.tol)
        if worst >= args.tol:
            log(f"oracle disagreement: worst relative delta {worst:.3e} >= {args.tol:g}")
            status = CHECK_FAILED
    _emit(payload, args.out, "model.json")
    if args.out is not None:
        config.write_resolved(cfg, args.out)
    return status


def _rel(a, b) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale < 1e-15 else abs(a - b) / scale


def cmd_scan(args) -> int:
    cfg = config.load_config(args.config)
    params = config.model_params_from(cfg)
    phi_axis, dtheta_axis = config.grid_axes_from(cfg)
    grid = scan.phase_map(params, phi_axis, dtheta_axis)
    outdir = args.out or Path("scan_out")
    written = scan.write_map_csv(grid, outdir)
    if args.cut is not None:
        cut = scan.line_cut(grid, args.cut)
        cut_path = Path(outdir) / "line_cut.csv"
        scan.write_cut_csv(cut, cut_path)
        written.append(cut_path)
    config.write_resolved(cfg, outdir)
    ok = grid.heisenberg_ok()
    print(
        serialize.dumps(
            {
                "files": [str(p) for p in written],
                "heisenberg_ok": ok,
                "n_points": int(grid.plane_n.size),
            }
        )
    )
    if not ok:
        log("Heisenberg bound violated on the grid")
        return CHECK_FAILED
    return 0


def cmd_simulate(args) -> int:
    cfg = config.load_config(args.config)
    sim_cfg = config.simulator_from(cfg, seed=args.seed)
    cal = config.calibration_from(cfg)
    sim = pipeline.simulate_experiment(sim_cfg, cal)
    outdir = args.out or Path("simulate_out")
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "shots.csv"
    pipeline.write_shots_csv(sim.table, csv_path)
    if args.seed is not None:
        cfg = dict(cfg)
        cfg["seed"] = str(args.seed)
    config.write_resolved(cfg, outdir)
    print(
        serialize.dumps(
            {
                "path": str(csv_path),
                "n_shots": len(sim.table),
                "seed": sim_cfg.seed,
                "pmt_source": sim_cfg.pmt_source,
            }
        )
    )
    return 0


def cmd_analyze(args) -> int:
    cfg = config.load_config(args.config)
    cal = config.calibration_from(cfg)
    table = pipeline.ingest_shots(args.input)
    reports = pipeline.analyze_table(
        table,
        cal,
        n_blocks=config.get_int(cfg, "n_blocks"),
        band_fraction=config.get_float(cfg, "band_fraction"),
        postselect=not args.no_postselect and config.get_bool(cfg, "postselect"),
        bins=config.get_int(cfg, "hist_bins"),
    )
    payload = {name: rep.to_json_dict() for name, rep in reports.items()}
    payload["n_malformed"] = table.n_malformed
    _emit(payload, args.out, "reports.json")
    if args.out is not None:
        for name, rep in reports.items():
            serialize.dump(rep.to_json_dict(), args.out / f"report_{name}.json")
        config.write_resolved(cfg, args.out)
    return 0


def cmd_selfcheck(args) -> int:
    n_points = 200 if args.full else 40
    n_seeds = 30 if args.full else 8
    log(f"oracle sweep: {n_points} points (seed {args.seed})")
    sweep = selfcheck.oracle_sweep(n_points=n_points, seed=args.seed)
    sweep_ok = sweep.ok(args.tol)
    log(
        f"  max relative error {sweep.max_rel_err:.3e} "
        f"(tol {args.tol:g}) in {sweep.runtime_s:.1f}s "
        f"-> {'PASS' if sweep_ok else 'FAIL'}"
    )
    log(f"estimator calibration: {n_seeds} seeds per distribution")
    calib = selfcheck.estimator_calibration(n_seeds=n_seeds)
    min_cover = int(np.ceil(n_seeds * 28 / 30))
    calib_ok = True
    for res in calib:
        ok = res.covered >= min_cover
        calib_ok &= ok
        log(
            f"  {res.label}: target {res.target:g}, covered {res.covered}/{res.n_seeds}"
            f" -> {'PASS' if ok else 'FAIL'}"
        )
    payload = {
        "oracle_sweep": {
            "n_points": n_points,
            "max_rel_err": sweep.max_rel_err,
            "max_leakage": sweep.max_leakage,
            "runtime_s": sweep.runtime_s,
            "ok": sweep_ok,
        },
        "estimator_calibration": [
            {
                "label": res.label,
                "target": res.target,
                "covered": res.covered,
                "n_seeds": res.n_seeds,
                "ok": res.covered >= min_cover,
            }
            for res in calib
        ],
        "ok": bool(sweep_ok and calib_ok),
    }
    _emit(payload, args.out, "selfcheck.json")
    return 0 if payload["ok"] else CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "model": cmd_model,
        "scan": cmd_scan,
        "simulate": cmd_simulate,
        "analyze": cmd_analyze,
        "selfcheck": cmd_selfcheck,
    }
    try:
        return handlers[args.command](args)
    except (config.ConfigError, pipeline.PipelineError, FileNotFoundError) as exc:
        log(f"error: {exc}")
        return USAGE_ERROR
    except ValueError as exc:
        log(f"error: {exc}")
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
