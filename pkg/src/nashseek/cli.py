"""Command line front end: scenario runner, preflight checks, solvers.

Subcommands:

    run            integrate a scenario config, write trajectory.csv and
                   summary.json (optionally seed-shifted replicates)
    paper-example  run the built-in six-player worked example and its
                   unsaturated comparison, printing pass/fail verdicts
    solve-ne       print the equilibrium from both solvers and their gap
    check          preflight a config: named pass/fail assumption checks

Exit codes: 0 success, 2 config error, 3 violated method hypothesis,
4 numerical fault. Convergence status is data in summary.json, never an
exit code.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .dynamics import max_control_bound
from .errors import (
    ConfigError,
    ConnectivityError,
    ConvergenceError,
    GainIntegrityError,
    IllConditionedGameError,
    IntegrationError,
    ModeOrderError,
    MonotonicityError,
    SingularTransformError,
    SymmetryError,
)
from .game import (
    QuadraticGame,
    check_game,
    ring_game,
    solve_nash_closed_form,
    solve_nash_gradient_play,
)
from .graph import Digraph, cycle_digraph, is_strongly_connected, pinning_diagnostic
from .scenario import (
    ScenarioConfig,
    _game_size,
    build,
    load_config,
    parse_config,
    reference_scenario,
)
from .sim import Summary, Trajectory, run

__all__ = ["main"]

_SATURATION_CAP = 13.0 / 27.0  # worked-example certified bound, order 3, theta 1/3


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None


def _game_from_block(block: dict) -> QuadraticGame:
    if "type" in block:
        return ring_game(block["n"])
    return QuadraticGame(
        jacobian=np.asarray(block["jacobian"], dtype=float),
        offset=np.asarray(block["offset"], dtype=float),
    )


def _graph_from_block(block: dict) -> Digraph:
    if "type" in block:
        return cycle_digraph(block["n"])
    return Digraph(weights=np.asarray(block["weights"], dtype=float))


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    """Columns: t, y_1..y_N, u_1..u_N, err, tilde_norm, z_residual, xbar_tail_max."""
    n = traj.y.shape[1]
    header = (
        ["t"]
        + [f"y_{i}" for i in range(1, n + 1)]
        + [f"u_{i}" for i in range(1, n + 1)]
        + ["err", "tilde_norm", "z_residual", "xbar_tail_max"]
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(traj.times.size):
            row = (
                [traj.times[k]]
                + list(traj.y[k])
                + list(traj.u[k])
                + [traj.err[k], traj.tilde_norm[k], traj.z_residual[k], traj.xbar_tail_max[k]]
            )
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_summary_json(path: Path, summary: Summary, cfg: ScenarioConfig) -> None:
    payload = {
        "converged": summary.converged,
        "t_converge": summary.t_converge,
        "final_err": summary.final_err,
        "max_abs_u": [float(v) for v in summary.max_abs_u],
        "certified_bounds": [float(v) for v in summary.certified_bounds],
        "bound_violated": summary.bound_violated,
        "c_final_range": list(summary.c_final_range),
        "c_monotone": summary.c_monotone,
        "unsaturated_entry_time": summary.unsaturated_entry_time,
        "c_trailing_drift": summary.c_trailing_drift,
        "resolved_config": cfg.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _execute(cfg: ScenarioConfig, out_dir: Path, prefix: str = "") -> tuple[Trajectory, Summary]:
    built = build(cfg)
    traj, summary = run(
        built.game,
        built.graph,
        built.specs,
        built.mode,
        x0=built.x0,
        z0=built.z0,
        c0=built.c0,
        config=built.sim,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / f"{prefix}trajectory.csv", traj)
    write_summary_json(out_dir / f"{prefix}summary.json", summary, cfg)
    return traj, summary


def _verdict_line(summary: Summary) -> str:
    t_conv = "-" if summary.t_converge is None else f"{summary.t_converge:.6g}"
    return (
        f"converged={summary.converged} t_converge={t_conv} "
        f"final_err={summary.final_err:.6g} max_abs_u={max(summary.max_abs_u):.6g} "
        f"bound_violated={summary.bound_violated} c_monotone={summary.c_monotone}"
    )


def _replicate_worker(task: tuple[dict, str]) -> str:
    raw, out_dir = task
    cfg = parse_config(raw)
    _, summary = _execute(cfg, Path(out_dir))
    return _verdict_line(summary)


def cmd_run(args) -> int:
    raw = _read_json(args.config)
    if args.allow_large_theta:
        raw = {**raw, "allow_large_theta": True}
    out = Path(args.out)
    if args.replicates < 1:
        raise ConfigError(f"--replicates must be >= 1, got {args.replicates}")
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    if args.replicates == 1:
        cfg = parse_config(raw)
        _, summary = _execute(cfg, out)
        print(_verdict_line(summary))
        print(f"wrote {out / 'trajectory.csv'} and {out / 'summary.json'}")
        return 0
    base_seed = raw.get("seed")
    if base_seed is None:
        base_seed = 0
    tasks = [
        ({**raw, "seed": base_seed + r}, str(out / f"replicate_{r:02d}"))
        for r in range(args.replicates)
    ]
    if args.jobs == 1:
        results = [_replicate_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_replicate_worker, tasks))
    for r, line in enumerate(results):
        print(f"replicate {r:02d} (seed {base_seed + r}): {line}")
    print(f"wrote {args.replicates} replicate directories under {out}")
    return 0


def cmd_paper_example(args) -> int:
    out = Path(args.out)
    cfg = reference_scenario()
    traj, summary = _execute(cfg, out)
    ucfg = reference_scenario(mode="Unsaturated")
    _, usummary = _execute(ucfg, out, prefix="unsaturated_")

    cap = _SATURATION_CAP
    peak = float(max(summary.max_abs_u))
    upeak = float(max(usummary.max_abs_u))
    entry = summary.unsaturated_entry_time
    checks = [
        (
            "convergence",
            summary.converged,
            f"final error {summary.final_err:.3e} vs tolerance 1e-02 over the last "
            f"{cfg.sim['conv_window']:g} s",
        ),
        (
            "actuator-bound",
            peak <= cap + 1e-9,
            f"max |u| {peak:.6f} vs certified 13/27 = {cap:.6f}",
        ),
        (
            "tail-entry",
            entry is not None,
            "all saturations inactive from t = "
            + (f"{entry:.6g} s onward" if entry is not None else "never (still active at end)"),
        ),
        (
            "estimator-residual",
            traj.z_residual[-1] < 0.1,
            f"final max |z_ij + eta_j| = {traj.z_residual[-1]:.3e} vs 0.1",
        ),
        (
            "output-link",
            traj.tilde_norm[-1] < 0.1,
            f"final linked-state norm {traj.tilde_norm[-1]:.3e} vs 0.1",
        ),
        (
            "gain-settling",
            summary.c_trailing_drift < 1e-3,
            f"adaptive-gain drift {summary.c_trailing_drift:.3e} over the last 10% vs 1e-03",
        ),
        (
            "unsaturated-contrast",
            usummary.converged and upeak > cap,
            f"comparison converged={usummary.converged}, its max |u| {upeak:.6f} vs 13/27",
        ),
    ]
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    print(
        f"wrote trajectory.csv, summary.json, unsaturated_trajectory.csv, "
        f"unsaturated_summary.json under {out}"
    )
    return 0


def cmd_solve_ne(args) -> int:
    data = _read_json(args.config)
    if not isinstance(data, dict) or "game" not in data or not isinstance(data["game"], dict):
        raise ConfigError("config needs a game block")
    _game_size(data["game"])
    game = _game_from_block(data["game"])
    y_closed = solve_nash_closed_form(game)
    y_play = solve_nash_gradient_play(game)
    deviation = float(np.abs(y_closed - y_play).max())
    fmt = lambda y: "[" + ", ".join(f"{v:.10g}" for v in y) + "]"
    print(f"closed-form  : {fmt(y_closed)}")
    print(f"gradient-play: {fmt(y_play)}")
    print(f"max deviation: {deviation:.3e}")
    return 0


def cmd_check(args) -> int:
    cfg = load_config(args.config, construct=False)
    game = _game_from_block(cfg.game)
    graph = _graph_from_block(cfg.graph)
    cert = check_game(game)

    checks: list[tuple[str, bool, str]] = []
    checks.append(
        (
            "monotonicity",
            cert.strongly_monotone,
            f"pseudo-gradient modulus omega = {cert.monotonicity:.6g} (need > 0)",
        )
    )
    lip = ", ".join(f"{v:.6g}" for v in cert.lipschitz)
    checks.append(
        ("lipschitz", bool(np.isfinite(cert.lipschitz).all()), f"row bounds l_i = [{lip}]")
    )
    for i, p in enumerate(cfg.players, start=1):
        in_range = 0.0 < p["theta"] < 0.5
        note = "" if in_range else (" [override]" if cfg.allow_large_theta else "")
        checks.append(
            (
                f"theta-range player {i}",
                in_range or cfg.allow_large_theta,
                f"theta = {p['theta']:.6g}, design range (0, 0.5){note}",
            )
        )
        bound = max_control_bound(p["order"], p["theta"], p["delta"])
        checks.append(
            (
                f"actuator-bound player {i}",
                bound <= p["u_limit"] + 1e-12,
                f"certified sum theta^k * delta = {bound:.6g} vs limit {p['u_limit']:.6g}",
            )
        )
    connected = is_strongly_connected(graph)
    checks.append(
        (
            "strong-connectivity",
            connected,
            "directed path between every ordered node pair"
            if connected
            else "some ordered node pair has no directed path",
        )
    )
    diag = pinning_diagnostic(graph)
    checks.append(
        (
            "pinned-laplacian",
            diag.nonsingular and diag.min_real_eig > 0,
            f"min real eigenvalue {diag.min_real_eig:.6g}, condition {diag.condition:.3e}",
        )
    )

    all_ok = True
    for name, ok, detail in checks:
        all_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return 0 if all_ok else 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nashseek",
        description="Distributed Nash-equilibrium seeking for saturated integrator-chain players.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario config and serialize the results")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers for replicates")
    p_run.add_argument(
        "--replicates",
        type=int,
        default=1,
        help="number of seed-shifted repetitions of the scenario",
    )
    p_run.add_argument(
        "--allow-large-theta",
        action="store_true",
        help="permit theta >= 0.5 (outside the certified design range)",
    )
    p_run.set_defaults(func=cmd_run)

    p_ex = sub.add_parser(
        "paper-example",
        help="run the built-in six-player worked example plus its unsaturated comparison",
    )
    p_ex.add_argument("--out", default="out", help="output directory (default: out)")
    p_ex.set_defaults(func=cmd_paper_example)

    p_ne = sub.add_parser("solve-ne", help="solve the config's game with both equilibrium solvers")
    p_ne.add_argument("config", help="path to a JSON file with at least a game block")
    p_ne.set_defaults(func=cmd_solve_ne)

    p_chk = sub.add_parser("check", help="preflight the assumptions behind a scenario config")
    p_chk.add_argument("config", help="path to a scenario JSON file")
    p_chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModeOrderError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MonotonicityError, ConnectivityError, SymmetryError, ValueError) as exc:
        print(f"assumption failed: {exc}", file=sys.stderr)
        return 3
    except (
        IntegrationError,
        SingularTransformError,
        IllConditionedGameError,
        ConvergenceError,
        GainIntegrityError,
    ) as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
