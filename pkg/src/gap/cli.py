"""Command-line entry points: ``gap run``, ``gap analyze``, ``gap fit``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import (
    ExperimentConfig,
    emit_results,
    epoch_curve,
    estimate_k_p,
    fit_reciprocal,
    run_experiment,
)
from .hypergraph import IncidenceHypergraph
from .markov import (
    build_transition_matrix,
    column_norm,
    detect_traps,
    k_p_bound,
    l_max,
    save_matrix_csv,
)
from .planner import APOSTERIORI, APRIORI


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gap")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train agents and emit CSV results")
    run.add_argument(
        "--domain",
        required=True,
        choices=["strips", "taxi-simple", "taxi-maze", "toh", "blocks", "binadd"],
    )
    run.add_argument("--pegs", type=int, help="tower pegs (toh)")
    run.add_argument("--disks", type=int, help="tower disks (toh)")
    run.add_argument("--blocks", type=int, help="block count (blocks)")
    run.add_argument("--digits", type=int, help="digit count (binadd)")
    run.add_argument("--error", type=float, default=0.0)
    run.add_argument("--epochs", type=int, default=10)
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--abstraction", action="append", default=[])
    run.add_argument("--model", choices=[APRIORI, APOSTERIORI], default=APOSTERIORI)
    run.add_argument("--explore", choices=["random", "least-chosen"], default="random")
    run.add_argument("--out", required=True)

    analyze = sub.add_parser("analyze", help="Markov certificates for a saved model")
    analyze.add_argument("--model-file", required=True)
    analyze.add_argument("--goal", required=True, help="state id or observation string")
    analyze.add_argument(
        "--probability-model", choices=[APRIORI, APOSTERIORI], default=APOSTERIORI
    )
    analyze.add_argument("--matrix-out", help="also export the matrix as CSV")

    fit = sub.add_parser("fit", help="reciprocal fit of a results CSV")
    fit.add_argument("--csv", required=True)
    return parser


def _domain_params(args: argparse.Namespace) -> dict:
    params: dict = {}
    if args.domain == "toh":
        if args.pegs:
            params["pegs"] = args.pegs
        if args.disks:
            params["disks"] = args.disks
    elif args.domain == "blocks":
        if args.blocks:
            params["n_blocks"] = args.blocks
        else:
            params["n_blocks"] = 3
    elif args.domain == "binadd":
        params["n_digits"] = args.digits or 3
    return params


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        domain=args.domain,
        domain_params=_domain_params(args),
        error_rate=args.error,
        abstractions=tuple(args.abstraction),
        epochs=args.epochs,
        trials=args.trials,
        seed=args.seed,
        probability_model=args.model,
        exploration=args.explore,
        out_dir=args.out,
    )
    saved: dict[int, IncidenceHypergraph] = {}

    def sink(trial: int, model: IncidenceHypergraph) -> None:
        saved[trial] = model  # keep only the last; overwritten each trial

    records = run_experiment(cfg, model_sink=sink)
    os.makedirs(args.out, exist_ok=True)
    curve = epoch_curve(records)
    fit = fit_reciprocal(curve) if len(curve) >= 3 else None
    extras = {}
    if len(curve) >= 3:
        measured, predicted = estimate_k_p(records)
        extras = {"k_p_measured": measured, "k_p_predicted": predicted}
    emit_results(records, fit, args.out, extras)
    with open(os.path.join(args.out, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.to_json(), fh, indent=2, sort_keys=True)
    if saved:
        saved[max(saved)].save(os.path.join(args.out, "model.json"))
    print("wrote %d epoch records to %s" % (len(records), args.out))
    if fit is not None:
        print(
            "fit: A=%.4g B=%.4g R2=%.4f off_linear=%.2f%%"
            % (fit.A, fit.B, fit.r_squared, fit.off_linear_pct)
        )
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    model = IncidenceHypergraph.load(args.model_file)
    goal_arg = args.goal
    if goal_arg.isdigit():
        goal = int(goal_arg)
    else:
        sid = model.registry.id_of(goal_arg)
        if sid is None:
            print("goal observation not present in model", file=sys.stderr)
            return 2
        goal = sid
    tm = build_transition_matrix(model, goal, args.probability_model)
    report = detect_traps(tm)
    lm = l_max(tm)
    print("states: %d  actions: %d" % (model.num_states, model.num_actions))
    print("goal index: %d" % goal)
    print("trap states: %d" % len(report.trap_states))
    if report.trap_states and len(report.trap_states) <= 20:
        print("  " + ", ".join(str(s) for s in sorted(report.trap_states)))
    if lm is None:
        print("l_max: unreachable (every non-goal state is a trap)")
    else:
        print("l_max: %d" % lm)
        print("|T_s|_1: %.6f" % column_norm(tm.t_s))
        for p in (0.5, 0.9, 0.99):
            print("k_p bound at %.2f: %.2f" % (p, k_p_bound(tm, p)))
    if args.matrix_out:
        save_matrix_csv(tm, args.matrix_out)
        print("matrix written to %s" % args.matrix_out)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    epochs: dict[int, list[int]] = {}
    with open(args.csv, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            e_idx = header.index("epoch")
            s_idx = header.index("steps")
        except ValueError:
            print("csv must carry epoch and steps columns", file=sys.stderr)
            return 2
        for line in fh:
            cells = line.strip().split(",")
            if len(cells) <= max(e_idx, s_idx):
                continue
            epochs.setdefault(int(cells[e_idx]), []).append(int(cells[s_idx]))
    curve = [(k, sum(v) / len(v)) for k, v in sorted(epochs.items())]
    fit = fit_reciprocal(curve)
    print(
        "A=%.6g B=%.6g R2=%.6f off_linear=%.3f%% window=%d"
        % (fit.A, fit.B, fit.r_squared, fit.off_linear_pct, fit.window)
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "analyze":
        return _cmd_analyze(args)
    return _cmd_fit(args)


if __name__ == "__main__":
    sys.exit(main())
