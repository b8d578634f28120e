"""Command-line front end.

Subcommands: simulate (one traced episode), evaluate (empirical reward
distribution), train-surrogate, sq (quality score from summaries, files, or a
surrogate), experiment (bundled or custom experiment -> CSV/JSON + manifest).

Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .harness import ConfigError, load_config, run_experiment, write_outputs
from .mdp import TaskParams
from .metrics import GaussianSummary, RewardRange, outcome_assessment, solver_quality
from .roadnet import NetworkError, load_network
from .rollout import reward_distribution, simulate_episode
from .solvers import SolverSpec
from . import surrogate as sg

DEFAULT_SOLVER = '{"kind": "mcts", "depth": 9, "exploration": 1000.0, "iterations": 100, "label": "mcts-d9"}'


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--out-dir", default="results", help="output directory (default: results)")
    p.add_argument("--episodes", type=int, default=None, help="episode count override")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="rows file format")


def _task_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", default="small13", help="bundled name or JSON path")
    p.add_argument("--p-trans", type=float, default=0.7)
    p.add_argument("--discount", type=float, default=0.95)
    p.add_argument("--rwd-exit", type=float, default=2000.0)
    p.add_argument("--rwd-caught", type=float, default=-2000.0)
    p.add_argument("--rwd-sense", type=float, default=-200.0)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--solver", default=DEFAULT_SOLVER, help="solver spec as JSON")


def _parse_params(args) -> TaskParams:
    return TaskParams(
        p_trans=args.p_trans,
        discount=args.discount,
        rwd_exit=args.rwd_exit,
        rwd_caught=args.rwd_caught,
        rwd_sense=args.rwd_sense,
        max_steps=args.max_steps,
    )


def _parse_solver(text: str) -> SolverSpec:
    return SolverSpec.from_dict(json.loads(text))


def _parse_grid(specs: list[str]) -> tuple[list[str], list[list[float]]]:
    """Grid flags: name=lo:hi:count (inclusive linspace) or name=v1,v2,..."""
    schema, value_lists = [], []
    for spec in specs:
        name, _, rhs = spec.partition("=")
        if not rhs:
            raise ConfigError(f"bad grid spec {spec!r} (want name=lo:hi:count or name=v1,v2,...)")
        if ":" in rhs:
            lo_s, hi_s, count_s = rhs.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
            if count < 2:
                raise ConfigError("grid needs at least 2 points")
            values = [lo + (hi - lo) * i / (count - 1) for i in range(count)]
        else:
            values = [float(v) for v in rhs.split(",")]
        schema.append(name)
        value_lists.append(values)
    return schema, value_lists


def _cmd_simulate(args) -> int:
    net = load_network(args.network)
    params = _parse_params(args)
    spec = _parse_solver(args.solver)
    result, trace = simulate_episode(net, params, spec, args.seed if args.seed is not None else 0)
    for rec in trace:
        act = "stay" if rec.action.is_stay else f"move->{net.adjacency[rec.state.ugv][rec.action.neighbor]}"
        print(
            f"step {rec.step:3d}  ugv={rec.state.ugv:3d} pursuer={rec.state.pursuer:3d}  "
            f"{act:10s} r={rec.reward:+.1f}  -> ugv={rec.next_state.ugv} "
            f"pursuer={rec.next_state.pursuer} [{rec.next_state.status.name.lower()}]"
        )
    print(f"outcome={result.outcome.name.lower()} steps={result.steps} return={result.ret:.6g}")
    return 0


def _cmd_evaluate(args) -> int:
    net = load_network(args.network)
    params = _parse_params(args)
    spec = _parse_solver(args.solver)
    dist = reward_distribution(
        net, params, spec,
        n_episodes=args.episodes if args.episodes is not None else 100,
        master_seed=args.seed if args.seed is not None else 0,
        workers=args.workers,
    )
    out = dist.to_dict(include_samples=args.samples)
    if args.r_star is not None:
        out["outcome_assessment"] = outcome_assessment(dist.samples, args.r_star)
    text = json.dumps(out, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_train_surrogate(args) -> int:
    net = load_network(args.network)
    params = _parse_params(args)
    trusted = _parse_solver(args.solver)
    schema, value_lists = _parse_grid(args.grid)
    grid = sg.feature_grid(schema, value_lists)
    dataset = sg.build_training_set(
        net, params, trusted, grid,
        n_episodes=args.episodes if args.episodes is not None else 100,
        master_seed=args.seed if args.seed is not None else 0,
        workers=args.workers,
    )
    model = sg.fit(
        dataset,
        sg.FitConfig(kind=args.regressor, epochs=args.epochs, k=args.k,
                     seed=args.seed if args.seed is not None else 0),
    )
    sg.save(model, args.out)
    print(json.dumps({"model": args.out, **model.training_info}, indent=1))
    return 0


def _summary_from_args(args, side: str) -> GaussianSummary:
    mean = getattr(args, f"{side}_mean")
    std = getattr(args, f"{side}_std")
    file_ = getattr(args, f"{side}_file")
    if file_ is not None:
        obj = json.loads(Path(file_).read_text())
        return GaussianSummary(float(obj["mean"]), float(obj["std"]))
    if mean is None or std is None:
        raise ConfigError(f"need --{side.replace('_', '-')}-mean/-std or --{side.replace('_', '-')}-file")
    return GaussianSummary(mean, std)


def _cmd_sq(args) -> int:
    if args.model is not None:
        model = sg.load(args.model)
        assignments = dict(
            (name, float(val)) for name, _, val in (f.partition("=") for f in args.features.split(","))
        )
        feats = sg.make_features(list(model.schema), [assignments[n] for n in model.schema])
        trusted = sg.predict(model, feats)
        if args.range is None and args.r_low is None and model.reward_range is not None:
            rng = model.reward_range
        else:
            rng = _range_from_args(args)
    else:
        trusted = _summary_from_args(args, "trusted")
        rng = _range_from_args(args)
    candidate = _summary_from_args(args, "cand")
    result = solver_quality(trusted, candidate, rng, alpha=args.alpha)
    print(json.dumps(result.to_dict(), indent=1))
    return 0


def _range_from_args(args) -> RewardRange:
    if args.range is not None:
        return RewardRange(0.0, args.range)
    if args.r_low is not None and args.r_high is not None:
        return RewardRange(args.r_low, args.r_high)
    raise ConfigError("need --range WIDTH or --r-low/--r-high")


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.episodes is not None:
        overrides["n_episodes"] = args.episodes
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)
    result = run_experiment(config, workers=args.workers)
    paths = write_outputs(result, args.out_dir, args.format)
    print(f"wrote {paths['rows']} ({len(result.rows)} rows) and {paths['manifest']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solverq", description=__doc__)
    parser.add_argument("--version", action="version", version=f"solverq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one episode and print its trace")
    _task_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="empirical reward distribution for a solver")
    _task_flags(p)
    _common_flags(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--samples", action="store_true", help="include raw samples in the JSON")
    p.add_argument("--r-star", type=float, default=None, help="also report the outcome assessment")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("train-surrogate", help="train and save a surrogate model")
    _task_flags(p)
    _common_flags(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--grid", action="append", required=True,
                   help="feature grid, e.g. p_trans=0:1:11 (repeatable)")
    p.add_argument("--regressor", choices=("mlp", "knearest"), default="mlp")
    p.add_argument("--epochs", type=int, default=3000)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train_surrogate)

    p = sub.add_parser("sq", help="solver-quality score from summaries or a surrogate")
    p.add_argument("--trusted-mean", type=float, default=None)
    p.add_argument("--trusted-std", type=float, default=None)
    p.add_argument("--trusted-file", default=None, help="reward-distribution JSON")
    p.add_argument("--cand-mean", type=float, default=None)
    p.add_argument("--cand-std", type=float, default=None)
    p.add_argument("--cand-file", default=None, help="reward-distribution JSON")
    p.add_argument("--model", default=None, help="surrogate model for the trusted side")
    p.add_argument("--features", default="", help="feature assignments, e.g. p_trans=0.7")
    p.add_argument("--range", type=float, default=None, help="global reward range width")
    p.add_argument("--r-low", type=float, default=None)
    p.add_argument("--r-high", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_sq)

    p = sub.add_parser("experiment", help="run a bundled (exp1..exp4, toy, <id>-full) or custom experiment")
    p.add_argument("config", help="bundled id or config JSON path")
    _common_flags(p)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NetworkError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
