"""Experiment runner and result tabulation.

An experiment sweeps named features over a grid, evaluates every candidate
solver at every sweep point, scores each against the trusted solver, and
emits one row per (sweep point, candidate) plus a run manifest.

Trusted-side reward summaries come either from direct simulation (exp1/exp2,
one batch per distinct task) or from a surrogate model (exp3/exp4, trained on
a feature grid or loaded from a model file). Sweep features that name task
parameters apply to every evaluation; features that name solver parameters
apply to candidates (and to the trusted solver during surrogate training),
never to direct trusted batches.

The reward range scaling the quality score is the surrogate's training range
when a surrogate is used; otherwise it spans all means evaluated in the run
(trusted and candidates), since a sweep over a solver parameter visits only
one task and would make a trusted-only range degenerate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from . import __version__
from .mdp import TaskParams
from .metrics import GaussianSummary, RewardRange, SqResult, reward_range, solver_quality
from .roadnet import RoadNet, load_network, network_hash
from .rollout import OUTCOMES, derive_seed, reward_distribution
from .solvers import SolverSpec
from . import surrogate as sg

EXPERIMENT_IDS = ("exp1", "exp2", "exp3", "exp4", "toy", "custom")
BUNDLED_CONFIGS = ("exp1", "exp2", "exp3", "exp4", "toy")

CSV_FIXED_COLUMNS = (
    "label", "mean", "std", "n", "exited", "caught", "truncated", "hellinger_sq", "q", "xq",
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class TrainSpec:
    """How to train the surrogate inside an experiment run. ``grid`` of
    (feature, values) pairs; defaults to the experiment sweep grid."""

    grid: tuple[tuple[str, tuple[float, ...]], ...] | None = None
    n_episodes: int | None = None
    kind: str = "mlp"
    epochs: int = 3000
    k: int = 1


@dataclass(frozen=True)
class SurrogateSource:
    path: str | None = None
    train: TrainSpec | None = None

    def __post_init__(self) -> None:
        if (self.path is None) == (self.train is None):
            raise ConfigError("surrogate source needs exactly one of 'path' or 'train'")


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    network: str | None = None
    params: TaskParams | None = None
    trusted: SolverSpec | None = None
    candidates: tuple[SolverSpec, ...] = ()
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    n_episodes: int = 100
    master_seed: int = 0
    surrogate: SurrogateSource | None = None


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    sweep_names: tuple[str, ...]
    sweep_values: tuple[float, ...]
    label: str
    mean: float
    std: float
    n: int
    outcomes: dict[str, int] = field(compare=False)
    sq: SqResult = field(compare=False)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    rows: tuple[ResultRow, ...]
    manifest: dict


# --- config (de)serialization -------------------------------------------------


def _sweep_from_obj(obj: Iterable) -> tuple[tuple[str, tuple[float, ...]], ...]:
    out = []
    for entry in obj:
        if isinstance(entry, dict):
            name, values = entry["feature"], entry["values"]
        else:
            name, values = entry
        out.append((str(name), tuple(float(v) for v in values)))
    return tuple(out)


def config_from_dict(obj: dict) -> ExperimentConfig:
    try:
        exp_id = str(obj.get("id", "custom"))
        if exp_id not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment id {exp_id!r}")
        if exp_id == "toy":
            x_values = tuple(float(v) for v in obj.get("x_values", [i / 20 for i in range(21)]))
            widths = tuple(float(v) for v in obj.get("range_widths", [5.0, 0.05]))
            return ExperimentConfig(
                id="toy",
                sweep=(("x", x_values), ("range_width", widths)),
                master_seed=int(obj.get("master_seed", 0)),
            )
        params = TaskParams(**obj["params"])
        trusted = SolverSpec.from_dict(obj["trusted"])
        candidates = tuple(SolverSpec.from_dict(c) for c in obj["candidates"])
        surrogate = None
        if obj.get("surrogate") is not None:
            s = obj["surrogate"]
            train = None
            if s.get("train") is not None:
                t = s["train"]
                train = TrainSpec(
                    grid=_sweep_from_obj(t["grid"]) if t.get("grid") else None,
                    n_episodes=int(t["n_episodes"]) if t.get("n_episodes") else None,
                    kind=str(t.get("kind", "mlp")),
                    epochs=int(t.get("epochs", 3000)),
                    k=int(t.get("k", 1)),
                )
            surrogate = SurrogateSource(path=s.get("path"), train=train)
        return ExperimentConfig(
            id=exp_id,
            network=str(obj["network"]),
            params=params,
            trusted=trusted,
            candidates=candidates,
            sweep=_sweep_from_obj(obj.get("sweep", [])),
            n_episodes=int(obj.get("n_episodes", 100)),
            master_seed=int(obj.get("master_seed", 0)),
            surrogate=surrogate,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    if config.id == "toy":
        return {
            "id": "toy",
            "x_values": list(config.sweep[0][1]),
            "range_widths": list(config.sweep[1][1]),
            "master_seed": config.master_seed,
        }
    assert config.params is not None and config.trusted is not None
    out = {
        "id": config.id,
        "network": config.network,
        "params": {
            "p_trans": config.params.p_trans,
            "discount": config.params.discount,
            "rwd_exit": config.params.rwd_exit,
            "rwd_caught": config.params.rwd_caught,
            "rwd_sense": config.params.rwd_sense,
            "max_steps": config.params.max_steps,
        },
        "trusted": config.trusted.to_dict(),
        "candidates": [c.to_dict() for c in config.candidates],
        "sweep": [{"feature": name, "values": list(values)} for name, values in config.sweep],
        "n_episodes": config.n_episodes,
        "master_seed": config.master_seed,
        "surrogate": None,
    }
    if config.surrogate is not None:
        s: dict = {}
        if config.surrogate.path is not None:
            s["path"] = config.surrogate.path
        if config.surrogate.train is not None:
            t = config.surrogate.train
            s["train"] = {
                "grid": [{"feature": n, "values": list(v)} for n, v in t.grid] if t.grid else None,
                "n_episodes": t.n_episodes,
                "kind": t.kind,
                "epochs": t.epochs,
                "k": t.k,
            }
        out["surrogate"] = s
    return out


def load_config(source: str | Path) -> ExperimentConfig:
    """Load a bundled config by id ("exp1".."exp4", "toy", or "<id>-full") or
    a config JSON file by path."""
    name = str(source)
    base, full = (name[:-5], True) if name.endswith("-full") else (name, False)
    if base in BUNDLED_CONFIGS:
        fname = f"{base}_full.json" if full else f"{base}.json"
        text = resources.files("solverq").joinpath(f"data/configs/{fname}").read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config not found: {name!r} (not a bundled id or a file)")
        text = path.read_text()
    try:
        return config_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config JSON: {exc}") from exc


# --- experiment core -----------------------------------------------------------


def _sweep_points(sweep) -> list[sg.TaskFeatures]:
    schema = [name for name, _ in sweep]
    return sg.feature_grid(schema, [values for _, values in sweep])


def _validate(config: ExperimentConfig) -> None:
    if config.id == "toy":
        return
    if config.network is None or config.params is None or config.trusted is None:
        raise ConfigError("experiment needs network, params and trusted solver")
    if not config.candidates:
        raise ConfigError("experiment requires at least one candidate solver")
    labels = [c.label for c in config.candidates]
    if len(set(labels)) != len(labels) or config.trusted.label in labels:
        raise ConfigError("solver labels must be unique (trusted included)")
    if config.n_episodes < 2:
        raise ConfigError("n_episodes must be >= 2")
    for name, values in config.sweep:
        if name not in sg.TASK_FEATURES and name not in sg.SOLVER_FEATURES:
            raise ConfigError(f"sweep feature {name!r} is not resolvable")
        if not values:
            raise ConfigError(f"sweep feature {name!r} has no values")
    if config.id in ("exp3", "exp4") and config.surrogate is None:
        raise ConfigError(f"{config.id} requires a surrogate (model path or training grid)")


def _prepare_surrogate(
    config: ExperimentConfig, net: RoadNet, workers: int | None
) -> tuple[sg.SurrogateModel, dict]:
    src = config.surrogate
    assert src is not None and config.params is not None and config.trusted is not None
    if src.path is not None:
        model = sg.load(src.path)
        info = {"source": "file", "path": src.path}
    else:
        train = src.train
        assert train is not None
        grid_spec = train.grid if train.grid is not None else config.sweep
        if not grid_spec:
            raise ConfigError("surrogate training needs a grid or a nonempty sweep")
        grid = _sweep_points(grid_spec)
        dataset = sg.build_training_set(
            net, config.params, config.trusted, grid,
            train.n_episodes or config.n_episodes, config.master_seed, workers=workers,
        )
        model = sg.fit(dataset, sg.FitConfig(kind=train.kind, epochs=train.epochs,
                                             k=train.k, seed=config.master_seed))
        info = {"source": "trained", **model.training_info}
    sweep_schema = tuple(name for name, _ in config.sweep)
    if model.schema != sweep_schema:
        raise ConfigError(
            f"surrogate schema {model.schema} does not match sweep features {sweep_schema}"
        )
    if model.reward_range is None:
        raise ConfigError("surrogate model carries no reward range")
    return model, info


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Run one experiment and return the sorted rows plus the run manifest."""
    _validate(config)
    if config.id == "toy":
        return _run_toy(config)
    assert config.params is not None and config.trusted is not None
    net = load_network(config.network)  # type: ignore[arg-type]
    points = _sweep_points(config.sweep)

    model = None
    surrogate_info = None
    if config.surrogate is not None:
        model, surrogate_info = _prepare_surrogate(config, net, workers)

    # Trusted summary per sweep point: surrogate prediction, or one direct
    # batch per distinct task variant (solver features never touch it).
    trusted_summaries: list[GaussianSummary] = []
    trusted_cache: dict[tuple, GaussianSummary] = {}
    for feats in points:
        if model is not None:
            trusted_summaries.append(sg.predict(model, feats))
            continue
        task_items = tuple(
            (n, v) for n, v in zip(feats.schema, feats.values) if n in sg.TASK_FEATURES
        )
        summary = trusted_cache.get(task_items)
        if summary is None:
            task_params, _ = sg.apply_features(
                config.params, None, sg.make_features([n for n, _ in task_items], [v for _, v in task_items])
            )
            dist = reward_distribution(
                net, task_params, config.trusted, config.n_episodes,
                derive_seed(config.master_seed, "trusted", config.trusted.label, *map(repr, task_items)),
                workers=workers,
            )
            summary = dist.summary()
            trusted_cache[task_items] = summary
        trusted_summaries.append(summary)

    evaluations = []
    for pi, feats in enumerate(points):
        for cand in config.candidates:
            params, spec = sg.apply_features(config.params, cand, feats)
            assert spec is not None
            seed = derive_seed(config.master_seed, "cand", cand.label, *feats.schema, *feats.values)
            dist = reward_distribution(net, params, spec, config.n_episodes, seed, workers=workers)
            evaluations.append((pi, feats, cand, dist))

    if model is not None:
        rng = model.reward_range
        assert rng is not None
    else:
        rng = reward_range(
            [s.mean for s in trusted_cache.values()] + [d.mean for _, _, _, d in evaluations]
        )

    rows = []
    for pi, feats, cand, dist in evaluations:
        sq = solver_quality(trusted_summaries[pi], dist.summary(), rng)
        rows.append(
            ResultRow(
                config.id, feats.schema, feats.values, cand.label,
                dist.mean, dist.std, dist.n, dist.outcome_counts, sq,
            )
        )
    rows.sort(key=lambda r: (r.sweep_values, r.label))

    manifest = {
        "experiment": config.id,
        "code_version": __version__,
        "config": config_to_dict(config),
        "network_hash": network_hash(net),
        "reward_range": [rng.r_low, rng.r_high],
        "surrogate": surrogate_info,
        "trusted": [
            {
                "point": dict(zip(f.schema, f.values)),
                "mean": s.mean,
                "std": s.std,
                "source": "surrogate" if model is not None else "direct",
            }
            for f, s in zip(points, trusted_summaries)
        ],
        "n_rows": len(rows),
    }
    return ExperimentResult(config, tuple(rows), manifest)


# Analytic performance curves for the toy run: a trusted solver that degrades
# as the task parameter x grows and a noisier candidate that improves, crossing
# at x = 0.5. Scored once per global range width.
def _toy_trusted(x: float) -> GaussianSummary:
    return GaussianSummary(2.0 - 1.2 * x, 0.15)


def _toy_candidate(x: float) -> GaussianSummary:
    return GaussianSummary(0.8 + 1.2 * x, 0.35)


def _run_toy(config: ExperimentConfig) -> ExperimentResult:
    rows = []
    trusted_entries = []
    (_, x_values), (_, widths) = config.sweep
    for x in x_values:
        t = _toy_trusted(x)
        c = _toy_candidate(x)
        trusted_entries.append({"point": {"x": x}, "mean": t.mean, "std": t.std, "source": "analytic"})
        for w in widths:
            sq = solver_quality(t, c, RewardRange(0.0, w))
            rows.append(
                ResultRow(
                    "toy", ("x", "range_width"), (x, w), "cand",
                    c.mean, c.std, 0, {name: 0 for name in OUTCOMES}, sq,
                )
            )
    rows.sort(key=lambda r: (r.sweep_values, r.label))
    manifest = {
        "experiment": "toy",
        "code_version": __version__,
        "config": config_to_dict(config),
        "network_hash": None,
        "reward_range": None,
        "surrogate": None,
        "trusted": trusted_entries,
        "n_rows": len(rows),
    }
    return ExperimentResult(config, tuple(rows), manifest)


# --- output ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to serialize")
    sweep_names = rows[0].sweep_names
    header = ("experiment", *sweep_names, *CSV_FIXED_COLUMNS)
    lines = [",".join(header)]
    for r in rows:
        if r.sweep_names != sweep_names:
            raise ValueError("inconsistent sweep columns across rows")
        cells = [
            r.experiment,
            *(_fmt(v) for v in r.sweep_values),
            r.label,
            _fmt(r.mean),
            _fmt(r.std),
            str(r.n),
            *(str(r.outcomes[name]) for name in OUTCOMES),
            _fmt(r.sq.hellinger_sq),
            _fmt(r.sq.q),
            _fmt(r.sq.xq),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def row_to_dict(r: ResultRow) -> dict:
    return {
        "experiment": r.experiment,
        **dict(zip(r.sweep_names, r.sweep_values)),
        "label": r.label,
        "mean": r.mean,
        "std": r.std,
        "n": r.n,
        **{name: r.outcomes[name] for name in OUTCOMES},
        "hellinger_sq": r.sq.hellinger_sq,
        "q": r.sq.q,
        "xq": r.sq.xq,
    }


def write_outputs(result: ExperimentResult, out_dir: str | Path, fmt: str = "csv") -> dict[str, Path]:
    """Write the rows file plus run.json manifest; returns the paths."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        rows_path = out / f"{result.config.id}.csv"
        rows_path.write_text(rows_to_csv(result.rows))
    else:
        rows_path = out / f"{result.config.id}.json"
        rows_path.write_text(json.dumps([row_to_dict(r) for r in result.rows], indent=1) + "\n")
    manifest = dict(result.manifest)
    manifest["rows_file"] = rows_path.name
    manifest_path = out / "run.json"
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
    return {"rows": rows_path, "manifest": manifest_path}


def recompute_xq(q: float) -> float:
    """Squash a quality value; lets any row's xq be audited from its q."""
    return 2.0 / (1.0 + math.exp(-q / 5.0))
