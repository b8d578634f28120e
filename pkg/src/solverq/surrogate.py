"""Surrogate model predicting the trusted solver's reward mean and std from
task/solver features, so candidate solvers can be scored on tasks the trusted
solver was never run on.

Two independent single-output regressors are trained (one for the mean, one
for the std): either a small tanh network with three hidden layers fit by
full-batch gradient descent, or a k-nearest-neighbor memorizer that is exact
at training points and serves as the deterministic pipeline oracle.

Model files are JSON::

    {"version": 1, "schema": [...], "feature_scaling": ..., "target_scaling": ...,
     "mean_regressor": {...}, "std_regressor": {...}, ...}

and round-trip bit-identically: load(save(m)) predicts exactly like m.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .mdp import TaskParams
from .metrics import SIGMA_FLOOR, GaussianSummary, RewardRange
from .roadnet import RoadNet
from .rollout import derive_seed, reward_distribution
from .solvers import SolverSpec

MODEL_FORMAT_VERSION = 1

TASK_FEATURES = {
    "p_trans": float,
    "discount": float,
    "rwd_exit": float,
    "rwd_caught": float,
    "rwd_sense": float,
    "max_steps": int,
}
SOLVER_FEATURES = {"d_mcts": ("depth", int), "e_mcts": ("exploration", float), "its_mcts": ("iterations", int)}


class TaskFeatures(NamedTuple):
    values: tuple[float, ...]
    schema: tuple[str, ...]


def make_features(schema: Sequence[str], values: Sequence[float]) -> TaskFeatures:
    if len(schema) != len(values):
        raise ValueError(f"schema/values length mismatch: {len(schema)} vs {len(values)}")
    for name in schema:
        if name not in TASK_FEATURES and name not in SOLVER_FEATURES:
            raise ValueError(f"unknown feature name {name!r}")
    vals = tuple(float(v) for v in values)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"non-finite feature values: {vals}")
    return TaskFeatures(vals, tuple(schema))


def feature_grid(schema: Sequence[str], value_lists: Sequence[Sequence[float]]) -> list[TaskFeatures]:
    """Cross product of per-feature value lists, in schema order."""
    if len(schema) != len(value_lists):
        raise ValueError("one value list per schema entry required")
    return [make_features(schema, combo) for combo in itertools.product(*value_lists)]


def apply_features(
    params: TaskParams, spec: SolverSpec | None, features: TaskFeatures
) -> tuple[TaskParams, SolverSpec | None]:
    """Override task params and (when given) MCTS solver config by feature name."""
    task_over = {}
    solver_over = {}
    for name, value in zip(features.schema, features.values):
        if name in TASK_FEATURES:
            task_over[name] = TASK_FEATURES[name](value)
        elif name in SOLVER_FEATURES:
            field, cast = SOLVER_FEATURES[name]
            solver_over[field] = cast(value)
        else:
            raise ValueError(f"unknown feature name {name!r}")
    if task_over:
        params = replace(params, **task_over)
    if solver_over and spec is not None:
        if spec.kind != "mcts" or spec.mcts is None:
            raise ValueError(f"solver features {sorted(solver_over)} require an mcts solver")
        spec = replace(spec, mcts=replace(spec.mcts, **solver_over))
    return params, spec


class TrainingRow(NamedTuple):
    features: TaskFeatures
    mean: float
    std: float


def build_training_set(
    net: RoadNet,
    params_template: TaskParams,
    trusted: SolverSpec,
    grid: Sequence[TaskFeatures],
    n_episodes: int,
    master_seed: int,
    workers: int | None = None,
) -> list[TrainingRow]:
    """Evaluate the trusted solver at every grid point.

    The per-point seed depends on the feature values, not the grid position,
    so duplicated points yield identical rows.
    """
    if not grid:
        raise ValueError("training grid must be nonempty")
    rows = []
    for feats in grid:
        params, spec = apply_features(params_template, trusted, feats)
        seed = derive_seed(master_seed, "train", *feats.schema, *feats.values)
        dist = reward_distribution(net, params, spec, n_episodes, seed, workers=workers)
        rows.append(TrainingRow(feats, dist.mean, dist.std))
    return rows


# --- regressors -------------------------------------------------------------


@dataclass(frozen=True)
class MlpRegressor:
    """Tanh MLP with three hidden layers, trained by full-batch gradient
    descent with momentum on standardized inputs/targets."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def predict_one(self, z: np.ndarray) -> float:
        h = z
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ w + b)
        return float((h @ self.weights[-1] + self.biases[-1])[0])

    def to_dict(self) -> dict:
        return {
            "kind": "mlp",
            "activation": "tanh",
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @staticmethod
    def from_dict(obj: dict) -> "MlpRegressor":
        return MlpRegressor(
            tuple(np.asarray(w, dtype=float) for w in obj["weights"]),
            tuple(np.asarray(b, dtype=float) for b in obj["biases"]),
        )


@dataclass(frozen=True)
class KNearestRegressor:
    """Memorizing regressor: mean target of the k nearest training points
    (Euclidean in standardized feature space, ties to the lowest row index)."""

    k: int
    points: np.ndarray
    targets: np.ndarray

    def predict_one(self, z: np.ndarray) -> float:
        d = np.sqrt(((self.points - z) ** 2).sum(axis=1))
        idx = np.argsort(d, kind="stable")[: self.k]
        return float(self.targets[idx].mean())

    def to_dict(self) -> dict:
        return {"kind": "knearest", "k": self.k, "points": self.points.tolist(), "targets": self.targets.tolist()}

    @staticmethod
    def from_dict(obj: dict) -> "KNearestRegressor":
        return KNearestRegressor(
            int(obj["k"]),
            np.asarray(obj["points"], dtype=float),
            np.asarray(obj["targets"], dtype=float),
        )


Regressor = MlpRegressor | KNearestRegressor


def _regressor_from_dict(obj: dict) -> Regressor:
    kind = obj.get("kind")
    if kind == "mlp":
        return MlpRegressor.from_dict(obj)
    if kind == "knearest":
        return KNearestRegressor.from_dict(obj)
    raise ValueError(f"unknown regressor kind {kind!r}")


def _train_mlp(
    zx: np.ndarray, zy: np.ndarray, hidden: Sequence[int], epochs: int, lr: float, momentum: float, seed: int
) -> MlpRegressor:
    rng = np.random.default_rng(seed)
    sizes = [zx.shape[1], *hidden, 1]
    ws = [rng.normal(0.0, 1.0 / math.sqrt(a), size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [np.zeros(b) for b in sizes[1:]]
    vw = [np.zeros_like(w) for w in ws]
    vb = [np.zeros_like(b) for b in bs]
    y = zy.reshape(-1, 1)
    n = zx.shape[0]
    for _ in range(epochs):
        hs = [zx]
        for w, b in zip(ws[:-1], bs[:-1]):
            hs.append(np.tanh(hs[-1] @ w + b))
        out = hs[-1] @ ws[-1] + bs[-1]
        delta = 2.0 * (out - y) / n
        for layer in range(len(ws) - 1, -1, -1):
            gw = hs[layer].T @ delta
            gb = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ ws[layer].T) * (1.0 - hs[layer] ** 2)
            vw[layer] = momentum * vw[layer] - lr * gw
            vb[layer] = momentum * vb[layer] - lr * gb
            ws[layer] = ws[layer] + vw[layer]
            bs[layer] = bs[layer] + vb[layer]
    return MlpRegressor(tuple(ws), tuple(bs))


# --- model ------------------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    kind: str = "mlp"  # "mlp" | "knearest"
    hidden_layers: tuple[int, int, int] = (32, 32, 32)
    epochs: int = 3000
    learning_rate: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    k: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("mlp", "knearest"):
            raise ValueError(f"unknown regressor kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")


class Scaling(NamedTuple):
    offset: float
    scale: float


class PredictionResult(NamedTuple):
    summary: GaussianSummary
    extrapolated: bool


@dataclass(frozen=True)
class SurrogateModel:
    schema: tuple[str, ...]
    feature_offset: np.ndarray
    feature_scale: np.ndarray
    mean_regressor: Regressor
    std_regressor: Regressor
    mean_scaling: Scaling
    std_scaling: Scaling
    feature_bounds: tuple[tuple[float, float], ...]
    reward_range: RewardRange | None = None
    training_info: dict = dataclasses.field(default_factory=dict, compare=False)


def _standardize_features(model: SurrogateModel, features: TaskFeatures) -> np.ndarray:
    if features.schema != model.schema:
        raise ValueError(f"feature schema {features.schema} does not match model schema {model.schema}")
    x = np.asarray(features.values, dtype=float)
    return (x - model.feature_offset) / model.feature_scale


def fit(dataset: Sequence[TrainingRow], config: FitConfig = FitConfig()) -> SurrogateModel:
    """Fit mean and std regressors on standardized features/targets."""
    if len(dataset) < 4:
        raise ValueError(f"need at least 4 training rows, got {len(dataset)}")
    schema = dataset[0].features.schema
    for row in dataset:
        if row.features.schema != schema:
            raise ValueError("inconsistent feature schemas in training set")
        if not (math.isfinite(row.mean) and math.isfinite(row.std)):
            raise ValueError(f"non-finite training target: {row}")

    x = np.array([row.features.values for row in dataset], dtype=float)
    f_off = x.mean(axis=0)
    f_scale = x.std(axis=0)
    f_scale[f_scale == 0.0] = 1.0
    zx = (x - f_off) / f_scale
    bounds = tuple((float(lo), float(hi)) for lo, hi in zip(x.min(axis=0), x.max(axis=0)))

    regs: list[Regressor] = []
    scalings: list[Scaling] = []
    info: dict = {"kind": config.kind, "n_rows": len(dataset)}
    for name, y in (("mean", np.array([r.mean for r in dataset])), ("std", np.array([r.std for r in dataset]))):
        if config.kind == "knearest":
            scaling = Scaling(0.0, 1.0)
            reg: Regressor = KNearestRegressor(config.k, zx.copy(), y.copy())
        else:
            off = float(y.mean())
            scale = float(y.std()) or 1.0
            scaling = Scaling(off, scale)
            reg = _train_mlp(
                zx, (y - off) / scale, config.hidden_layers, config.epochs,
                config.learning_rate, config.momentum, derive_seed(config.seed, name),
            )
        preds = np.array([reg.predict_one(z) * scaling.scale + scaling.offset for z in zx])
        info[f"rmse_{name}"] = float(np.sqrt(((preds - y) ** 2).mean()))
        regs.append(reg)
        scalings.append(scaling)

    means = [r.mean for r in dataset]
    rng = RewardRange(min(means), max(means)) if max(means) > min(means) else None
    return SurrogateModel(
        schema, f_off, f_scale, regs[0], regs[1], scalings[0], scalings[1], bounds, rng, info
    )


def predict_full(model: SurrogateModel, features: TaskFeatures) -> PredictionResult:
    """Predicted trusted-solver summary plus an extrapolation flag (outside
    the training bounding box)."""
    z = _standardize_features(model, features)
    mean = model.mean_regressor.predict_one(z) * model.mean_scaling.scale + model.mean_scaling.offset
    std = model.std_regressor.predict_one(z) * model.std_scaling.scale + model.std_scaling.offset
    outside = any(
        v < lo or v > hi for v, (lo, hi) in zip(features.values, model.feature_bounds)
    )
    return PredictionResult(GaussianSummary(float(mean), max(float(std), SIGMA_FLOOR)), outside)


def predict(model: SurrogateModel, features: TaskFeatures) -> GaussianSummary:
    return predict_full(model, features).summary


def save(model: SurrogateModel, path: str | Path) -> None:
    obj = {
        "version": MODEL_FORMAT_VERSION,
        "schema": list(model.schema),
        "feature_scaling": {
            "offset": model.feature_offset.tolist(),
            "scale": model.feature_scale.tolist(),
        },
        "target_scaling": {"mean": list(model.mean_scaling), "std": list(model.std_scaling)},
        "mean_regressor": model.mean_regressor.to_dict(),
        "std_regressor": model.std_regressor.to_dict(),
        "feature_bounds": [list(b) for b in model.feature_bounds],
        "reward_range": list(model.reward_range) if model.reward_range else None,
        "training_info": model.training_info,
    }
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load(path: str | Path) -> SurrogateModel:
    try:
        obj = json.loads(Path(path).read_text())
        if obj.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model file version: {obj.get('version')!r}")
        rng = obj.get("reward_range")
        return SurrogateModel(
            schema=tuple(obj["schema"]),
            feature_offset=np.asarray(obj["feature_scaling"]["offset"], dtype=float),
            feature_scale=np.asarray(obj["feature_scaling"]["scale"], dtype=float),
            mean_regressor=_regressor_from_dict(obj["mean_regressor"]),
            std_regressor=_regressor_from_dict(obj["std_regressor"]),
            mean_scaling=Scaling(*obj["target_scaling"]["mean"]),
            std_scaling=Scaling(*obj["target_scaling"]["std"]),
            feature_bounds=tuple((float(lo), float(hi)) for lo, hi in obj["feature_bounds"]),
            reward_range=RewardRange(*rng) if rng else None,
            training_info=obj.get("training_info", {}),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"corrupt or incompatible model file {path}: {exc}") from exc
