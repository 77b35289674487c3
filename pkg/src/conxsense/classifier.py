"""kNN, Gaussian Naive Bayes and Random Forest context classifiers.

All models score the positive ("relax") class and break every tie toward the
negative (restrictive) class.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientData
from .features import FEATURE_NAMES, NEGATIVE, POSITIVE, FeatureVector, LabeledFeatureVector

MODEL_SCHEMA = "conxsense.model/1"
KINDS = ("knn", "naive_bayes", "random_forest")
_ALIASES = {"rf": "random_forest", "nb": "naive_bayes", "knn": "knn"}


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "random_forest"
    knn_k: int = 5
    rf_trees: int = 100
    rf_feature_frac: str | float = "sqrt"
    seed: int = 0
    nb_var_floor: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.knn_k < 1 or self.rf_trees < 1:
            raise ValueError("knn_k and rf_trees must be >= 1")

    def n_split_features(self, d: int) -> int:
        if self.rf_feature_frac == "sqrt":
            return math.ceil(math.sqrt(d))
        frac = float(self.rf_feature_frac)
        if not 0 < frac <= 1:
            raise ValueError("rf_feature_frac must be 'sqrt' or in (0, 1]")
        return max(1, math.ceil(frac * d))


def _standardize_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


class TrainedModel:
    kind: str

    def __init__(self, spec: ModelSpec, task: str):
        self.spec = spec
        self.task = task
        self.positive = POSITIVE[task]
        self.negative = NEGATIVE[task]

    def positive_score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _decide(self, score: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = score > 0.5
        labels = np.where(pos, self.positive, self.negative).astype(object)
        conf = np.where(pos, score, 1.0 - score)
        return labels, conf

    def predict_many(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=np.float64).reshape(-1, len(FEATURE_NAMES))
        return self._decide(self.positive_score(X))

    def predict(self, fv: FeatureVector | Sequence[float]) -> tuple[str, float]:
        f = fv.f if isinstance(fv, FeatureVector) else fv
        labels, conf = self.predict_many([f])
        return str(labels[0]), float(conf[0])

    def to_dict(self) -> dict:
        return {"schema": MODEL_SCHEMA, "kind": self.kind, "task": self.task,
                "positive": self.positive, "negative": self.negative,
                "spec": asdict(self.spec), "features": list(FEATURE_NAMES), "params": self._params()}

    def _params(self) -> dict:
        raise NotImplementedError


class KnnModel(TrainedModel):
    kind = "knn"

    def __init__(self, spec, task, mean, std, Z, y_pos):
        super().__init__(spec, task)
        self.mean, self.std, self.Z, self.y_pos = mean, std, Z, y_pos

    def neighbour_votes(self, X: np.ndarray) -> np.ndarray:
        Zq = (X - self.mean) / self.std
        k = min(self.spec.knn_k, len(self.Z))
        votes = np.empty(len(Zq))
        for r, z in enumerate(Zq):
            d = np.sqrt(((self.Z - z) ** 2).sum(axis=1))
            nearest = np.argsort(d, kind="stable")[:k]
            votes[r] = self.y_pos[nearest].sum()
        return votes

    def positive_score(self, X):
        return self.neighbour_votes(X) / min(self.spec.knn_k, len(self.Z))

    def _params(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist(),
                "Z": self.Z.tolist(), "y_pos": self.y_pos.astype(int).tolist()}


class NaiveBayesModel(TrainedModel):
    kind = "naive_bayes"

    def __init__(self, spec, task, mean, std, log_prior, mu, var):
        super().__init__(spec, task)
        # row 0 = negative class, row 1 = positive class
        self.mean, self.std, self.log_prior, self.mu, self.var = mean, std, log_prior, mu, var

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.mean) / self.std
        ll = -0.5 * (np.log(2.0 * np.pi * self.var)[None, :, :]
                     + (Z[:, None, :] - self.mu[None, :, :]) ** 2 / self.var[None, :, :]).sum(axis=2)
        return ll + self.log_prior[None, :]

    def posterior(self, X: np.ndarray) -> np.ndarray:
        lj = self.log_joint(X)
        lj = lj - lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)

    def positive_score(self, X):
        return self.posterior(X)[:, 1]

    def _params(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "log_prior": self.log_prior.tolist(),
                "mu": self.mu.tolist(), "var": self.var.tolist()}


@dataclass
class Tree:
    feature: list[int]      # -1 marks a leaf
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]      # fraction of positive training rows at the node

    def splits(self) -> list[tuple[int, float]]:
        return [(f, t) for f, t in zip(self.feature, self.threshold) if f >= 0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X))
        for r, x in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[r] = self.value[node]
        return out


def _best_split(x: np.ndarray, y: np.ndarray):
    """Lowest weighted Gini split on one feature; returns (impurity, threshold) or None."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(xs)
    cut = np.flatnonzero(xs[1:] > xs[:-1])  # split after position cut
    if cut.size == 0:
        return None
    pos_left = np.cumsum(ys)[cut]
    n_left = cut + 1.0
    n_right = n - n_left
    pos_right = ys.sum() - pos_left
    p_l = pos_left / n_left
    p_r = pos_right / n_right
    gini = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
    b = int(np.argmin(gini))
    return float(gini[b]), float((xs[cut[b]] + xs[cut[b] + 1]) / 2.0)


def grow_tree(X: np.ndarray, y: np.ndarray, n_feat: int, rng: np.random.Generator) -> Tree:
    """CART tree grown to purity with a random feature subset per split."""
    tree = Tree([], [], [], [], [])

    def new_node(value):
        for arr, v in ((tree.feature, -1), (tree.threshold, 0.0), (tree.left, -1), (tree.right, -1),
                       (tree.value, value)):
            arr.append(v)
        return len(tree.feature) - 1

    root = new_node(float(y.mean()))
    stack = [(root, np.arange(len(y)))]
    d = X.shape[1]
    while stack:
        node, rows = stack.pop()
        yr = y[rows]
        if yr.min() == yr.max():
            continue
        perm = rng.permutation(d)
        best = None
        tried = 0
        for f in perm:
            # keep drawing past the subset only while no usable split was found
            if tried >= n_feat and best is not None:
                break
            tried += 1
            s = _best_split(X[rows, f], yr)
            if s is not None and (best is None or s[0] < best[0]):
                best = (s[0], int(f), s[1])
        if best is None:
            continue
        _, f, thr = best
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        left = new_node(float(y[lrows].mean()))
        right = new_node(float(y[rrows].mean()))
        tree.feature[node], tree.threshold[node] = f, thr
        tree.left[node], tree.right[node] = left, right
        stack.append((right, rrows))
        stack.append((left, lrows))
    return tree


class RandomForestModel(TrainedModel):
    kind = "random_forest"

    def __init__(self, spec, task, trees: list[Tree]):
        super().__init__(spec, task)
        self.trees = trees

    def positive_score(self, X):
        votes = np.zeros(len(X))
        for tree in self.trees:
            votes += tree.apply(X) > 0.5
        return votes / len(self.trees)

    def _params(self):
        return {"trees": [asdict(t) for t in self.trees]}


def _check(data: Sequence[LabeledFeatureVector], spec: ModelSpec):
    if not data:
        raise InsufficientData("any", 2, 0)
    task = data[0].task
    pos, neg = POSITIVE[task], NEGATIVE[task]
    labels = [d.label for d in data]
    for d in data:
        if d.task != task or d.label not in (pos, neg):
            raise ValueError(f"mixed or unknown labels in training data: {d.task}/{d.label}")
    need = 1 if spec.kind == "knn" else 2
    for lab in (neg, pos):
        have = labels.count(lab)
        if have < need:
            raise InsufficientData(lab, need, have)
    if spec.kind == "knn" and len(data) < spec.knn_k:
        raise InsufficientData("any", spec.knn_k, len(data))
    return task


def train(spec: ModelSpec, data: Sequence[LabeledFeatureVector]) -> TrainedModel:
    task = _check(data, spec)
    data = sorted(data, key=lambda d: (d.t, d.label, d.fv.f))
    X = np.array([d.fv.f for d in data], dtype=np.float64)
    y = np.array([d.label == POSITIVE[task] for d in data], dtype=np.float64)
    if spec.kind == "knn":
        mean, std = _standardize_stats(X)
        return KnnModel(spec, task, mean, std, (X - mean) / std, y)
    if spec.kind == "naive_bayes":
        mean, std = _standardize_stats(X)
        Z = (X - mean) / std
        mu = np.stack([Z[y == 0].mean(axis=0), Z[y == 1].mean(axis=0)])
        var = np.stack([Z[y == 0].var(axis=0), Z[y == 1].var(axis=0)])
        var = np.maximum(var, spec.nb_var_floor)
        log_prior = np.log(np.array([(y == 0).mean(), (y == 1).mean()]))
        return NaiveBayesModel(spec, task, mean, std, log_prior, mu, var)
    n_feat = spec.n_split_features(X.shape[1])
    trees = []
    for child in np.random.SeedSequence(spec.seed).spawn(spec.rf_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, len(y), len(y))
        trees.append(grow_tree(X[boot], y[boot], n_feat, rng))
    return RandomForestModel(spec, task, trees)


def predict(model: TrainedModel, fv: FeatureVector) -> tuple[str, float]:
    return model.predict(fv)


def model_from_dict(obj: dict) -> TrainedModel:
    if obj.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema {obj.get('schema')!r}")
    spec = ModelSpec(**obj["spec"])
    task, p = obj["task"], obj["params"]
    arr = lambda k: np.asarray(p[k], dtype=np.float64)  # noqa: E731
    if spec.kind == "knn":
        return KnnModel(spec, task, arr("mean"), arr("std"), arr("Z"), arr("y_pos"))
    if spec.kind == "naive_bayes":
        return NaiveBayesModel(spec, task, arr("mean"), arr("std"), arr("log_prior"), arr("mu"), arr("var"))
    return RandomForestModel(spec, task, [Tree(**t) for t in p["trees"]])
