"""Stratified cross-validation, ROC curves and operating points."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifier import ModelSpec, train
from .errors import OneClassOnly, TooFewExamples
from .features import NEGATIVE, POSITIVE, LabeledFeatureVector

PAPER_FPR_POINTS = (0.10, 0.035)


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def tpr(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def fpr(self) -> float:
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(scores, is_pos, threshold: float = 0.5, strict: bool = True) -> Confusion:
    """Counts for "predict positive iff score > threshold" (``>=`` when not strict)."""
    scores = np.asarray(scores, dtype=np.float64)
    is_pos = np.asarray(is_pos, dtype=bool)
    pred = scores > threshold if strict else scores >= threshold
    return Confusion(int((pred & is_pos).sum()), int((pred & ~is_pos).sum()),
                     int((~pred & ~is_pos).sum()), int((~pred & is_pos).sum()))


def roc_table(scores, is_pos) -> tuple[list[tuple[float, float]], list[float]]:
    """ROC points and the score threshold reached at each point.

    Thresholds sweep the distinct scores in descending order; tied scores
    enter together. Point k is "predict positive iff score >= thresholds[k]";
    the first point (0, 0) has threshold +inf.
    """
    scores = np.asarray(scores, dtype=np.float64)
    is_pos = np.asarray(is_pos, dtype=bool)
    n_pos = int(is_pos.sum())
    n_neg = len(is_pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("ROC needs both positive and negative examples")
    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], is_pos[order]
    tp = fp = 0
    points = [(0.0, 0.0)]
    thresholds = [float("inf")]
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            tp += int(p[j])
            fp += int(not p[j])
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        thresholds.append(float(s[i]))
        i = j
    return points, thresholds


def auc_from_points(points: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def roc_curve(scores, is_pos=None) -> tuple[list[tuple[float, float]], float]:
    """ROC points and trapezoidal AUC.

    Accepts either ``roc_curve(pairs)`` with (score, is_positive) pairs or
    ``roc_curve(scores, is_pos)``.
    """
    if is_pos is None:
        pairs = list(scores)
        scores = [s for s, _ in pairs]
        is_pos = [bool(y) for _, y in pairs]
    points, _ = roc_table(scores, is_pos)
    return points, auc_from_points(points)


def operating_point(points, thresholds, target_fpr: float) -> dict:
    """Highest-TPR ROC point whose FPR does not exceed ``target_fpr``."""
    best = 0
    for k, (fpr, tpr) in enumerate(points):
        if fpr <= target_fpr + 1e-12 and tpr >= points[best][1]:
            best = k
    fpr, tpr = points[best]
    thr = thresholds[best]
    return {"target_fpr": target_fpr, "fpr": fpr, "tpr": tpr,
            "threshold": None if thr == float("inf") else thr}


def average_roc(curves: Sequence[Sequence[tuple[float, float]]], grid=None) -> list[tuple[float, float]]:
    """Vertical averaging: mean TPR of the curves at fixed FPR grid points.

    Each curve is read by linear interpolation between consecutive points; at
    repeated FPR values the highest TPR is used.
    """
    grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, dtype=np.float64)
    acc = np.zeros(len(grid))
    for pts in curves:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        vals = []
        for g in grid:
            i = max(k for k in range(len(xs)) if xs[k] <= g)
            if i + 1 < len(xs) and xs[i + 1] > xs[i]:
                w = (g - xs[i]) / (xs[i + 1] - xs[i])
                vals.append(ys[i] + w * (ys[i + 1] - ys[i]))
            else:
                vals.append(ys[i])
        acc += np.asarray(vals)
    mean = acc / len(curves)
    return list(zip(grid.tolist(), mean.tolist()))


@dataclass
class FoldResult:
    confusion: Confusion
    roc_points: list[tuple[float, float]] | None
    auc: float | None


@dataclass
class EvalResult:
    task: str
    kind: str
    folds: list[FoldResult]
    confusion: Confusion
    roc_points: list[tuple[float, float]]
    thresholds: list[float]
    auc: float
    scores: np.ndarray = field(repr=False)
    is_pos: np.ndarray = field(repr=False)
    n_folds: int = 10

    def operating_points(self, fprs=PAPER_FPR_POINTS) -> list[dict]:
        out = []
        for f in fprs:
            op = operating_point(self.roc_points, self.thresholds, f)
            thr = op["threshold"]
            conf = (confusion(self.scores, self.is_pos, thr, strict=False) if thr is not None
                    else Confusion(0, 0, int((~self.is_pos).sum()), int(self.is_pos.sum())))
            op["confusion"] = conf.to_dict()
            out.append(op)
        return out

    def summary(self) -> dict:
        return {
            "task": self.task,
            "model": self.kind,
            "folds": self.n_folds,
            "n": int(len(self.scores)),
            "n_positive": int(self.is_pos.sum()),
            "auc": self.auc,
            "fold_auc": [f.auc for f in self.folds],
            "confusion": self.confusion.to_dict(),
            "operating_points": self.operating_points(),
        }


def stratified_folds(labels: Sequence[str], folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per example; each class is shuffled then dealt round-robin."""
    labels = np.asarray(labels, dtype=object)
    assign = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for lab in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == lab)
        idx = idx[rng.permutation(len(idx))]
        assign[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return assign


def cross_validate(spec: ModelSpec, data: Sequence[LabeledFeatureVector], folds: int = 10) -> EvalResult:
    if not data:
        raise TooFewExamples("empty dataset")
    task = data[0].task
    pos = POSITIVE[task]
    data = sorted(data, key=lambda d: (d.t, d.label, d.fv.f))
    labels = [d.label for d in data]
    counts = {lab: labels.count(lab) for lab in (pos, NEGATIVE[task])}
    minority = min(counts.values())
    if minority < 2:
        raise TooFewExamples(f"each class needs >= 2 examples, got {counts}")
    if minority < folds:
        warnings.warn(f"reducing folds from {folds} to {minority} (minority class size)", stacklevel=2)
        folds = minority
    rng = np.random.default_rng(spec.seed)
    assign = stratified_folds(labels, folds, rng)
    scores = np.zeros(len(data))
    is_pos = np.array([lab == pos for lab in labels])
    fold_results = []
    for k in range(folds):
        test = np.flatnonzero(assign == k)
        train_rows = [data[i] for i in np.flatnonzero(assign != k)]
        model = train(spec, train_rows)
        X = np.array([data[i].fv.f for i in test], dtype=np.float64)
        s = model.positive_score(X)
        scores[test] = s
        yt = is_pos[test]
        if yt.any() and not yt.all():
            pts, auc = roc_curve(s, yt)
        else:
            pts, auc = None, None
        fold_results.append(FoldResult(confusion(s, yt), pts, auc))
    points, thresholds = roc_table(scores, is_pos)
    pooled = Confusion()
    for f in fold_results:
        pooled = pooled + f.confusion
    return EvalResult(task, spec.kind, fold_results, pooled, points, thresholds,
                      auc_from_points(points), scores, is_pos, folds)


def roc_csv(result: EvalResult) -> str:
    lines = ["threshold,fpr,tpr"]
    for thr, (fpr, tpr) in zip(result.thresholds, result.roc_points):
        lines.append(f"{'inf' if thr == float('inf') else repr(thr)},{fpr!r},{tpr!r}")
    return "\n".join(lines) + "\n"
