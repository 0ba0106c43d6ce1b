"""From-scratch CART trees and a random-forest ensemble for the two-class
cell dataset, with 10-fold cross-validated hyperparameter search,
leave-one-out evaluation and the derived classification metrics.

Split search is exhaustive: candidate thresholds are the midpoints of
consecutive distinct sorted feature values; the split maximizing the
impurity decrease wins, ties broken by lower feature index then lower
threshold.  Tree traversal goes left when x[feature] < threshold.

Determinism contract: all randomness flows from integer seeds through
numpy SeedSequence streams with a documented counter scheme, so parallel
or re-run training reproduces identical models:

    tree k of a forest        SeedSequence([seed, k])
    CV fold f training seed   SeedSequence([seed, 0xC5, f])
    LOO fold i training seed  SeedSequence([seed, 0x100, i])

Leaf and prediction ties resolve to Low.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cohort import INT_TO_LABEL, Dataset, NormBounds, normalize
from .environment import EnvAttributes
from .errors import DegenerateLabels, InvalidFolds, InvalidInput, NoData

GINI = "gini"
ENTROPY = "entropy"

DEPTH_CAP = 16  # "unlimited" depth is capped here

_CV_TAG = 0xC5
_LOO_TAG = 0x100

MODEL_FORMAT = "geobehave-forest"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Leaf:
    klass: int  # 0=Low, 1=High
    counts: tuple[int, int]  # (n_low, n_high) of training points in the leaf


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Split


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    max_depth: int | None = None  # None = unlimited (capped at DEPTH_CAP)
    criterion: str = GINI
    bootstrap: bool = True
    features_per_split: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidInput(f"n_trees must be >= 1, got {self.n_trees}")
        if self.criterion not in (GINI, ENTROPY):
            raise InvalidInput(f"unknown criterion {self.criterion!r}")
        if not (1 <= self.features_per_split <= 4):
            raise InvalidInput(
                f"features_per_split must be in [1, 4], got {self.features_per_split}"
            )
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidInput(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.seed < 0:
            raise InvalidInput(f"seed must be nonnegative, got {self.seed}")

    @property
    def effective_depth(self) -> int:
        return DEPTH_CAP if self.max_depth is None else min(self.max_depth, DEPTH_CAP)


@dataclass
class ForestModel:
    trees: list[TreeNode]
    hyperparams: ForestHyperparams
    norm_bounds: NormBounds
    threshold: float
    fingerprint: str = ""

    def __post_init__(self):
        if not self.fingerprint:
            self.fingerprint = _fingerprint(self)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed actual then predicted: tll = actual Low predicted Low,
    tlh = actual Low predicted High, thl/thh likewise for actual High."""

    tll: int
    tlh: int
    thl: int
    thh: int

    def total(self) -> int:
        return self.tll + self.tlh + self.thl + self.thh


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    low: ClassMetrics
    high: ClassMetrics
    degenerate: bool = False  # a zero denominator was coerced to 0.0


# ---------------------------------------------------------------------------
# Impurity and split search
# ---------------------------------------------------------------------------

def _impurity(n_high: np.ndarray, n: np.ndarray, criterion: str) -> np.ndarray:
    """Vectorized impurity of one side given its High count and size."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.asarray(n_high, dtype=np.float64) / n
        q = 1.0 - p
        if criterion == GINI:
            out = 1.0 - p * p - q * q
        else:
            out = -np.where(p > 0, p * np.log2(p, where=p > 0), 0.0) - np.where(
                q > 0, q * np.log2(q, where=q > 0), 0.0
            )
    return out


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    feature_subset: Sequence[int],
    criterion: str,
) -> tuple[int, float, float] | None:
    """Exhaustive best (feature, threshold, impurity_decrease) or None.

    None when no candidate strictly reduces the weighted impurity.
    """
    n = len(y)
    if n < 2:
        return None
    total_high = int(y.sum())
    if total_high == 0 or total_high == n:
        return None
    parent = float(_impurity(np.array([total_high]), np.array([n]), criterion)[0])

    best: tuple[int, float, float] | None = None
    for f in sorted(feature_subset):
        xs = X[:, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        ys_sorted = y[order]

        left_n = np.arange(1, n, dtype=np.float64)
        left_high = np.cumsum(ys_sorted, dtype=np.float64)[:-1]
        right_n = n - left_n
        right_high = total_high - left_high

        weighted = (
            left_n * _impurity(left_high, left_n, criterion)
            + right_n * _impurity(right_high, right_n, criterion)
        ) / n
        decrease = parent - weighted
        boundary = xs_sorted[1:] != xs_sorted[:-1]
        decrease[~boundary] = -np.inf

        k = int(np.argmax(decrease))  # first max = lowest threshold
        if decrease[k] <= 0.0 or not np.isfinite(decrease[k]):
            continue
        lo, hi = float(xs_sorted[k]), float(xs_sorted[k + 1])
        thr = (lo + hi) / 2.0
        if not (lo < thr):  # adjacent floats: keep the partition faithful
            thr = hi
        if best is None or decrease[k] > best[2]:
            best = (f, thr, float(decrease[k]))
    return best


# ---------------------------------------------------------------------------
# Tree and forest fitting
# ---------------------------------------------------------------------------

def _leaf(y: np.ndarray) -> Leaf:
    n_high = int(y.sum())
    n_low = len(y) - n_high
    return Leaf(klass=1 if n_high > n_low else 0, counts=(n_low, n_high))


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    hp: ForestHyperparams,
    rng: np.random.Generator,
) -> TreeNode:
    """Recursive CART on (X, y); features per node drawn from rng.

    Recursion is depth-first, left child before right, so a given rng
    stream always yields the same tree.
    """
    d = X.shape[1]
    k = min(hp.features_per_split, d)
    max_depth = hp.effective_depth

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        y_node = y[idx]
        if depth >= max_depth or len(idx) < 2:
            return _leaf(y_node)
        if y_node.min() == y_node.max():
            return _leaf(y_node)
        feats = np.sort(rng.choice(d, size=k, replace=False))
        found = best_split(X[idx], y_node, [int(f) for f in feats], hp.criterion)
        if found is None:
            return _leaf(y_node)
        f, thr, _ = found
        mask = X[idx, f] < thr
        left = grow(idx[mask], depth + 1)
        right = grow(idx[~mask], depth + 1)
        return Split(feature=f, threshold=thr, left=left, right=right)

    return grow(np.arange(len(y)), 0)


def _tree_vote(node: TreeNode, x: np.ndarray) -> int:
    while isinstance(node, Split):
        node = node.left if x[node.feature] < node.threshold else node.right
    return node.klass


def _fit_trees(X: np.ndarray, y: np.ndarray, hp: ForestHyperparams) -> list[TreeNode]:
    """Forest internals; tolerates single-class y (trees become leaves)."""
    n = len(y)
    trees = []
    for tree_index in range(hp.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([hp.seed, tree_index]))
        if hp.bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(fit_tree(X[idx], y[idx], hp, rng))
    return trees


def fit_forest(ds: Dataset, hp: ForestHyperparams) -> ForestModel:
    """Train the ensemble on the full dataset."""
    if len(np.unique(ds.y)) < 2:
        raise DegenerateLabels("training dataset has a single class")
    trees = _fit_trees(ds.X, ds.y, hp)
    return ForestModel(
        trees=trees,
        hyperparams=hp,
        norm_bounds=ds.norm_bounds,
        threshold=ds.threshold,
    )


def _votes(trees: Iterable[TreeNode], x: np.ndarray) -> tuple[int, float]:
    """(predicted class, vote fraction) under the tie-to-Low rule."""
    votes = [_tree_vote(t, x) for t in trees]
    n_high = sum(votes)
    n = len(votes)
    predicted = 1 if 2 * n_high > n else 0
    winner_votes = n_high if predicted == 1 else n - n_high
    return predicted, winner_votes / n


def predict(model: ForestModel, env: EnvAttributes) -> tuple[str, float]:
    """Class and vote fraction for a raw (unnormalized) count vector."""
    x = normalize(env, model.norm_bounds)
    predicted, fraction = _votes(model.trees, x)
    return INT_TO_LABEL[predicted], fraction


def predict_features(model: ForestModel, x: np.ndarray) -> tuple[str, float]:
    """Like predict() but on an already-normalized feature vector."""
    predicted, fraction = _votes(model.trees, x)
    return INT_TO_LABEL[predicted], fraction


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _stratified_folds(
    y: np.ndarray, k_folds: int, seed: int
) -> list[np.ndarray]:
    """Deal each class round-robin into folds after a seeded shuffle."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _CV_TAG]))
    folds: list[list[int]] = [[] for _ in range(k_folds)]
    for klass in (0, 1):
        idx = np.flatnonzero(y == klass)
        rng.shuffle(idx)
        for j, i in enumerate(idx):
            folds[j % k_folds].append(int(i))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _fold_accuracy(
    X: np.ndarray,
    y: np.ndarray,
    train_idx: np.ndarray,
    val_idx: np.ndarray,
    hp: ForestHyperparams,
) -> float:
    trees = _fit_trees(X[train_idx], y[train_idx], hp)
    hits = sum(
        1 for i in val_idx if _votes(trees, X[i])[0] == int(y[i])
    )
    return hits / len(val_idx)


def cross_validate(
    ds: Dataset,
    grid: Sequence[ForestHyperparams],
    k_folds: int = 10,
    seed: int = 0,
) -> tuple[ForestHyperparams, list[tuple[ForestHyperparams, float]]]:
    """Pick the grid config with the best mean fold accuracy.

    Folds are stratified from a seeded shuffle and shared by all configs.
    Ties prefer fewer trees, then smaller depth, then gini; on a full tie
    the first occurrence in the grid wins.
    """
    if not grid:
        raise NoData("empty hyperparameter grid")
    n = len(ds)
    if n < k_folds:
        raise InvalidFolds(f"{n} points cannot fill {k_folds} folds")
    folds = _stratified_folds(ds.y, k_folds, seed)
    all_idx = np.arange(n)

    report: list[tuple[ForestHyperparams, float]] = []
    best_key: tuple | None = None
    best_hp: ForestHyperparams | None = None
    for hp in grid:
        accs = []
        for f, val_idx in enumerate(folds):
            if len(val_idx) == 0:
                continue
            train_idx = np.setdiff1d(all_idx, val_idx)
            fold_hp = replace(hp, seed=_derive_seed(hp.seed, _CV_TAG, f))
            accs.append(_fold_accuracy(ds.X, ds.y, train_idx, val_idx, fold_hp))
        mean_acc = float(np.mean(accs))
        report.append((hp, mean_acc))
        key = (
            -mean_acc,
            hp.n_trees,
            hp.effective_depth,
            0 if hp.criterion == GINI else 1,
        )
        if best_key is None or key < best_key:
            best_key = key
            best_hp = hp
    return best_hp, report


def loo_evaluate(ds: Dataset, hp: ForestHyperparams) -> ConfusionMatrix:
    """Leave-one-out confusion matrix.

    Each fold trains a fresh forest on the other N-1 points with a seed
    derived from (hp.seed, point index).  Folds whose training set is
    single-class predict that class (degenerate but well-defined).
    """
    n = len(ds)
    if n < 2:
        raise NoData("need at least 2 points for leave-one-out")
    cm = np.zeros((2, 2), dtype=np.int64)
    all_idx = np.arange(n)
    for i in range(n):
        train_idx = np.delete(all_idx, i)
        fold_hp = replace(hp, seed=_derive_seed(hp.seed, _LOO_TAG, i))
        trees = _fit_trees(ds.X[train_idx], ds.y[train_idx], fold_hp)
        predicted, _ = _votes(trees, ds.X[i])
        cm[int(ds.y[i]), predicted] += 1
    return ConfusionMatrix(
        tll=int(cm[0, 0]), tlh=int(cm[0, 1]), thl=int(cm[1, 0]), thh=int(cm[1, 1])
    )


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy plus per-class precision/recall/F1.

    Zero denominators yield 0.0 and set the degenerate flag.
    """
    total = cm.total()
    if total == 0:
        raise NoData("empty confusion matrix")
    degenerate = False

    def ratio(num: int, den: int) -> float:
        nonlocal degenerate
        if den == 0:
            degenerate = True
            return 0.0
        return num / den

    def f1(p: float, r: float) -> float:
        nonlocal degenerate
        if p + r == 0.0:
            degenerate = True
            return 0.0
        return 2.0 * p * r / (p + r)

    p_low = ratio(cm.tll, cm.tll + cm.thl)
    r_low = ratio(cm.tll, cm.tll + cm.tlh)
    p_high = ratio(cm.thh, cm.thh + cm.tlh)
    r_high = ratio(cm.thh, cm.thh + cm.thl)
    return MetricsReport(
        accuracy=(cm.tll + cm.thh) / total,
        low=ClassMetrics(p_low, r_low, f1(p_low, r_low)),
        high=ClassMetrics(p_high, r_high, f1(p_high, r_high)),
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Persistence: versioned JSON with a content fingerprint
# ---------------------------------------------------------------------------

def _node_to_dict(node: TreeNode):
    if isinstance(node, Leaf):
        return {"class": node.klass, "counts": list(node.counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(obj) -> TreeNode:
    if "class" in obj:
        return Leaf(klass=int(obj["class"]), counts=tuple(obj["counts"]))
    return Split(
        feature=int(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=_node_from_dict(obj["left"]),
        right=_node_from_dict(obj["right"]),
    )


def _document(model: ForestModel) -> dict:
    hp = model.hyperparams
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "hyperparams": {
            "n_trees": hp.n_trees,
            "max_depth": hp.max_depth,
            "criterion": hp.criterion,
            "bootstrap": hp.bootstrap,
            "features_per_split": hp.features_per_split,
            "seed": hp.seed,
        },
        "norm_bounds": {
            "mins": list(model.norm_bounds.mins),
            "maxs": list(model.norm_bounds.maxs),
        },
        "threshold": model.threshold,
        "trees": [_node_to_dict(t) for t in model.trees],
    }


def _fingerprint(model: ForestModel) -> str:
    canonical = json.dumps(_document(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_model(model: ForestModel, path: Path) -> None:
    doc = _document(model)
    doc["fingerprint"] = model.fingerprint
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_model(path: Path) -> ForestModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise InvalidInput(f"not a version-{MODEL_VERSION} {MODEL_FORMAT} file: {path}")
    hp_doc = doc["hyperparams"]
    hp = ForestHyperparams(
        n_trees=int(hp_doc["n_trees"]),
        max_depth=None if hp_doc["max_depth"] is None else int(hp_doc["max_depth"]),
        criterion=hp_doc["criterion"],
        bootstrap=bool(hp_doc["bootstrap"]),
        features_per_split=int(hp_doc["features_per_split"]),
        seed=int(hp_doc["seed"]),
    )
    model = ForestModel(
        trees=[_node_from_dict(t) for t in doc["trees"]],
        hyperparams=hp,
        norm_bounds=NormBounds(
            mins=tuple(doc["norm_bounds"]["mins"]),
            maxs=tuple(doc["norm_bounds"]["maxs"]),
        ),
        threshold=float(doc["threshold"]),
    )
    stored = doc.get("fingerprint", "")
    if stored and stored != model.fingerprint:
        raise InvalidInput(f"model fingerprint mismatch in {path}")
    return model


def default_grid(seed: int = 0) -> list[ForestHyperparams]:
    """The searched hyperparameter families with our chosen values."""
    grid = []
    for n_trees in (10, 50, 100, 200):
        for max_depth in (2, 3, 4, None):
            for criterion in (GINI, ENTROPY):
                grid.append(
                    ForestHyperparams(
                        n_trees=n_trees,
                        max_depth=max_depth,
                        criterion=criterion,
                        seed=seed,
                    )
                )
    return grid
