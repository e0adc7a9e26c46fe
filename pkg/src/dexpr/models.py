"""Interpretable classifiers over binary feature matrices.

Each model exposes ``predict_proba`` (probability of the positive class) and
``predict`` (boolean), and the tree-based ones expose the structure that the
complexity measures need: number of leaves (rules) and leaf depths (clauses
per rule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ForestModel",
    "KnnModel",
    "LogRegModel",
    "ModelError",
    "Node",
    "TreeModel",
    "knn_predict",
    "logistic_loss_and_grad",
    "train_forest",
    "train_knn",
    "train_logreg",
    "train_tree",
    "tree_stats",
]


class ModelError(ValueError):
    pass


def _check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ModelError("training matrix must be 2-D and non-empty")
    if X.shape[0] != y.shape[0]:
        raise ModelError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    return (X != 0).astype(np.uint8), y


# ---------------------------------------------------------------------------
# decision tree
# ---------------------------------------------------------------------------


@dataclass
class Node:
    """Internal nodes test ``feature``; ``absent``/``present`` are the 0/1 branches."""

    prob: float
    samples: int
    feature: int | None = None
    absent: "Node | None" = None
    present: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def label(self) -> bool:
        return self.prob >= 0.5

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"prob": self.prob, "samples": self.samples}
        return {
            "prob": self.prob,
            "samples": self.samples,
            "feature": self.feature,
            "absent": self.absent.to_dict(),
            "present": self.present.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        if "feature" not in d:
            return cls(float(d["prob"]), int(d["samples"]))
        return cls(
            float(d["prob"]),
            int(d["samples"]),
            int(d["feature"]),
            cls.from_dict(d["absent"]),
            cls.from_dict(d["present"]),
        )


def _gini_cost(n: np.ndarray, pos: np.ndarray) -> np.ndarray:
    # n * gini(pos / n), with 0 for empty children
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = n - pos
        cost = n - (pos * pos + neg * neg) / n
    return np.where(n > 0, cost, 0.0)


def _grow(X, y, idx, depth, max_depth, min_leaf, n_sub, rng) -> Node:
    ys = y[idx]
    n = len(idx)
    pos = int(ys.sum())
    node = Node(pos / n, n)
    if pos == 0 or pos == n or n < 2 * min_leaf:
        return node
    if max_depth is not None and depth >= max_depth:
        return node
    sub = X[idx]
    n1 = sub.sum(axis=0).astype(np.int64)
    candidates = np.flatnonzero((n1 >= min_leaf) & (n - n1 >= min_leaf) & (n1 > 0) & (n1 < n))
    if candidates.size == 0:
        return node
    if n_sub is not None and candidates.size > n_sub:
        candidates = np.sort(rng.choice(candidates, size=n_sub, replace=False))
    pos1 = (sub[:, candidates].astype(bool) & ys[:, None]).sum(axis=0).astype(np.int64)
    c1 = n1[candidates]
    cost = _gini_cost(c1.astype(float), pos1.astype(float)) + _gini_cost(
        (n - c1).astype(float), (pos - pos1).astype(float)
    )
    # zero-gain splits are allowed (an XOR needs one); ties go to the lowest index
    best = int(candidates[int(np.argmin(cost))])
    mask = sub[:, best].astype(bool)
    node.feature = best
    node.absent = _grow(X, y, idx[~mask], depth + 1, max_depth, min_leaf, n_sub, rng)
    node.present = _grow(X, y, idx[mask], depth + 1, max_depth, min_leaf, n_sub, rng)
    return node


@dataclass
class TreeModel:
    root: Node
    n_features: int

    def _leaf(self, row) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.present if row[node.feature] else node.absent
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X))
        return np.array([self._leaf(row).prob for row in X], dtype=float)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= 0.5

    def decision_path(self, row) -> tuple[list[tuple[int, bool]], Node]:
        """Tests taken for ``row`` as (feature, present) pairs, plus the leaf."""
        path = []
        node = self.root
        while not node.is_leaf:
            present = bool(row[node.feature])
            path.append((node.feature, present))
            node = node.present if present else node.absent
        return path, node

    def leaves(self) -> list[tuple[list[tuple[int, bool]], Node]]:
        out = []

        def walk(node, path):
            if node.is_leaf:
                out.append((path, node))
                return
            walk(node.absent, path + [(node.feature, False)])
            walk(node.present, path + [(node.feature, True)])

        walk(self.root, [])
        return out

    @property
    def leaf_count(self) -> int:
        return len(self.leaves())

    @property
    def leaf_depths(self) -> list[int]:
        return [len(p) for p, _ in self.leaves()]

    def rules(self, feature_names: Sequence[str] | None = None) -> list[str]:
        """One ``IF ... THEN ...`` line per leaf."""
        names = feature_names or [f"f{i}" for i in range(self.n_features)]
        lines = []
        for path, leaf in self.leaves():
            conds = [
                f"has({names[f]})" if present else f"NOT has({names[f]})" for f, present in path
            ]
            cond = " AND ".join(conds) if conds else "TRUE"
            outcome = "positive" if leaf.label else "negative"
            lines.append(f"IF {cond} THEN {outcome} (p={leaf.prob:.2f}, n={leaf.samples})")
        return lines

    def to_dict(self) -> dict:
        return {"type": "tree", "n_features": self.n_features, "root": self.root.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        return cls(Node.from_dict(d["root"]), int(d["n_features"]))


def train_tree(
    X,
    y,
    max_depth: int | None = None,
    min_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeModel:
    """Greedy top-down CART induction with the Gini criterion.

    Splitting stops at pure nodes, when no feature varies within the node,
    or at ``max_depth``. ``max_features`` samples that many candidate
    features per split (forests); ``None`` considers all of them.
    """
    X, y = _check_xy(X, y)
    if max_features is not None and rng is None:
        rng = np.random.default_rng(0)
    root = _grow(X, y, np.arange(X.shape[0]), 0, max_depth, min_leaf, max_features, rng)
    return TreeModel(root, X.shape[1])


def tree_stats(model: TreeModel) -> dict[str, float]:
    depths = model.leaf_depths
    return {"rules": len(depths), "mean_clauses": float(np.mean(depths))}


# ---------------------------------------------------------------------------
# random forest
# ---------------------------------------------------------------------------


@dataclass
class ForestModel:
    trees: list[TreeModel]
    seeds: list[int] = field(default_factory=list)

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    def predict_proba(self, X) -> np.ndarray:
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def predict(self, X) -> np.ndarray:
        votes = np.mean([t.predict(X) for t in self.trees], axis=0)
        return (votes > 0.5) | ((votes == 0.5) & (self.predict_proba(X) >= 0.5))

    def stats(self) -> dict[str, float]:
        per_tree = [tree_stats(t) for t in self.trees]
        return {
            "trees": self.tree_count,
            "rules": float(np.mean([s["rules"] for s in per_tree])),
            "mean_clauses": float(np.mean([s["mean_clauses"] for s in per_tree])),
        }

    def to_dict(self) -> dict:
        return {"type": "forest", "seeds": self.seeds, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls([TreeModel.from_dict(t) for t in d["trees"]], list(d.get("seeds", [])))


def _resolve_max_features(max_features, n_features: int) -> int | None:
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    return max(1, min(int(max_features), n_features))


def train_forest(
    X,
    y,
    tree_count: int = 5,
    max_features: int | str | None = "sqrt",
    bootstrap: bool = True,
    seed: int = 0,
    max_depth: int | None = None,
) -> ForestModel:
    """Bagged CART trees with per-split feature subsampling.

    Each tree gets its own seed spawned from ``seed``, so a forest is fully
    determined by its arguments.
    """
    X, y = _check_xy(X, y)
    if tree_count < 1:
        raise ModelError("tree_count must be >= 1")
    n = X.shape[0]
    n_sub = _resolve_max_features(max_features, X.shape[1])
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(tree_count)]
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        root = _grow(X, y, idx, 0, max_depth, 1, n_sub, rng)
        trees.append(TreeModel(root, X.shape[1]))
    return ForestModel(trees, seeds)


# ---------------------------------------------------------------------------
# k nearest neighbours
# ---------------------------------------------------------------------------


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 5

    def __post_init__(self):
        if not 1 <= self.k <= len(self.y):
            raise ModelError(f"k={self.k} must be between 1 and the training size {len(self.y)}")

    def _votes(self, X, k: int) -> np.ndarray:
        if not 1 <= k <= len(self.y):
            raise ModelError(f"k={k} must be between 1 and the training size {len(self.y)}")
        R = (np.atleast_2d(np.asarray(X)) != 0).astype(np.int64)
        T = self.X.astype(np.int64)
        # Hamming distance between binary rows
        dist = R.sum(1)[:, None] + T.sum(1)[None, :] - 2 * (R @ T.T)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        return self.y[nearest].mean(axis=1)

    def predict_proba(self, X, k: int | None = None) -> np.ndarray:
        return self._votes(X, self.k if k is None else k)

    def predict(self, X, k: int | None = None) -> np.ndarray:
        return self.predict_proba(X, k) >= 0.5


def train_knn(X, y, k: int = 5) -> KnnModel:
    X, y = _check_xy(X, y)
    return KnnModel(X, y, k)


def knn_predict(model: KnnModel, row, k: int | None = None) -> tuple[bool, float]:
    """Class and positive-vote fraction for one row; vote ties go positive."""
    score = float(model.predict_proba(np.asarray(row)[None, :], k)[0])
    return score >= 0.5, score


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------


def logistic_loss_and_grad(w, b, X, y, l2: float = 0.0):
    """Mean log-loss plus (l2/2)*||w||^2, and its gradient w.r.t. (w, b)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w))
    err = _sigmoid(z) - y
    grad_w = X.T @ err / len(y) + l2 * w
    grad_b = float(err.mean())
    return loss, grad_w, grad_b


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    lr: float = 0.1
    iters: int = 1000
    l2: float = 0.0
    loss_history: list[float] = field(default_factory=list, repr=False)

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(np.asarray(X, dtype=float) @ self.weights + self.bias)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= 0.5

    def to_dict(self) -> dict:
        return {
            "type": "logreg",
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "lr": self.lr,
            "iters": self.iters,
            "l2": self.l2,
        }


def train_logreg(X, y, lr: float = 0.1, iters: int = 1000, l2: float = 0.0) -> LogRegModel:
    """Full-batch gradient descent from zero weights."""
    X, y = _check_xy(X, y)
    Xf = X.astype(float)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    # overflow is detected below and reported, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iters):
            loss, gw, gb = logistic_loss_and_grad(w, b, Xf, y, l2)
            if not math.isfinite(loss):
                raise ModelError(f"logistic regression diverged (loss={loss}); try a smaller lr than {lr}")
            history.append(loss)
            w = w - lr * gw
            b = b - lr * gb
        loss, _, _ = logistic_loss_and_grad(w, b, Xf, y, l2)
    if not math.isfinite(loss) or not np.all(np.isfinite(w)):
        raise ModelError(f"logistic regression diverged; try a smaller lr than {lr}")
    history.append(loss)
    return LogRegModel(w, float(b), lr, iters, l2, history)
