"""Greedy CART on binary presence features, the interpretable comparison model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .features import Dataset, FeatureKey


@dataclass(frozen=True)
class TreeHyperparams:
    criterion: str = "gini"  # "gini" or "entropy"
    max_depth: int = 6
    min_impurity_decrease: float = 1e-3

    def __post_init__(self):
        if self.criterion not in ("gini", "entropy"):
            raise ValueError("criterion must be 'gini' or 'entropy'")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT_TREE_GRID: tuple[TreeHyperparams, ...] = tuple(
    TreeHyperparams(criterion=c, max_depth=d)
    for c in ("gini", "entropy") for d in (6, 15)
)


@dataclass
class TreeNode:
    prediction: str | None = None
    feature: FeatureKey | None = None
    column: int | None = None
    absent: "TreeNode | None" = None
    present: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.prediction is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.absent.depth(), self.present.depth())


def _impurity(counts: np.ndarray, totals: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity per column of a (classes x nodes) count matrix; 0 when empty."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
        if criterion == "gini":
            return np.where(totals > 0, 1.0 - (p ** 2).sum(axis=0), 0.0)
        logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return np.where(totals > 0, -(p * logp).sum(axis=0), 0.0)


@dataclass
class DTreeModel:
    choices: tuple[str, ...]
    feature_index: dict[FeatureKey, int]
    root: TreeNode
    hyper: TreeHyperparams

    def predict(self, features: Iterable[FeatureKey]) -> str:
        present = {self.feature_index[k] for k in features if k in self.feature_index}
        node = self.root
        while not node.is_leaf:
            node = node.present if node.column in present else node.absent
        return node.prediction

    def depth(self) -> int:
        return self.root.depth()


def train_decision_tree(train: Dataset, hyper: TreeHyperparams) -> DTreeModel:
    """Grow a CART tree: best impurity decrease per split, majority leaves.

    The impurity decrease of a split is measured locally at the node,
    impurity(parent) - weighted child impurities; growth stops at max_depth
    or when the best decrease falls below min_impurity_decrease. Leaf ties
    go to the earliest lexical choice.
    """
    labels = train.labels()
    present_choices = set(labels)
    choices = tuple(c for c in train.choice_lemmas() if c in present_choices)
    if len(choices) < 2:
        raise ValueError("training requires at least 2 lexical choices with data")
    choice_of = {c: k for k, c in enumerate(choices)}
    y = np.array([choice_of[lab] for lab in labels])
    X = np.asarray(train.matrix().todense()) > 0.5
    n_classes = len(choices)
    columns = sorted(train.feature_index.items(), key=lambda kv: kv[1])
    keys = [key for key, _ in columns]

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y[indices], minlength=n_classes)
        majority = choices[int(np.argmax(counts))]
        n = len(indices)
        if depth >= hyper.max_depth or counts.max() == n:
            return TreeNode(prediction=majority)
        onehot = np.zeros((n_classes, n))
        onehot[y[indices], np.arange(n)] = 1.0
        sub = X[indices]
        counts_right = onehot @ sub            # (classes x features)
        n_right = sub.sum(axis=0).astype(float)
        counts_left = counts[:, None] - counts_right
        n_left = n - n_right
        parent = _impurity(counts[:, None].astype(float), np.array([float(n)]),
                           hyper.criterion)[0]
        imp_left = _impurity(counts_left, n_left, hyper.criterion)
        imp_right = _impurity(counts_right, n_right, hyper.criterion)
        decrease = parent - (n_left / n) * imp_left - (n_right / n) * imp_right
        decrease[(n_left == 0) | (n_right == 0)] = -np.inf
        best = int(np.argmax(decrease))
        if decrease[best] < hyper.min_impurity_decrease:
            return TreeNode(prediction=majority)
        mask = sub[:, best]
        return TreeNode(
            feature=keys[best],
            column=best,
            absent=grow(indices[~mask], depth + 1),
            present=grow(indices[mask], depth + 1),
        )

    root = grow(np.arange(len(labels)), 0) if labels else TreeNode(prediction=choices[0])
    return DTreeModel(choices=choices, feature_index=dict(train.feature_index),
                      root=root, hyper=hyper)
