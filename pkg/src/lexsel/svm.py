"""One-vs-rest linear SVM with an SMO solver on the hinge-loss dual.

Per lexical choice k the trainer minimizes

    0.5 * ||w||^2 + C * sum_i c_i * max(0, 1 - y_i (w.x_i + b))

with y_i = +1 for choice k and -1 otherwise, c_i = 1 or the balanced class
weight n/(2 * n_class). The intercept b is unregularized, which puts the
equality constraint sum_i y_i alpha_i = 0 into the dual; the solver is
therefore a pairwise (SMO) coordinate method with maximal-violating-pair
working-set selection, deterministic throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .features import Dataset, FeatureKey

_TAU = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    C: float = 0.01
    class_weight: str = "none"  # "none" or "balanced"
    tolerance: float = 1e-4
    max_iter: int = 10000

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.class_weight not in ("none", "balanced"):
            raise ValueError("class_weight must be 'none' or 'balanced'")


#: Grid searched during cross-validation.
DEFAULT_GRID: tuple[Hyperparams, ...] = tuple(
    Hyperparams(C=c, class_weight=cw) for c in (0.001, 0.01) for cw in ("balanced", "none")
)


@dataclass
class SolverInfo:
    iterations: int
    converged: bool
    kkt_gap: float
    dual_objective: float
    primal_objective: float


def hinge_objective(w: np.ndarray, b: float, X: sp.csr_matrix, y: np.ndarray,
                    box: np.ndarray) -> float:
    """Primal objective 0.5||w||^2 + sum_i box_i * hinge_i."""
    margins = 1.0 - y * (X @ w + b)
    return 0.5 * float(w @ w) + float(box @ np.maximum(margins, 0.0))


def _solve_binary(X: sp.csr_matrix, y: np.ndarray, box: np.ndarray,
                  tolerance: float, max_iter: int) -> tuple[np.ndarray, float, SolverInfo]:
    """SMO on the dual; returns (w, b, info).

    Dual: min 0.5 a'Qa - e'a  s.t.  y'a = 0, 0 <= a_i <= box_i, with
    Q_ij = y_i y_j x_i.x_j. The gradient G_i = y_i (w.x_i) - 1 is kept
    incrementally; v_i = -y_i G_i bounds the intercept from below on the
    "up" set and from above on the "low" set, so the most violating pair is
    (argmax v on up, argmin v on low). Pair updates and clipping follow the
    standard two-variable subproblem solution.
    """
    n = X.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    G = -np.ones(n)
    pos = y > 0

    if n <= 4096:
        gram = np.asarray((X @ X.T).todense())

        def kernel_column(i: int) -> np.ndarray:
            return gram[i]
    else:
        cache: dict[int, np.ndarray] = {}

        def kernel_column(i: int) -> np.ndarray:
            col = cache.get(i)
            if col is None:
                col = np.asarray((X @ X.getrow(i).T).todense()).ravel()
                cache[i] = col
            return col

    def dual_objective() -> float:
        return float(alpha.sum() - 0.5 * (w @ w))

    prev_obj = dual_objective()
    check_every = max(n, 64)
    converged = False
    kkt_gap = np.inf
    it = 0
    while it < max_iter:
        v = -y * G
        at_lower = alpha <= 0.0
        at_upper = alpha >= box
        up = (pos & ~at_upper) | (~pos & ~at_lower)
        low = (~pos & ~at_upper) | (pos & ~at_lower)
        if not up.any() or not low.any():
            converged = True
            kkt_gap = 0.0
            break
        v_up = np.where(up, v, -np.inf)
        v_low = np.where(low, v, np.inf)
        i = int(np.argmax(v_up))
        j = int(np.argmin(v_low))
        kkt_gap = float(v_up[i] - v_low[j])
        if kkt_gap <= 1e-8:
            converged = True
            break

        col_i = kernel_column(i)
        col_j = kernel_column(j)
        quad = col_i[i] + col_j[j] - 2.0 * col_i[j]
        if quad <= 0:
            quad = _TAU

        old_i, old_j = alpha[i], alpha[j]
        ci, cj = box[i], box[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > ci - cj:
                if ai > ci:
                    ai, aj = ci, ci - diff
            else:
                if aj > cj:
                    aj, ai = cj, cj + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > ci:
                if ai > ci:
                    ai, aj = ci, total - ci
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > cj:
                if aj > cj:
                    aj, ai = cj, total - cj
            else:
                if ai < 0:
                    ai, aj = 0.0, total
        alpha[i] = min(max(ai, 0.0), ci)
        alpha[j] = min(max(aj, 0.0), cj)

        d_i = (alpha[i] - old_i) * y[i]
        d_j = (alpha[j] - old_j) * y[j]
        if d_i != 0.0:
            row = X.getrow(i)
            w[row.indices] += d_i * row.data
        if d_j != 0.0:
            row = X.getrow(j)
            w[row.indices] += d_j * row.data
        G += y * (d_i * col_i + d_j * col_j)
        it += 1

        if it % check_every == 0:
            obj = dual_objective()
            if obj - prev_obj < tolerance * max(abs(obj), 1e-12):
                converged = True
                break
            prev_obj = obj

    v = -y * G
    free = (alpha > 0.0) & (alpha < box)
    if free.any():
        b = float(np.mean(v[free]))
    else:
        at_lower = alpha <= 0.0
        at_upper = alpha >= box
        up = (pos & ~at_upper) | (~pos & ~at_lower)
        low = (~pos & ~at_upper) | (pos & ~at_lower)
        lo = float(np.max(v[up])) if up.any() else None
        hi = float(np.min(v[low])) if low.any() else None
        if lo is not None and hi is not None:
            b = 0.5 * (lo + hi)
        else:
            b = lo if lo is not None else (hi if hi is not None else 0.0)

    info = SolverInfo(
        iterations=it,
        converged=converged,
        kkt_gap=float(kkt_gap) if np.isfinite(kkt_gap) else 0.0,
        dual_objective=dual_objective(),
        primal_objective=hinge_objective(w, b, X, y, box),
    )
    return w, b, info


def class_weights(labels: Sequence[str], positive: str, scheme: str) -> np.ndarray:
    """Per-example weight c_i for one OvR subproblem."""
    n = len(labels)
    y_pos = np.array([lab == positive for lab in labels])
    if scheme == "none":
        return np.ones(n)
    n_pos = int(y_pos.sum())
    n_neg = n - n_pos
    weights = np.where(y_pos, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return weights


@dataclass
class LinearOvRModel:
    """Per-choice weight vectors and biases over a shared feature index."""

    choices: tuple[str, ...]
    feature_index: dict[FeatureKey, int]
    weights: np.ndarray  # (n_choices, n_features)
    biases: np.ndarray   # (n_choices,)
    hyper: Hyperparams
    convergence: dict[str, SolverInfo] = field(default_factory=dict)

    def vectorize(self, features: Iterable[FeatureKey]) -> np.ndarray:
        x = np.zeros(len(self.feature_index))
        for key in features:
            col = self.feature_index.get(key)
            if col is not None:
                x[col] = 1.0
        return x

    def decision_scores(self, features: Iterable[FeatureKey]) -> np.ndarray:
        return self.weights @ self.vectorize(features) + self.biases

    def predict(self, features: Iterable[FeatureKey]) -> str:
        scores = self.decision_scores(features)
        return self.choices[int(np.argmax(scores))]

    def coefficients(self, choice: str) -> dict[FeatureKey, float]:
        row = self.weights[self.choices.index(choice)]
        return {key: float(row[col]) for key, col in self.feature_index.items()}


def train_linear_svm(train: Dataset, hyper: Hyperparams) -> LinearOvRModel:
    """Train one binary subproblem per lexical choice present in the data.

    Choice order follows the focus word's declaration order (descending
    corpus count), which also fixes all prediction tie-breaks. Hitting
    max_iter is recorded in the convergence metadata, not raised.
    """
    labels = train.labels()
    present = set(labels)
    choices = tuple(c for c in train.choice_lemmas() if c in present)
    if len(choices) < 2:
        raise ValueError("training requires at least 2 lexical choices with data")
    X = train.matrix()
    weights = np.zeros((len(choices), train.n_features))
    biases = np.zeros(len(choices))
    convergence: dict[str, SolverInfo] = {}
    for k, choice in enumerate(choices):
        y = np.where([lab == choice for lab in labels], 1.0, -1.0)
        box = hyper.C * class_weights(labels, choice, hyper.class_weight)
        w, b, info = _solve_binary(X, y, box, hyper.tolerance, hyper.max_iter)
        weights[k] = w
        biases[k] = b
        convergence[choice] = info
    return LinearOvRModel(choices=choices, feature_index=dict(train.feature_index),
                          weights=weights, biases=biases, hyper=hyper,
                          convergence=convergence)


def model_to_obj(model: LinearOvRModel) -> dict:
    ordered = sorted(model.feature_index.items(), key=lambda kv: kv[1])
    sparse_weights = []
    for k in range(len(model.choices)):
        row = model.weights[k]
        nz = np.nonzero(row)[0]
        sparse_weights.append({int(c): float(row[c]) for c in nz})
    return {
        "choices": list(model.choices),
        "feature_index": [key.to_obj() for key, _ in ordered],
        "weights": sparse_weights,
        "biases": [float(b) for b in model.biases],
        "hyperparams": {"C": model.hyper.C, "class_weight": model.hyper.class_weight,
                        "tolerance": model.hyper.tolerance, "max_iter": model.hyper.max_iter},
        "loss": "hinge",
        "intercept": "unregularized",
        "convergence": {
            choice: {"iterations": info.iterations, "converged": info.converged,
                     "kkt_gap": info.kkt_gap, "dual_objective": info.dual_objective,
                     "primal_objective": info.primal_objective}
            for choice, info in model.convergence.items()
        },
    }


def model_from_obj(obj: dict) -> LinearOvRModel:
    keys = [FeatureKey.from_obj(entry) for entry in obj["feature_index"]]
    feature_index = {k: i for i, k in enumerate(keys)}
    choices = tuple(obj["choices"])
    weights = np.zeros((len(choices), len(keys)))
    for k, row in enumerate(obj["weights"]):
        for col, val in row.items():
            weights[k, int(col)] = float(val)
    hp = obj["hyperparams"]
    convergence = {
        choice: SolverInfo(iterations=int(v["iterations"]), converged=bool(v["converged"]),
                           kkt_gap=float(v["kkt_gap"]),
                           dual_objective=float(v["dual_objective"]),
                           primal_objective=float(v["primal_objective"]))
        for choice, v in obj.get("convergence", {}).items()
    }
    return LinearOvRModel(
        choices=choices, feature_index=feature_index, weights=weights,
        biases=np.array([float(b) for b in obj["biases"]]),
        hyper=Hyperparams(C=float(hp["C"]), class_weight=hp["class_weight"],
                          tolerance=float(hp["tolerance"]), max_iter=int(hp["max_iter"])),
        convergence=convergence,
    )
