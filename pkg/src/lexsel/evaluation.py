"""Baselines, evaluation reports, cross-validated model selection, shortlisting."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .discovery import FocusWord
from .features import Dataset
from .svm import Hyperparams, train_linear_svm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrequencyBaseline:
    """Predicts the majority training label regardless of context."""

    label: str
    choices: tuple[str, ...]

    def predict(self, features) -> str:
        return self.label


def frequency_baseline(train: Dataset) -> FrequencyBaseline:
    counts = train.label_counts()
    if not train.examples:
        raise ValueError("cannot fit a baseline on an empty dataset")
    choices = train.choice_lemmas()
    label = max(choices, key=lambda c: counts.get(c, 0))  # max() keeps first on ties
    return FrequencyBaseline(label=label, choices=choices)


@dataclass(frozen=True)
class ChoiceScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    accuracy: float
    choices: tuple[str, ...]
    per_choice: dict[str, ChoiceScores]
    confusion: np.ndarray  # rows = true choice, cols = predicted choice

    def to_obj(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "choices": list(self.choices),
            "per_choice": {
                c: {"precision": s.precision, "recall": s.recall,
                    "f1": s.f1, "support": s.support}
                for c, s in self.per_choice.items()
            },
            "confusion": self.confusion.tolist(),
        }

    @staticmethod
    def from_obj(obj: dict) -> "EvalReport":
        return EvalReport(
            accuracy=float(obj["accuracy"]),
            choices=tuple(obj["choices"]),
            per_choice={
                c: ChoiceScores(precision=float(s["precision"]), recall=float(s["recall"]),
                                f1=float(s["f1"]), support=int(s["support"]))
                for c, s in obj["per_choice"].items()
            },
            confusion=np.array(obj["confusion"], dtype=int),
        )


def evaluate(predictor, test: Dataset) -> EvalReport:
    """Accuracy, per-choice precision/recall/F1 and the confusion matrix.

    Scores with a zero denominator are reported as 0.
    """
    if not test.examples:
        raise ValueError("cannot evaluate on an empty dataset")
    choices = test.choice_lemmas()
    index = {c: k for k, c in enumerate(choices)}
    confusion = np.zeros((len(choices), len(choices)), dtype=int)
    for ex in test.examples:
        predicted = predictor.predict(ex.features)
        confusion[index[ex.label], index[predicted]] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion)) / total
    per_choice = {}
    for c, k in index.items():
        tp = confusion[k, k]
        support = int(confusion[k].sum())
        predicted = int(confusion[:, k].sum())
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
        per_choice[c] = ChoiceScores(precision=float(precision), recall=float(recall),
                                     f1=float(f1), support=support)
    return EvalReport(accuracy=accuracy, choices=choices,
                      per_choice=per_choice, confusion=confusion)


def stratified_folds(dataset: Dataset, k: int, seed: int) -> list[int]:
    """Fold id per example; per-choice shuffled round-robin assignment."""
    by_label: dict[str, list[int]] = {}
    for idx, ex in enumerate(dataset.examples):
        by_label.setdefault(ex.label, []).append(idx)
    rng = np.random.default_rng(seed)
    folds = [0] * len(dataset.examples)
    for label in sorted(by_label):
        indices = list(by_label[label])
        if len(indices) < k:
            raise ValueError(f"choice {label!r} has fewer than {k} examples")
        rng.shuffle(indices)
        for pos, idx in enumerate(indices):
            folds[idx] = pos % k
    return folds


def _default_tie_key(hyper, position: int):
    if isinstance(hyper, Hyperparams):
        return (hyper.C, 0 if hyper.class_weight == "none" else 1)
    return (position,)


def cross_validate(dataset: Dataset, grid: Sequence, k: int = 5, seed: int = 0,
                   trainer: Callable = train_linear_svm,
                   tie_key: Callable | None = None):
    """Pick the grid point with the highest mean validation accuracy.

    Stratified k-fold; accuracy ties prefer smaller C then unweighted
    classes (or earlier grid position for non-SVM hyperparameter types).
    """
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    if len(grid) == 1:
        return grid[0]
    tie_key = tie_key or _default_tie_key
    folds = stratified_folds(dataset, k, seed)
    scored = []
    for position, hyper in enumerate(grid):
        accuracies = []
        for fold in range(k):
            train_ex = [ex for ex, f in zip(dataset.examples, folds) if f != fold]
            valid_ex = [ex for ex, f in zip(dataset.examples, folds) if f == fold]
            model = trainer(Dataset(focus=dataset.focus, examples=train_ex), hyper)
            correct = sum(model.predict(ex.features) == ex.label for ex in valid_ex)
            accuracies.append(correct / len(valid_ex))
        scored.append((-float(np.mean(accuracies)), tie_key(hyper, position), hyper))
    scored.sort(key=lambda entry: (entry[0], entry[1]))
    return scored[0][2]


def shortlist_study_words(reports: dict[FocusWord, EvalReport],
                          dataset_sizes: dict[FocusWord, int],
                          max_words: int = 10) -> list[FocusWord]:
    """Words where every choice scores F1 > 0.5, largest datasets first."""
    ordered = sorted(reports, key=lambda w: (-dataset_sizes.get(w, 0), w.lemma, w.upos))
    kept = []
    for word in ordered:
        report = reports[word]
        if all(report.per_choice[c].f1 > 0.5 for c in word.choice_lemmas()):
            kept.append(word)
    if not kept:
        logger.warning("no focus word passed the per-choice F1 > 0.5 filter")
    return kept[:max_words]
