"""Learning-curve aggregation and rule-effect estimation from trial logs.

The response modeled per (learner, word) cell is the accuracy proportion
over the first n attempted examples (or mean confidence restricted to
correct answers); the rule-presence indicator is the fixed effect and
learner, word and presentation order act as random intercepts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lme import LMEError, LMEFit, fit_lme, significance_stars
from .study import CONDITION_RULES, TrialRecord, trial_from_event

RESPONSE_ACCURACY = "accuracy"
RESPONSE_CONFIDENCE = "confidence_on_correct"

DEFAULT_N_LIST: tuple[int | None, ...] = (5, 10, 20, 30, 40, 50, None)


@dataclass(frozen=True)
class LMESpec:
    response: str = RESPONSE_ACCURACY
    random_intercepts: tuple[str, ...] = ("learner", "word", "position")


@dataclass(frozen=True)
class CellAggregate:
    """Per-(learner, word) summary over the first n attempted examples."""

    learner: str
    word: str
    condition: str
    word_order: int
    n_trials: int
    accuracy: float
    confidence_on_correct: float | None


def load_trials(path: str | Path) -> list[TrialRecord]:
    """Read answer events out of a JSONL event log."""
    trials = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            if event.get("type") == "answer":
                trials.append(trial_from_event(event))
    return trials


def first_n_slice(trials: Sequence[TrialRecord], n: int | None) -> list[CellAggregate]:
    """Aggregate each (learner, word) cell over positions <= n.

    ``n=None`` uses every trial; cells with fewer than n trials use all they
    have. Confidence averages only over correct answers and is None when a
    cell has none.
    """
    cells: dict[tuple[str, str], list[TrialRecord]] = {}
    for trial in trials:
        cells.setdefault((trial.learner, trial.word), []).append(trial)
    out = []
    for (learner, word), records in sorted(cells.items()):
        records = sorted(records, key=lambda t: t.position)
        taken = records if n is None else [t for t in records if t.position <= n]
        correct = [t for t in taken if t.correct]
        confidences = [t.confidence for t in correct]
        out.append(CellAggregate(
            learner=learner,
            word=word,
            condition=records[0].condition,
            word_order=records[0].word_order,
            n_trials=len(taken),
            accuracy=sum(t.correct for t in taken) / len(taken),
            confidence_on_correct=(sum(confidences) / len(confidences)
                                   if confidences else None),
        ))
    return out


def _design(cells: Sequence[CellAggregate], spec: LMESpec):
    rows = []
    for cell in cells:
        if spec.response == RESPONSE_CONFIDENCE:
            if cell.confidence_on_correct is None:
                continue
            response = cell.confidence_on_correct
        else:
            response = cell.accuracy
        rows.append((response, cell))
    if not rows:
        raise LMEError("no usable rows for the requested response")
    conditions = {cell.condition for _, cell in rows}
    if len(conditions) < 2:
        raise LMEError("fixed effect not estimable: only one condition present")
    y = np.array([r for r, _ in rows])
    X = np.column_stack([
        np.ones(len(rows)),
        np.array([1.0 if cell.condition == CONDITION_RULES else 0.0 for _, cell in rows]),
    ])
    groups: dict[str, list] = {}
    for name in spec.random_intercepts:
        if name == "learner":
            labels = [cell.learner for _, cell in rows]
        elif name == "word":
            labels = [cell.word for _, cell in rows]
        elif name == "position":
            labels = [cell.word_order for _, cell in rows]
        else:
            raise LMEError(f"unknown random grouping {name!r}")
        if len(set(labels)) >= 2:
            groups[name] = labels
    return y, X, groups


def fit_rule_effect(cells: Sequence[CellAggregate], spec: LMESpec) -> LMEFit:
    y, X, groups = _design(cells, spec)
    return fit_lme(y, X, groups)


def _curves(cells: Sequence[CellAggregate]) -> dict:
    out = {}
    for condition in sorted({c.condition for c in cells}):
        members = [c for c in cells if c.condition == condition]
        confidences = [c.confidence_on_correct for c in members
                       if c.confidence_on_correct is not None]
        out[condition] = {
            "accuracy": float(np.mean([c.accuracy for c in members])),
            "confidence_on_correct": (float(np.mean(confidences))
                                      if confidences else None),
            "cells": len(members),
        }
    return out


def rule_effect_report(trials: Sequence[TrialRecord],
                       n_list: Sequence[int | None] = DEFAULT_N_LIST,
                       spec: LMESpec = LMESpec()) -> dict:
    """One LME fit per first-n slice plus the learning-curve points.

    The output table mirrors (n, intercept, rule effect, p, stars) for the
    accuracy response, with a parallel confidence fit where estimable.
    """
    if not trials:
        raise LMEError("no trials to analyze")
    rows = []
    curves = {}
    for n in n_list:
        cells = first_n_slice(trials, n)
        label = "all" if n is None else n
        fit = fit_rule_effect(cells, spec)
        entry = {
            "n": label,
            "intercept": fit.intercept,
            "beta": fit.effect,
            "se": fit.effect_se,
            "p_value": fit.p_value,
            "stars": significance_stars(fit.p_value),
            "loglik": fit.loglik,
            "variance_components": fit.variance_components,
            "residual_variance": fit.residual_variance,
        }
        try:
            conf_fit = fit_rule_effect(cells, LMESpec(response=RESPONSE_CONFIDENCE,
                                                      random_intercepts=spec.random_intercepts))
            entry["confidence_beta"] = conf_fit.effect
            entry["confidence_p_value"] = conf_fit.p_value
        except LMEError:
            entry["confidence_beta"] = None
            entry["confidence_p_value"] = None
        rows.append(entry)
        curves[str(label)] = _curves(cells)
    return {"table": rows, "curves": curves, "n_trials": len(trials)}


def per_word_effect(trials: Sequence[TrialRecord], n: int = 20,
                    model_accuracy: Mapping[str, float] | None = None) -> dict[str, dict]:
    """Per-word rule effect after the first n examples, learner intercept only.

    Pairs each word's effect with the average no-rules learner accuracy and,
    when provided, the lexical model's test accuracy for that word.
    """
    cells = first_n_slice(trials, n)
    by_word: dict[str, list[CellAggregate]] = {}
    for cell in cells:
        by_word.setdefault(cell.word, []).append(cell)
    out = {}
    for word in sorted(by_word):
        members = by_word[word]
        conditions = {c.condition for c in members}
        if len(conditions) < 2:
            raise LMEError(f"word {word!r} lacks both conditions")
        fit = fit_rule_effect(members, LMESpec(random_intercepts=("learner",)))
        baseline = [c.accuracy for c in members if c.condition != CONDITION_RULES]
        out[word] = {
            "beta": fit.effect,
            "se": fit.effect_se,
            "p_value": fit.p_value,
            "baseline_accuracy": float(np.mean(baseline)),
            "model_accuracy": (float(model_accuracy[word])
                               if model_accuracy and word in model_accuracy else None),
        }
    return out


def report_to_csv(report: dict) -> str:
    """Flatten the report table for spreadsheet use."""
    lines = ["n,intercept,beta,se,p_value,stars"]
    for row in report["table"]:
        lines.append(f"{row['n']},{row['intercept']:.6f},{row['beta']:.6f},"
                     f"{row['se']:.6f},{row['p_value']:.6g},{row['stars']}")
    return "\n".join(lines) + "\n"
