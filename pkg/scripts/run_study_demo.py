#!/usr/bin/env python3
"""Simulate a full learner study against the HTTP service and analyze it.

Builds a study config from the synthetic pipeline, scripts learners whose
error rate drops when they hold the rules, drives them through the HTTP
API in-process, then fits the rule-effect models on the produced log.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from lexsel import analysis
from lexsel.discovery import discover
from lexsel.evaluation import cross_validate
from lexsel.features import build_dataset
from lexsel.rules import GlossMap, extract_rules, render_rules
from lexsel.service import StudyStore, create_app
from lexsel.study import StudyChoice, StudyConfig, StudyExample, StudyWord, study_config_to_obj
from lexsel.svm import DEFAULT_GRID, train_linear_svm
from lexsel.synth import make_planted_corpus, planted_corpus_config


def build_study(seed: int) -> StudyConfig:
    config = planted_corpus_config()
    corpus = make_planted_corpus(seed=seed)
    sentences = {pair.id: pair for pair in corpus}
    words = []
    for focus in discover(corpus, config):
        dataset = build_dataset(corpus, focus, config)
        hyper = cross_validate(dataset, DEFAULT_GRID, k=5, seed=seed)
        model = train_linear_svm(dataset, hyper)
        rules = extract_rules(model, focus_key=focus.key, n=20)
        examples = []
        for ex in dataset.examples:
            pair = sentences[ex.sentence_id]
            text = " ".join(t.surface for t in pair.src)
            start = sum(len(t.surface) + 1 for t in pair.src[:ex.focus_index])
            examples.append(StudyExample(
                id=f"{ex.sentence_id}:{ex.focus_index}", text=text,
                focus_start=start,
                focus_end=start + len(pair.src[ex.focus_index].surface),
                choice=ex.label, features=ex.features))
        words.append(StudyWord(
            key=focus.key, display=focus.lemma,
            choices=tuple(StudyChoice(lemma=c) for c in focus.choice_lemmas()),
            examples=tuple(examples), rules=rules,
            rendered_rules=render_rules(rules, GlossMap())))
    return StudyConfig(seed=seed, learners=tuple(f"learner{i}" for i in range(6)),
                       words=tuple(words), per_choice_cap=20, streak_to_finish=8)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--log", default="study_events.jsonl")
    parser.add_argument("--out", default="study_analysis.json")
    args = parser.parse_args()

    study_config = build_study(args.seed)
    log_path = Path(args.log)
    if log_path.exists():
        log_path.unlink()
    store = StudyStore(log_path=log_path)
    client = TestClient(create_app(store))
    assert client.post("/studies",
                       json=study_config_to_obj(study_config)).status_code == 201

    rng = np.random.default_rng(args.seed)
    for learner in study_config.learners:
        overview = client.get(f"/sessions/{learner}").json()["words"]
        for entry in overview:
            word_key = entry["word"]
            p_correct = 0.85 if entry["condition"] == "rules" else 0.6
            while True:
                q = client.get(f"/sessions/{learner}/{word_key}/next").json()
                if q.get("done"):
                    break
                answer_key = next(
                    ex.choice for w in study_config.words if w.key == word_key
                    for ex in w.examples if ex.id == q["example_id"])
                if rng.random() < p_correct:
                    choice = answer_key
                else:
                    choice = next(c["lemma"] for c in q["choices"]
                                  if c["lemma"] != answer_key)
                confidence = int(rng.integers(3, 6)) if choice == answer_key \
                    else int(rng.integers(1, 4))
                client.post(f"/sessions/{learner}/{word_key}/answer",
                            json={"example_id": q["example_id"], "choice": choice,
                                  "confidence": confidence})

    trials = analysis.load_trials(log_path)
    report = analysis.rule_effect_report(trials, n_list=(5, 10, 20, None))
    report["per_word"] = analysis.per_word_effect(trials, n=20)
    Path(args.out).write_text(json.dumps(report, indent=2), encoding="utf-8")

    print(f"{len(trials)} trials logged to {log_path}\n")
    print(f"{'n':>5}{'intercept':>11}{'beta':>8}{'p':>10}  stars")
    for row in report["table"]:
        print(f"{str(row['n']):>5}{row['intercept']:>11.3f}{row['beta']:>8.3f}"
              f"{row['p_value']:>10.3g}  {row['stars']}")
    print(f"\nfull report -> {args.out}")


if __name__ == "__main__":
    main()
