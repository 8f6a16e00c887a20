#!/usr/bin/env python3
"""End-to-end demo on the synthetic corpus: discover, train, evaluate, extract.

Prints a per-word comparison of the frequency baseline, the decision tree
and the linear model, then the rendered rules of the best word.
"""

import argparse

from lexsel.discovery import discover
from lexsel.evaluation import cross_validate, evaluate, frequency_baseline
from lexsel.features import build_dataset, stratified_split
from lexsel.rules import GlossMap, extract_rules, render_rules
from lexsel.svm import DEFAULT_GRID, train_linear_svm
from lexsel.synth import make_planted_corpus, planted_corpus_config
from lexsel.tree import DEFAULT_TREE_GRID, train_decision_tree


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    config = planted_corpus_config()
    corpus = make_planted_corpus(seed=args.seed)
    words = discover(corpus, config)
    print(f"discovered {len(words)} focus words: {[w.key for w in words]}\n")

    print(f"{'word':<16}{'n':>5}{'baseline':>10}{'dtree':>8}{'svm':>8}")
    results = {}
    for word in words:
        dataset = build_dataset(corpus, word, config)
        train, test = stratified_split(dataset, seed=args.seed)
        hyper = cross_validate(train, DEFAULT_GRID, k=5, seed=args.seed)
        svm = train_linear_svm(train, hyper)
        tree_hyper = cross_validate(train, DEFAULT_TREE_GRID, k=5, seed=args.seed,
                                    trainer=train_decision_tree)
        tree = train_decision_tree(train, tree_hyper)
        base = frequency_baseline(train)
        accs = {name: evaluate(model, test).accuracy
                for name, model in (("baseline", base), ("dtree", tree), ("svm", svm))}
        results[word.key] = (svm, dataset)
        print(f"{word.key:<16}{len(dataset.examples):>5}"
              f"{accs['baseline']:>10.3f}{accs['dtree']:>8.3f}{accs['svm']:>8.3f}")

    best_key = max(results, key=lambda k: len(results[k][1].examples))
    model, _ = results[best_key]
    rules = extract_rules(model, focus_key=best_key, n=20)
    print(f"\nrules for {best_key}:")
    for choice, text in render_rules(rules, GlossMap()).items():
        print(f"\n  == {choice} ==")
        for line in text.splitlines():
            print(f"  {line}")


if __name__ == "__main__":
    main()
