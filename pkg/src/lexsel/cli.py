"""Command-line entry points for the whole pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis as analysis_mod
from .corpus import CorpusConfig, load_config, load_corpus
from .discovery import discover, focus_word_from_obj, focus_word_to_obj
from .evaluation import cross_validate, evaluate, shortlist_study_words
from .features import build_dataset, dataset_from_obj, dataset_to_obj, stratified_split
from .rules import GlossMap, extract_rules, load_glosses, render_rules, ruleset_to_obj
from .svm import DEFAULT_GRID, Hyperparams, model_from_obj, model_to_obj, train_linear_svm


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(obj, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _load_cli_config(path: str | None) -> CorpusConfig:
    return load_config(path) if path else CorpusConfig()


def cmd_discover(args) -> int:
    config = _load_cli_config(args.config)
    words = discover(load_corpus(args.corpus), config)
    _write_json(args.out, [focus_word_to_obj(w) for w in words])
    print(f"discovered {len(words)} focus words -> {args.out}")
    return 0


def cmd_dataset(args) -> int:
    config = _load_cli_config(args.config)
    lemma, _, upos = args.focus.partition("|")
    focus = None
    for obj in _read_json(args.focus_words):
        if obj["lemma"] == lemma and obj["upos"] == upos:
            focus = focus_word_from_obj(obj)
            break
    if focus is None:
        print(f"focus word {args.focus!r} not found in {args.focus_words}", file=sys.stderr)
        return 1
    dataset = build_dataset(load_corpus(args.corpus), focus, config)
    _write_json(args.out, dataset_to_obj(dataset))
    print(f"{len(dataset.examples)} examples, {dataset.n_features} features -> {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = dataset_from_obj(_read_json(args.dataset))
    train, test = stratified_split(dataset, train_frac=args.train_frac, seed=args.seed)
    if args.grid == "default":
        hyper = cross_validate(train, DEFAULT_GRID, k=args.folds, seed=args.seed)
    else:
        hyper = Hyperparams(C=args.C, class_weight=args.class_weight)
    model = train_linear_svm(train, hyper)
    obj = model_to_obj(model)
    obj["train_size"] = len(train.examples)
    obj["test_size"] = len(test.examples)
    obj["dataset_size"] = len(dataset.examples)
    obj["split_seed"] = args.seed
    _write_json(args.out, obj)
    print(f"trained on {len(train.examples)} examples "
          f"(C={hyper.C}, class_weight={hyper.class_weight}) -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    model = model_from_obj(_read_json(args.model))
    dataset = dataset_from_obj(_read_json(args.dataset))
    if args.split == "test" or args.split == "train":
        train, test = stratified_split(dataset, seed=args.seed)
        part = test if args.split == "test" else train
    else:
        part = dataset
    report = evaluate(model, part)
    obj = report.to_obj()
    obj["focus"] = focus_word_to_obj(dataset.focus)
    obj["n_examples"] = len(part.examples)
    obj["dataset_size"] = len(dataset.examples)
    _write_json(args.out, obj)
    print(f"accuracy {report.accuracy:.4f} on {len(part.examples)} examples -> {args.out}")
    return 0


def cmd_shortlist(args) -> int:
    from .evaluation import EvalReport

    reports = {}
    sizes = {}
    for path in sorted(Path(args.reports).glob("*.json")):
        obj = _read_json(path)
        if "focus" not in obj or "per_choice" not in obj:
            continue
        word = focus_word_from_obj(obj["focus"])
        reports[word] = EvalReport.from_obj(obj)
        sizes[word] = int(obj.get("dataset_size", obj.get("n_examples", 0)))
    kept = shortlist_study_words(reports, sizes, max_words=args.max_words)
    _write_json(args.out, [focus_word_to_obj(w) for w in kept])
    print(f"shortlisted {len(kept)} of {len(reports)} words -> {args.out}")
    return 0


def cmd_rules(args) -> int:
    model = model_from_obj(_read_json(args.model))
    glosses = load_glosses(args.gloss) if args.gloss else GlossMap()
    ruleset = extract_rules(model, focus_key=args.focus or "", n=args.top)
    obj = ruleset_to_obj(ruleset)
    obj["rendered"] = render_rules(ruleset, glosses)
    _write_json(args.out, obj)
    n_rules = sum(len(v) for v in ruleset.per_choice.values())
    print(f"extracted {n_rules} rules -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import StudyStore, create_app
    from .study import study_config_from_obj

    store = StudyStore(log_path=args.log)
    if args.study:
        store.load(study_config_from_obj(_read_json(args.study)))
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_analyze(args) -> int:
    trials = analysis_mod.load_trials(args.log)
    report = analysis_mod.rule_effect_report(trials)
    if args.per_word:
        model_acc = None
        if args.model_reports:
            model_acc = {}
            for path in sorted(Path(args.model_reports).glob("*.json")):
                obj = _read_json(path)
                if "focus" in obj and "accuracy" in obj:
                    key = f"{obj['focus']['lemma']}|{obj['focus']['upos']}"
                    model_acc[key] = float(obj["accuracy"])
        report["per_word"] = analysis_mod.per_word_effect(trials, model_accuracy=model_acc)
    _write_json(args.out, report)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as handle:
            handle.write(analysis_mod.report_to_csv(report))
    print(f"analyzed {len(trials)} trials -> {args.out}")
    return 0


def cmd_representative(args) -> int:
    from .study import apply_representative_filter, study_config_from_obj, study_config_to_obj

    config = study_config_from_obj(_read_json(args.study))
    annotations = []
    with open(args.log, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            if event.get("type") == "annotation":
                from .study import AnnotationRecord

                annotations.append(AnnotationRecord(
                    annotator=event["annotator"], word=event["word"],
                    example_id=event["example_id"], selected=event["selected"],
                    confidence=int(event["confidence"])))
    filtered, report = apply_representative_filter(config, annotations,
                                                   min_agreed=args.min_agreed)
    _write_json(args.out, study_config_to_obj(filtered))
    print(f"kept {len(filtered.words)} words "
          f"({len(report.discarded_choices)} choices, "
          f"{len(report.discarded_words)} words discarded) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsel",
                                     description="cross-lingual lexical selection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="mine focus words from an annotated corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="focus_words.json")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("dataset", help="build the labeled dataset for one focus word")
    p.add_argument("--corpus", required=True)
    p.add_argument("--focus", required=True, help='e.g. "wall|NOUN"')
    p.add_argument("--focus-words", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="dataset.json")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="train the one-vs-rest linear model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--grid", default="default", choices=["default", "none"])
    p.add_argument("--C", type=float, default=0.01)
    p.add_argument("--class-weight", default="none", choices=["none", "balanced"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a dataset split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", choices=["test", "train", "all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("shortlist", help="pick study words from evaluation reports")
    p.add_argument("--reports", required=True, help="directory of eval report JSON files")
    p.add_argument("--max-words", type=int, default=10)
    p.add_argument("--out", default="words.json")
    p.set_defaults(func=cmd_shortlist)

    p = sub.add_parser("rules", help="extract human-readable rules from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--gloss", default=None, help="TSV file: sense_id<TAB>gloss")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--focus", default=None)
    p.add_argument("--out", default="rules.json")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--study", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log", default="events.jsonl")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="fit rule-effect models on an event log")
    p.add_argument("--log", required=True)
    p.add_argument("--out", default="analysis.json")
    p.add_argument("--per-word", action="store_true")
    p.add_argument("--model-reports", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("representative",
                       help="filter study examples by unanimous annotation")
    p.add_argument("--study", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--min-agreed", type=int, default=10)
    p.add_argument("--out", default="study_filtered.json")
    p.set_defaults(func=cmd_representative)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
