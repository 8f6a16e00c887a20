"""Interactive cloze-study engine: conditions, sessions, annotation, event log.

All state transitions are deterministic functions of the study config seed
and the recorded events, so replaying the event log reconstructs the exact
state; the log is the single source of truth for the analysis stage.
"""

from __future__ import annotations

import hashlib
import json
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .features import FeatureKey
from .rules import GlossMap, RuleSet, match_rules, render_rules, ruleset_from_obj, ruleset_to_obj

CONDITION_RULES = "rules"
CONDITION_NO_RULES = "no_rules"

CONFIDENCE_LABELS = {1: "Not at all", 2: "Slightly", 3: "Somewhat", 4: "Quite", 5: "Very"}


class StudyError(ValueError):
    pass


class StaleAnswerError(StudyError):
    """The answer does not match the currently served question."""


class ClosedSessionError(StudyError):
    """The session already finished."""


@dataclass(frozen=True)
class StudyExample:
    id: str
    text: str
    focus_start: int
    focus_end: int
    choice: str
    features: frozenset[FeatureKey] = frozenset()


@dataclass(frozen=True)
class StudyChoice:
    lemma: str
    translit: str | None = None


@dataclass
class StudyWord:
    key: str
    display: str
    choices: tuple[StudyChoice, ...]
    examples: tuple[StudyExample, ...]
    rules: RuleSet | None = None
    rendered_rules: dict[str, str] = field(default_factory=dict)

    def choice_lemmas(self) -> tuple[str, ...]:
        return tuple(c.lemma for c in self.choices)

    def examples_for(self, choice: str) -> list[StudyExample]:
        return [ex for ex in self.examples if ex.choice == choice]


@dataclass
class StudyConfig:
    seed: int
    learners: tuple[str, ...]
    words: tuple[StudyWord, ...]
    per_choice_cap: int = 40
    streak_to_finish: int = 10

    def __post_init__(self):
        if self.per_choice_cap < self.streak_to_finish:
            raise StudyError("per_choice_cap must be >= streak_to_finish")
        for word in self.words:
            for choice in word.choice_lemmas():
                if not word.examples_for(choice):
                    raise StudyError(
                        f"word {word.key!r} has no example for choice {choice!r}")

    def word(self, key: str) -> StudyWord:
        for word in self.words:
            if word.key == key:
                return word
        raise KeyError(f"unknown word {key!r}")


@dataclass
class ConditionAssignment:
    conditions: dict[tuple[str, str], str]      # (learner, word key) -> condition
    word_order: dict[str, list[str]]            # learner -> word keys in session order

    def condition(self, learner: str, word_key: str) -> str:
        return self.conditions[(learner, word_key)]


def _balanced_parities(n: int, rng: np.random.Generator) -> list[int]:
    bits = [i % 2 for i in range(n)]
    rng.shuffle(bits)
    return bits


def assign_conditions(config: StudyConfig) -> ConditionAssignment:
    """Randomized but balanced condition assignment.

    Learners and words each get a balanced random parity bit; a learner sees
    rules for a word when the parities agree. Per word, each condition then
    covers at least floor(L/2) learners, and per learner the two condition
    counts differ by at most one. Word order is an independent per-learner
    permutation. Deterministic given the config seed.
    """
    if len(config.learners) < 2:
        raise StudyError("condition balance requires at least 2 learners")
    rng = np.random.default_rng(config.seed)
    learner_bits = _balanced_parities(len(config.learners), rng)
    word_bits = _balanced_parities(len(config.words), rng)
    conditions = {}
    for li, learner in enumerate(config.learners):
        for wi, word in enumerate(config.words):
            same = (learner_bits[li] + word_bits[wi]) % 2 == 0
            conditions[(learner, word.key)] = CONDITION_RULES if same else CONDITION_NO_RULES
    word_order = {}
    for learner in config.learners:
        keys = [w.key for w in config.words]
        rng.shuffle(keys)
        word_order[learner] = keys
    return ConditionAssignment(conditions=conditions, word_order=word_order)


@dataclass(frozen=True)
class TrialRecord:
    learner: str
    word: str
    example_id: str
    position: int                  # 1-based within the word's session
    word_order: int                # 1-based index of the word in the learner's sequence
    shown_choices: tuple[str, ...]
    selected: str
    correct: bool
    confidence: int
    condition: str
    timestamp: float


@dataclass(frozen=True)
class AnnotationRecord:
    annotator: str
    word: str
    example_id: str
    selected: str
    confidence: int


@dataclass
class Question:
    example: StudyExample
    position: int
    shown_choices: tuple[str, ...]


@dataclass
class Feedback:
    correct_choice: str
    correct: bool
    rules_text: str | None = None
    matched: tuple[dict, ...] = ()
    done: bool = False


class Session:
    """Question scheduler and streak tracker for one (learner, word) pair.

    Examples are served without replacement from per-choice queues that are
    shuffled once from the session seed and truncated to the cap; among
    choices with examples left, the least-served one (rotation order on
    ties) is drawn, so served counts stay within one of each other. The
    session ends when every queue is exhausted or every choice carries a
    full streak of consecutive correct answers.
    """

    def __init__(self, learner: str, word: StudyWord, condition: str, word_order: int,
                 per_choice_cap: int, streak_to_finish: int, seed: int):
        self.learner = learner
        self.word = word
        self.condition = condition
        self.word_order = word_order
        self.streak_to_finish = streak_to_finish
        self._rng = np.random.default_rng(seed)
        self.queues: dict[str, list[StudyExample]] = {}
        for choice in word.choice_lemmas():
            pool = list(word.examples_for(choice))
            order = self._rng.permutation(len(pool))
            self.queues[choice] = [pool[i] for i in order][:per_choice_cap]
        rotation = list(word.choice_lemmas())
        self._rng.shuffle(rotation)
        self.rotation = rotation
        self.served: Counter = Counter({c: 0 for c in word.choice_lemmas()})
        self.streaks: Counter = Counter({c: 0 for c in word.choice_lemmas()})
        self.position = 0
        self.pending: Question | None = None
        self.trials: list[TrialRecord] = []
        self.done = False

    def _check_done(self) -> None:
        exhausted = all(not q for q in self.queues.values())
        streaked = all(self.streaks[c] >= self.streak_to_finish
                       for c in self.word.choice_lemmas())
        if exhausted or streaked:
            self.done = True

    def next_question(self) -> tuple[Question | None, bool]:
        """Return (question, newly_drawn); question is None once done.

        Re-fetching without answering returns the same pending question, so
        a client refresh is safe.
        """
        if self.done:
            return None, False
        if self.pending is not None:
            return self.pending, False
        eligible = [c for c in self.rotation if self.queues[c]]
        if not eligible:
            self.done = True
            return None, False
        choice = min(eligible, key=lambda c: self.served[c])  # ties keep rotation order
        example = self.queues[choice].pop(0)
        self.served[choice] += 1
        self.position += 1
        shown = list(self.word.choice_lemmas())
        self._rng.shuffle(shown)
        self.pending = Question(example=example, position=self.position,
                                shown_choices=tuple(shown))
        return self.pending, True

    def record_answer(self, example_id: str, selected: str, confidence: int,
                      timestamp: float | None = None) -> tuple[TrialRecord, Feedback]:
        if self.done:
            raise ClosedSessionError(f"session for {self.word.key!r} already finished")
        if self.pending is None or self.pending.example.id != example_id:
            raise StaleAnswerError(f"example {example_id!r} is not the current question")
        if not isinstance(confidence, int) or not 1 <= confidence <= 5:
            raise StudyError("confidence must be an integer between 1 and 5")
        if selected not in self.pending.shown_choices:
            raise StudyError(f"{selected!r} is not one of the shown choices")
        example = self.pending.example
        correct = selected == example.choice
        if correct:
            self.streaks[example.choice] += 1
        else:
            self.streaks[example.choice] = 0
        trial = TrialRecord(
            learner=self.learner, word=self.word.key, example_id=example_id,
            position=self.pending.position, word_order=self.word_order,
            shown_choices=self.pending.shown_choices, selected=selected,
            correct=correct, confidence=confidence, condition=self.condition,
            timestamp=timestamp if timestamp is not None else time.time(),
        )
        self.trials.append(trial)
        self.pending = None
        self._check_done()
        feedback = Feedback(correct_choice=example.choice, correct=correct, done=self.done)
        if self.condition == CONDITION_RULES and self.word.rules is not None:
            feedback.rules_text = self.word.rendered_rules.get(example.choice, "")
            matched = match_rules(self.word.rules, example.choice, example.features)
            feedback.matched = tuple(
                {"category": r.category, "payload": list(r.feature.payload),
                 "rank": r.rank}
                for r in matched
            )
        return trial, feedback

    def state_obj(self) -> dict:
        return {
            "condition": self.condition,
            "position": self.position,
            "served": {c: self.served[c] for c in sorted(self.served)},
            "streaks": {c: self.streaks[c] for c in sorted(self.streaks)},
            "queued": {c: [ex.id for ex in q] for c, q in sorted(self.queues.items())},
            "pending": self.pending.example.id if self.pending else None,
            "answers": [
                {"example_id": t.example_id, "selected": t.selected,
                 "correct": t.correct, "confidence": t.confidence,
                 "position": t.position, "shown": list(t.shown_choices)}
                for t in self.trials
            ],
            "done": self.done,
        }


def _session_seed(study_seed: int, learner: str, word_key: str) -> int:
    digest = hashlib.sha256(f"{study_seed}:{learner}:{word_key}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class Study:
    """All sessions plus the annotation queues for one study config."""

    def __init__(self, config: StudyConfig):
        self.config = config
        self.assignment = assign_conditions(config)
        self.sessions: dict[tuple[str, str], Session] = {}
        for learner in config.learners:
            for order, word_key in enumerate(self.assignment.word_order[learner], start=1):
                word = config.word(word_key)
                self.sessions[(learner, word_key)] = Session(
                    learner=learner, word=word,
                    condition=self.assignment.condition(learner, word_key),
                    word_order=order,
                    per_choice_cap=config.per_choice_cap,
                    streak_to_finish=config.streak_to_finish,
                    seed=_session_seed(config.seed, learner, word_key),
                )
        self._annotation_queue: list[tuple[str, StudyExample]] = [
            (word.key, ex) for word in config.words for ex in word.examples
        ]
        self._annotation_pos: Counter = Counter()
        self.annotations: list[AnnotationRecord] = []

    def session(self, learner: str, word_key: str) -> Session:
        try:
            return self.sessions[(learner, word_key)]
        except KeyError:
            raise KeyError(f"no session for learner {learner!r} and word {word_key!r}")

    def learner_overview(self, learner: str) -> list[dict]:
        if learner not in self.config.learners:
            raise KeyError(f"unknown learner {learner!r}")
        out = []
        for word_key in self.assignment.word_order[learner]:
            session = self.session(learner, word_key)
            word = session.word
            out.append({
                "word": word_key,
                "display": word.display,
                "condition": session.condition,
                "choices": [
                    {"lemma": c.lemma, "translit": c.translit} for c in word.choices
                ],
                "done": session.done,
            })
        return out

    def next_annotation(self, annotator: str) -> tuple[str, StudyExample] | None:
        pos = self._annotation_pos[annotator]
        if pos >= len(self._annotation_queue):
            return None
        return self._annotation_queue[pos]

    def record_annotation(self, annotator: str, example_id: str, selected: str,
                          confidence: int) -> AnnotationRecord:
        entry = self.next_annotation(annotator)
        if entry is None:
            raise StudyError("annotation queue exhausted")
        word_key, example = entry
        if example.id != example_id:
            raise StaleAnswerError(f"example {example_id!r} is not the current annotation item")
        if not isinstance(confidence, int) or not 1 <= confidence <= 5:
            raise StudyError("confidence must be an integer between 1 and 5")
        word = self.config.word(word_key)
        if selected not in word.choice_lemmas():
            raise StudyError(f"{selected!r} is not a choice of {word_key!r}")
        record = AnnotationRecord(annotator=annotator, word=word_key,
                                  example_id=example_id, selected=selected,
                                  confidence=confidence)
        self._annotation_pos[annotator] += 1
        self.annotations.append(record)
        return record

    def snapshot(self) -> str:
        """Canonical JSON of the full mutable state, for replay comparison."""
        state = {
            "sessions": {
                f"{learner}::{word}": session.state_obj()
                for (learner, word), session in sorted(self.sessions.items())
            },
            "annotations": [
                {"annotator": a.annotator, "word": a.word, "example_id": a.example_id,
                 "selected": a.selected, "confidence": a.confidence}
                for a in self.annotations
            ],
        }
        return json.dumps(state, sort_keys=True, ensure_ascii=False)


# --- event log -------------------------------------------------------------

def trial_event(trial: TrialRecord) -> dict:
    return {
        "type": "answer", "learner": trial.learner, "word": trial.word,
        "example_id": trial.example_id, "position": trial.position,
        "word_order": trial.word_order, "shown_choices": list(trial.shown_choices),
        "selected": trial.selected, "correct": trial.correct,
        "confidence": trial.confidence, "condition": trial.condition,
        "timestamp": trial.timestamp,
    }


def trial_from_event(event: dict) -> TrialRecord:
    return TrialRecord(
        learner=event["learner"], word=event["word"], example_id=event["example_id"],
        position=int(event["position"]), word_order=int(event.get("word_order", 0)),
        shown_choices=tuple(event.get("shown_choices", ())),
        selected=event["selected"], correct=bool(event["correct"]),
        confidence=int(event["confidence"]), condition=event["condition"],
        timestamp=float(event.get("timestamp", 0.0)),
    )


class EventLog:
    """Append-only JSONL event log with an in-memory copy."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[dict] = []
        if self.path is not None and self.path.exists():
            with open(self.path, "r", encoding="utf-8") as handle:
                self.events = [json.loads(line) for line in handle if line.strip()]

    def append(self, event: dict) -> None:
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")

    def dump(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n"
                       for e in self.events)


def replay(config: StudyConfig, events: Iterable[dict]) -> Study:
    """Rebuild a Study by re-applying logged events in order.

    Serving is deterministic given the config seed, so question_served
    events are re-driven through the scheduler and answers re-recorded;
    logged timestamps are reused so the rebuilt trials match exactly.
    """
    study = Study(config)
    for event in events:
        kind = event.get("type")
        if kind == "question_served":
            session = study.session(event["learner"], event["word"])
            question, _new = session.next_question()
            if question is None or question.example.id != event["example_id"]:
                raise StudyError(
                    f"replay diverged at question {event['example_id']!r}")
        elif kind == "answer":
            session = study.session(event["learner"], event["word"])
            session.record_answer(event["example_id"], event["selected"],
                                  int(event["confidence"]),
                                  timestamp=float(event.get("timestamp", 0.0)))
        elif kind == "annotation":
            study.record_annotation(event["annotator"], event["example_id"],
                                    event["selected"], int(event["confidence"]))
    return study


# --- representative example selection ---------------------------------------

@dataclass
class FilterReport:
    kept: dict[tuple[str, str], list[str]]            # (word, choice) -> example ids
    discarded_examples: list[tuple[str, str, str]]    # (word, example, reason)
    discarded_choices: list[tuple[str, str, str]]     # (word, choice, reason)
    discarded_words: list[tuple[str, str]]            # (word, reason)


def representative_filter(config: StudyConfig, annotations: Sequence[AnnotationRecord],
                          min_agreed: int = 10) -> FilterReport:
    """Keep examples all annotators agree on, then drop thin choices/words.

    An example survives when every annotator picked the same choice and that
    choice matches the corpus-aligned label; a (word, choice) with fewer
    than ``min_agreed`` survivors is discarded, and a word left with fewer
    than two choices is discarded entirely.
    """
    by_example: dict[tuple[str, str], list[AnnotationRecord]] = defaultdict(list)
    for record in annotations:
        by_example[(record.word, record.example_id)].append(record)

    kept: dict[tuple[str, str], list[str]] = defaultdict(list)
    discarded_examples: list[tuple[str, str, str]] = []
    for word in config.words:
        for example in word.examples:
            records = by_example.get((word.key, example.id), [])
            if not records:
                discarded_examples.append((word.key, example.id, "unannotated"))
                continue
            selections = {r.selected for r in records}
            if len(selections) > 1:
                discarded_examples.append((word.key, example.id, "annotators disagree"))
                continue
            selected = selections.pop()
            if selected != example.choice:
                discarded_examples.append(
                    (word.key, example.id, "unanimous choice contradicts alignment"))
                continue
            kept[(word.key, example.choice)].append(example.id)

    discarded_choices: list[tuple[str, str, str]] = []
    discarded_words: list[tuple[str, str]] = []
    for word in config.words:
        surviving = []
        for choice in word.choice_lemmas():
            ids = kept.get((word.key, choice), [])
            if len(ids) < min_agreed:
                discarded_choices.append(
                    (word.key, choice, f"only {len(ids)} agreed examples (< {min_agreed})"))
                kept.pop((word.key, choice), None)
            else:
                surviving.append(choice)
        if len(surviving) < 2:
            discarded_words.append((word.key, f"only {len(surviving)} choices left"))
            for choice in surviving:
                kept.pop((word.key, choice), None)
    return FilterReport(kept=dict(kept), discarded_examples=discarded_examples,
                        discarded_choices=discarded_choices, discarded_words=discarded_words)


def apply_representative_filter(config: StudyConfig, annotations: Sequence[AnnotationRecord],
                                min_agreed: int = 10) -> tuple[StudyConfig, FilterReport]:
    """Produce the filtered study config that the learner study runs on."""
    report = representative_filter(config, annotations, min_agreed)
    discarded_word_keys = {w for w, _ in report.discarded_words}
    words = []
    for word in config.words:
        if word.key in discarded_word_keys:
            continue
        surviving_choices = tuple(
            c for c in word.choices if (word.key, c.lemma) in report.kept)
        kept_ids = {ex_id for c in surviving_choices
                    for ex_id in report.kept[(word.key, c.lemma)]}
        words.append(replace(
            word,
            choices=surviving_choices,
            examples=tuple(ex for ex in word.examples if ex.id in kept_ids),
        ))
    filtered = StudyConfig(seed=config.seed, learners=config.learners,
                           words=tuple(words), per_choice_cap=config.per_choice_cap,
                           streak_to_finish=config.streak_to_finish)
    return filtered, report


# --- Fleiss' kappa -----------------------------------------------------------

def fleiss_kappa(example_ratings: Sequence[Sequence[str]]) -> float:
    """Chance-corrected multi-rater agreement over categorical ratings.

    ``example_ratings`` holds one inner sequence of selected categories per
    example; every example must be rated by the same number (>= 2) of
    raters. When expected chance agreement is 1 (a single category carries
    all mass) the statistic degenerates to 1 by convention.
    """
    if not example_ratings:
        raise ValueError("no ratings given")
    n_raters = len(example_ratings[0])
    if n_raters < 2:
        raise ValueError("fleiss kappa requires at least 2 raters per example")
    if any(len(r) != n_raters for r in example_ratings):
        raise ValueError("every example must be rated by the same number of raters")
    categories = sorted({c for ratings in example_ratings for c in ratings})
    n_items = len(example_ratings)
    table = np.zeros((n_items, len(categories)))
    col = {c: k for k, c in enumerate(categories)}
    for row, ratings in enumerate(example_ratings):
        for c in ratings:
            table[row, col[c]] += 1
    p_cat = table.sum(axis=0) / (n_items * n_raters)
    p_expected = float((p_cat ** 2).sum())
    if p_expected >= 1.0:
        return 1.0
    p_item = ((table ** 2).sum(axis=1) - n_raters) / (n_raters * (n_raters - 1))
    p_mean = float(p_item.mean())
    return (p_mean - p_expected) / (1.0 - p_expected)


# --- config (de)serialization -----------------------------------------------

def study_config_to_obj(config: StudyConfig) -> dict:
    return {
        "seed": config.seed,
        "learners": list(config.learners),
        "per_choice_cap": config.per_choice_cap,
        "streak_to_finish": config.streak_to_finish,
        "words": [
            {
                "word": word.key,
                "display": word.display,
                "choices": [{"lemma": c.lemma, "translit": c.translit}
                            for c in word.choices],
                "rules": ruleset_to_obj(word.rules) if word.rules else None,
                "rendered_rules": word.rendered_rules or None,
                "examples": [
                    {"id": ex.id, "text": ex.text, "focus_start": ex.focus_start,
                     "focus_end": ex.focus_end, "choice": ex.choice,
                     "features": [k.to_obj() for k in sorted(ex.features)]}
                    for ex in word.examples
                ],
            }
            for word in config.words
        ],
    }


def study_config_from_obj(obj: dict) -> StudyConfig:
    words = []
    for wobj in obj["words"]:
        rules = ruleset_from_obj(wobj["rules"]) if wobj.get("rules") else None
        rendered = wobj.get("rendered_rules")
        if rules is not None and not rendered:
            rendered = render_rules(rules, GlossMap())
        words.append(StudyWord(
            key=wobj["word"],
            display=wobj.get("display", wobj["word"].split("|")[0]),
            choices=tuple(StudyChoice(lemma=c["lemma"], translit=c.get("translit"))
                          for c in wobj["choices"]),
            examples=tuple(
                StudyExample(
                    id=ex["id"], text=ex["text"],
                    focus_start=int(ex["focus_start"]), focus_end=int(ex["focus_end"]),
                    choice=ex["choice"],
                    features=frozenset(FeatureKey.from_obj(k)
                                       for k in ex.get("features", ())),
                )
                for ex in wobj["examples"]
            ),
            rules=rules,
            rendered_rules=rendered or {},
        ))
    return StudyConfig(
        seed=int(obj["seed"]),
        learners=tuple(obj["learners"]),
        words=tuple(words),
        per_choice_cap=int(obj.get("per_choice_cap", 40)),
        streak_to_finish=int(obj.get("streak_to_finish", 10)),
    )
