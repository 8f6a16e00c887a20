"""HTTP front of the study engine; JSON bodies, event-sourced mutations.

One study is active per server. All mutating handlers funnel through a
single lock so the event log has one ordered writer.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .study import (
    CONDITION_RULES,
    ClosedSessionError,
    EventLog,
    Feedback,
    Session,
    StaleAnswerError,
    Study,
    StudyConfig,
    StudyError,
    study_config_from_obj,
    study_config_to_obj,
    trial_event,
)


class AnswerBody(BaseModel):
    example_id: str
    choice: str
    confidence: int


class StudyStore:
    def __init__(self, log_path: str | Path | None = None):
        self.study: Study | None = None
        self.log = EventLog(log_path)
        self.lock = threading.Lock()

    def require_study(self) -> Study:
        if self.study is None:
            raise HTTPException(status_code=404, detail="no active study")
        return self.study

    def load(self, config: StudyConfig) -> None:
        self.study = Study(config)
        digest = hashlib.sha256(
            repr(study_config_to_obj(config)).encode()).hexdigest()[:16]
        self.log.append({"type": "study_created", "seed": config.seed,
                         "learners": list(config.learners),
                         "words": [w.key for w in config.words],
                         "config_sha": digest})


def _question_payload(session: Session, question) -> dict:
    word = session.word
    translit = {c.lemma: c.translit for c in word.choices}
    return {
        "done": False,
        "example_id": question.example.id,
        "text": question.example.text,
        "focus_start": question.example.focus_start,
        "focus_end": question.example.focus_end,
        "position": question.position,
        "condition": session.condition,
        "choices": [{"lemma": lemma, "translit": translit.get(lemma)}
                    for lemma in question.shown_choices],
    }


def _feedback_payload(feedback: Feedback) -> dict:
    payload = {
        "correct_choice": feedback.correct_choice,
        "correct": feedback.correct,
        "done": feedback.done,
    }
    if feedback.rules_text is not None:
        payload["rules_text"] = feedback.rules_text
        payload["matched_rules"] = list(feedback.matched)
    return payload


def _replayed_feedback(session: Session, example_id: str, body: AnswerBody) -> dict | None:
    """Stored feedback for an idempotent retry of the latest answer."""
    if not session.trials:
        return None
    last = session.trials[-1]
    if (last.example_id != example_id or last.selected != body.choice
            or last.confidence != body.confidence):
        return None
    example = next(ex for ex in session.word.examples if ex.id == example_id)
    feedback = Feedback(correct_choice=example.choice, correct=last.correct,
                        done=session.done)
    if session.condition == CONDITION_RULES and session.word.rules is not None:
        from .rules import match_rules

        feedback.rules_text = session.word.rendered_rules.get(example.choice, "")
        feedback.matched = tuple(
            {"category": r.category, "payload": list(r.feature.payload), "rank": r.rank}
            for r in match_rules(session.word.rules, example.choice, example.features)
        )
    return _feedback_payload(feedback)


def create_app(store: StudyStore | None = None) -> FastAPI:
    store = store if store is not None else StudyStore()
    app = FastAPI(title="lexsel study service")
    app.state.store = store
    # the browser client is served separately from the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.post("/studies", status_code=201)
    def create_study(config: dict):
        with store.lock:
            if store.study is not None:
                raise HTTPException(status_code=409, detail="a study is already active")
            try:
                store.load(study_config_from_obj(config))
            except (StudyError, KeyError, TypeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        study = store.study
        return {"learners": list(study.config.learners),
                "words": [w.key for w in study.config.words]}

    @app.get("/sessions/{learner}")
    def learner_sessions(learner: str):
        study = store.require_study()
        try:
            return {"learner": learner, "words": study.learner_overview(learner)}
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/sessions/{learner}/{word}/next")
    def next_question(learner: str, word: str):
        study = store.require_study()
        with store.lock:
            try:
                session = study.session(learner, word)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            question, newly_drawn = session.next_question()
            if question is None:
                return {"done": True}
            if newly_drawn:
                store.log.append({"type": "question_served", "learner": learner,
                                  "word": word, "example_id": question.example.id,
                                  "position": question.position})
            return _question_payload(session, question)

    @app.post("/sessions/{learner}/{word}/answer")
    def answer(learner: str, word: str, body: AnswerBody):
        study = store.require_study()
        with store.lock:
            try:
                session = study.session(learner, word)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            try:
                trial, feedback = session.record_answer(
                    body.example_id, body.choice, body.confidence)
            except StaleAnswerError as exc:
                replayed = _replayed_feedback(session, body.example_id, body)
                if replayed is not None:
                    return replayed
                raise HTTPException(status_code=409, detail=str(exc))
            except ClosedSessionError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except StudyError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            store.log.append(trial_event(trial))
            return _feedback_payload(feedback)

    @app.get("/rules/{word}")
    def word_rules(word: str, learner: str | None = None):
        study = store.require_study()
        try:
            study_word = study.config.word(word)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if study_word.rules is None:
            raise HTTPException(status_code=404, detail=f"no rules for {word!r}")
        if learner is not None:
            condition = study.assignment.conditions.get((learner, word))
            if condition != CONDITION_RULES:
                raise HTTPException(status_code=403,
                                    detail=f"{learner!r} studies {word!r} without rules")
        return {"word": word,
                "choices": list(study_word.choice_lemmas()),
                "rendered": study_word.rendered_rules}

    @app.get("/annotate/{annotator}/next")
    def next_annotation(annotator: str):
        study = store.require_study()
        with store.lock:
            entry = study.next_annotation(annotator)
            if entry is None:
                return {"done": True}
            word_key, example = entry
            study_word = study.config.word(word_key)
            return {
                "done": False,
                "word": word_key,
                "example_id": example.id,
                "text": example.text,
                "focus_start": example.focus_start,
                "focus_end": example.focus_end,
                "choices": [{"lemma": c.lemma, "translit": c.translit}
                            for c in study_word.choices],
            }

    @app.post("/annotate/{annotator}/answer")
    def record_annotation(annotator: str, body: AnswerBody):
        study = store.require_study()
        with store.lock:
            try:
                record = study.record_annotation(annotator, body.example_id,
                                                 body.choice, body.confidence)
            except StaleAnswerError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except StudyError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            store.log.append({"type": "annotation", "annotator": record.annotator,
                              "word": record.word, "example_id": record.example_id,
                              "selected": record.selected,
                              "confidence": record.confidence})
            return {"recorded": True}

    @app.get("/export/events")
    def export_events():
        store.require_study()
        return PlainTextResponse(store.log.dump(), media_type="application/x-ndjson")

    return app
