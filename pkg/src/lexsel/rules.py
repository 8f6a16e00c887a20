"""Turn trained linear models into grouped, human-readable usage rules.

A rule is one positively weighted feature of a choice's sub-model. Bigram
features render as "Short phrases", lemma features as "Words" and sense
features as "Concepts" with their dictionary gloss.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .features import KIND_BIGRAM, KIND_LEMMA, KIND_SENSE, FeatureKey
from .svm import LinearOvRModel

CATEGORY_OF_KIND = {
    KIND_BIGRAM: "Short phrases",
    KIND_LEMMA: "Words",
    KIND_SENSE: "Concepts",
}
CATEGORY_ORDER = ("Short phrases", "Words", "Concepts")


@dataclass(frozen=True)
class Rule:
    choice: str
    feature: FeatureKey
    weight: float
    rank: int

    @property
    def category(self) -> str:
        return CATEGORY_OF_KIND[self.feature.kind]


@dataclass
class RuleSet:
    focus_key: str
    choices: tuple[str, ...]
    per_choice: dict[str, list[Rule]] = field(default_factory=dict)

    def rules_for(self, choice: str) -> list[Rule]:
        if choice not in self.per_choice:
            raise KeyError(f"unknown lexical choice {choice!r}")
        return self.per_choice[choice]


class GlossMap(dict):
    """sense id -> gloss; lookups fall back to the sense id itself."""

    def gloss(self, sense_id: str) -> str:
        return self.get(sense_id, sense_id)


def load_glosses(path: str | Path) -> GlossMap:
    """Read a TSV gloss file: ``sense_id<TAB>gloss`` per line."""
    glosses = GlossMap()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            sense_id, _, gloss = line.partition("\t")
            glosses[sense_id] = gloss
    return glosses


def extract_rules(model: LinearOvRModel, focus_key: str = "", n: int = 20) -> RuleSet:
    """Top-n positively weighted features per choice, ranked by weight.

    Negative weights are evidence against a choice and never become rules;
    weight ties break lexicographically on the feature payload.
    """
    per_choice: dict[str, list[Rule]] = {}
    for choice in model.choices:
        coeffs = model.coefficients(choice)
        positive = [(key, w) for key, w in coeffs.items() if w > 0]
        positive.sort(key=lambda kv: (-kv[1], kv[0].payload, kv[0].kind))
        per_choice[choice] = [
            Rule(choice=choice, feature=key, weight=w, rank=rank)
            for rank, (key, w) in enumerate(positive[:n], start=1)
        ]
    return RuleSet(focus_key=focus_key, choices=model.choices, per_choice=per_choice)


def _render_rule(rule: Rule, glosses: GlossMap) -> str:
    kind = rule.feature.kind
    if kind == KIND_BIGRAM:
        first, second = rule.feature.payload
        return f"('{first}', '{second}')"
    if kind == KIND_LEMMA:
        return rule.feature.payload[0]
    sense_id = rule.feature.payload[0]
    lemma = sense_id.split(".")[0]
    return f"'{lemma}' as in {glosses.gloss(sense_id)} ({sense_id})"


def render_rules(rules: RuleSet, glosses: GlossMap | None = None) -> dict[str, str]:
    """Per choice, one text block with up to three category lines."""
    glosses = glosses if glosses is not None else GlossMap()
    rendered: dict[str, str] = {}
    for choice in rules.choices:
        lines = []
        for category in CATEGORY_ORDER:
            members = [r for r in rules.per_choice.get(choice, []) if r.category == category]
            if not members:
                continue
            sep = "; " if category == "Concepts" else ", "
            body = sep.join(_render_rule(r, glosses) for r in members)
            lines.append(f"{category}: {body}")
        rendered[choice] = "\n".join(lines)
    return rendered


_SENSE_ID = re.compile(r"\(([^()\s]+\.[a-z]\.\d+)\)")
_PHRASE = re.compile(r"\('([^']*)', '([^']*)'\)")


def parse_rendered(text: str) -> list[tuple[str, tuple[str, ...]]]:
    """Recover (category, payload) pairs from a rendered rule block."""
    out: list[tuple[str, tuple[str, ...]]] = []
    for line in text.splitlines():
        category, _, body = line.partition(": ")
        if category == "Short phrases":
            for first, second in _PHRASE.findall(body):
                out.append((category, (first, second)))
        elif category == "Words":
            for word in body.split(", "):
                out.append((category, (word,)))
        elif category == "Concepts":
            for sense_id in _SENSE_ID.findall(body):
                out.append((category, (sense_id,)))
    return out


def match_rules(rules: RuleSet, choice: str, features: Iterable[FeatureKey]) -> list[Rule]:
    """The rules of ``choice`` whose feature occurs in the example, rank order."""
    feature_set = set(features)
    return [r for r in rules.rules_for(choice) if r.feature in feature_set]


def ruleset_to_obj(rules: RuleSet) -> dict:
    return {
        "focus": rules.focus_key,
        "choices": list(rules.choices),
        "per_choice": {
            choice: [
                {"category": r.category, "kind": r.feature.kind,
                 "payload": list(r.feature.payload), "weight": r.weight, "rank": r.rank}
                for r in members
            ]
            for choice, members in rules.per_choice.items()
        },
    }


def ruleset_from_obj(obj: dict) -> RuleSet:
    per_choice = {
        choice: [
            Rule(choice=choice,
                 feature=FeatureKey(entry["kind"], tuple(entry["payload"])),
                 weight=float(entry["weight"]), rank=int(entry["rank"]))
            for entry in members
        ]
        for choice, members in obj["per_choice"].items()
    }
    return RuleSet(focus_key=obj.get("focus", ""), choices=tuple(obj["choices"]),
                   per_choice=per_choice)
