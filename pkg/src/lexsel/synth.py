"""Deterministic synthetic fixtures: planted corpora and planted-cue datasets.

These generators build corpora where the right answers are known by
construction, so pipeline behavior can be checked end to end without a
multi-million-sentence bitext.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import CorpusConfig, SentencePair, Token
from .discovery import ChoiceStats, FocusWord
from .features import Dataset, Example, FeatureKey

STOPWORDS = frozenset({"the", "a", "an", "of", "to", "and", "in", "on", "be"})

_FILLER_SRC = ["house", "tree", "river", "street", "window", "book", "friend",
               "night", "music", "garden", "road", "table", "letter", "story",
               "market", "school", "winter", "summer", "doctor", "mountain"]
_FILLER_TGT = [f"t_{w}" for w in _FILLER_SRC]


@dataclass(frozen=True)
class PlantedWord:
    lemma: str
    upos: str
    sense_of_choice: dict[str, str]      # choice -> source sense annotation
    cues: dict[str, tuple[str, ...]]     # choice -> cue lemmas
    counts: dict[str, int]               # choice -> number of occurrences


def default_planted_corpus_spec() -> list[PlantedWord]:
    """Two real focus words plus one distractor per discovery filter."""
    return [
        # kept: frequent, balanced (H = ln 2), shared majority sense
        PlantedWord(
            lemma="wall", upos="NOUN",
            sense_of_choice={"pared": "wall.n.01", "muro": "wall.n.01"},
            cues={"pared": ("picture", "hang", "room", "paint"),
                  "muro": ("climb", "stone", "city", "brick")},
            counts={"pared": 60, "muro": 60},
        ),
        # kept: balanced split; near-balance is what the 0.69 threshold admits
        # for binary words, and it keeps the weakly regularized OvR margins
        # meaningful at this corpus size
        PlantedWord(
            lemma="language", upos="NOUN",
            sense_of_choice={"idioma": "language.n.01", "lenguaje": "language.n.01"},
            cues={"idioma": ("speak", "foreign", "learn"),
                  "lenguaje": ("formal", "sign", "body")},
            counts={"idioma": 55, "lenguaje": 55},
        ),
        # dropped by the frequency filter: second choice below 50
        PlantedWord(
            lemma="ticket", upos="NOUN",
            sense_of_choice={"multa": "ticket.n.01", "boleto": "ticket.n.01"},
            cues={"multa": ("police", "fine"), "boleto": ("train", "buy")},
            counts={"multa": 60, "boleto": 30},
        ),
        # dropped by the entropy filter: 100/54 split has entropy 0.648
        PlantedWord(
            lemma="pill", upos="NOUN",
            sense_of_choice={"pastilla": "pill.n.01", "somnifero": "pill.n.01"},
            cues={"pastilla": ("swallow", "headache"), "somnifero": ("sleep", "night")},
            counts={"pastilla": 100, "somnifero": 54},
        ),
        # dropped by the sense filter: choices carry distinct majority senses
        PlantedWord(
            lemma="bank", upos="NOUN",
            sense_of_choice={"banco": "bank.n.02", "orilla": "bank.n.01"},
            cues={"banco": ("money", "account"), "orilla": ("river", "shore")},
            counts={"banco": 60, "orilla": 55},
        ),
    ]


def _pair(sent_id: str, src_specs: list[tuple[str, str, str | None]],
          tgt_lemmas: list[str], align: list[tuple[int, int]]) -> SentencePair:
    src = tuple(
        Token(index=i, surface=lemma, lemma=lemma, upos=upos, sense=sense)
        for i, (lemma, upos, sense) in enumerate(src_specs)
    )
    tgt = tuple(Token(index=j, surface=lemma, lemma=lemma) for j, lemma in enumerate(tgt_lemmas))
    return SentencePair(id=sent_id, src=src, tgt=tgt, align=frozenset(align))


def make_planted_corpus(seed: int = 7, n_filler: int = 4400,
                        planted: list[PlantedWord] | None = None) -> list[SentencePair]:
    """About 5k sentence pairs with the planted words embedded in context."""
    rng = np.random.default_rng(seed)
    planted = planted if planted is not None else default_planted_corpus_spec()
    pairs: list[SentencePair] = []
    counter = 0

    for word in planted:
        for choice, n_occ in sorted(word.counts.items()):
            cues = word.cues[choice]
            for k in range(n_occ):
                counter += 1
                cue = cues[k % len(cues)]
                filler_i = int(rng.integers(len(_FILLER_SRC)))
                # src: the <cue> <focus> of the <filler>
                src = [
                    ("the", "DET", None),
                    (cue, "VERB" if cue in ("hang", "climb", "speak", "learn",
                                            "swallow", "buy") else "ADJ", None),
                    (word.lemma, word.upos, word.sense_of_choice[choice]),
                    ("of", "ADP", None),
                    ("the", "DET", None),
                    (_FILLER_SRC[filler_i], "NOUN", None),
                ]
                tgt = [f"t_{cue}", choice, _FILLER_TGT[filler_i]]
                align = [(1, 0), (2, 1), (5, 2)]
                pairs.append(_pair(f"p{counter:06d}", src, tgt, align))

    for _ in range(n_filler):
        counter += 1
        length = int(rng.integers(3, 7))
        idx = rng.integers(0, len(_FILLER_SRC), size=length)
        src = [(_FILLER_SRC[i], "NOUN", None) for i in idx]
        tgt = [_FILLER_TGT[i] for i in idx]
        align = [(p, p) for p in range(length)]
        pairs.append(_pair(f"f{counter:06d}", src, tgt, align))

    order = rng.permutation(len(pairs))
    return [pairs[i] for i in order]


def planted_corpus_config() -> CorpusConfig:
    return CorpusConfig(stopwords=STOPWORDS)


def make_planted_cue_dataset(n_choices: int = 2, n_examples: int = 100,
                             noise: float = 0.1, seed: int = 0,
                             n_filler_features: int = 30) -> Dataset:
    """Dataset whose label is fixed by one context lemma, plus label noise.

    Every example carries its choice's cue lemma feature and a few random
    filler features; with probability ``noise`` the label is flipped to a
    different choice while the cue stays, bounding achievable accuracy.
    """
    rng = np.random.default_rng(seed)
    choices = [f"choice{k}" for k in range(n_choices)]
    counts = {c: 0 for c in choices}
    examples = []
    for i in range(n_examples):
        true = choices[i % n_choices]
        label = true
        if rng.random() < noise:
            others = [c for c in choices if c != true]
            label = others[int(rng.integers(len(others)))]
        features = {FeatureKey.lemma(f"cue_{true}")}
        for _ in range(int(rng.integers(2, 6))):
            features.add(FeatureKey.lemma(f"filler{int(rng.integers(n_filler_features))}"))
        features.add(FeatureKey.bigram(f"cue_{true}", "focus"))
        counts[label] += 1
        examples.append(Example(features=frozenset(features), label=label,
                                sentence_id=f"s{i}", focus_index=0))
    stats = tuple(
        ChoiceStats(tgt_lemma=c, count=counts[c],
                    prob=counts[c] / n_examples, merged_from=(c,))
        for c in sorted(choices, key=lambda c: (-counts[c], c))
    )
    focus = FocusWord(lemma="planted", upos="NOUN", choices=stats)
    return Dataset(focus=focus, examples=examples)


def make_imbalanced_cue_dataset(n_majority: int = 90, n_minority: int = 10,
                                seed: int = 0) -> Dataset:
    """9:1 dataset where only the minority class carries a deciding cue."""
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n_majority):
        features = {FeatureKey.lemma(f"filler{int(rng.integers(20))}")
                    for _ in range(4)}
        examples.append(Example(features=frozenset(features), label="major",
                                sentence_id=f"a{i}", focus_index=0))
    for i in range(n_minority):
        features = {FeatureKey.lemma("cue_minor")}
        features.add(FeatureKey.lemma(f"filler{int(rng.integers(20))}"))
        examples.append(Example(features=frozenset(features), label="minor",
                                sentence_id=f"b{i}", focus_index=0))
    focus = FocusWord(lemma="skewed", upos="NOUN", choices=(
        ChoiceStats(tgt_lemma="major", count=n_majority,
                    prob=n_majority / (n_majority + n_minority), merged_from=("major",)),
        ChoiceStats(tgt_lemma="minor", count=n_minority,
                    prob=n_minority / (n_majority + n_minority), merged_from=("minor",)),
    ))
    return Dataset(focus=focus, examples=examples)
