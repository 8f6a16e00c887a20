"""Sparse binary featurization of focus-word contexts.

Each occurrence of a focus word becomes a set of presence features drawn
from its neighborhood (window plus syntactic head/dependents): context
lemmas, context word senses, and lemma bigrams inside the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusConfig, SentencePair, Token, is_excluded
from .discovery import FocusWord

KIND_LEMMA = "lemma"
KIND_SENSE = "sense"
KIND_BIGRAM = "bigram"


@dataclass(frozen=True, order=True)
class FeatureKey:
    kind: str
    payload: tuple[str, ...]

    @staticmethod
    def lemma(value: str) -> "FeatureKey":
        return FeatureKey(KIND_LEMMA, (value,))

    @staticmethod
    def sense(value: str) -> "FeatureKey":
        return FeatureKey(KIND_SENSE, (value,))

    @staticmethod
    def bigram(first: str, second: str) -> "FeatureKey":
        return FeatureKey(KIND_BIGRAM, (first, second))

    def to_obj(self) -> list:
        return [self.kind, *self.payload]

    @staticmethod
    def from_obj(obj: Sequence[str]) -> "FeatureKey":
        return FeatureKey(obj[0], tuple(obj[1:]))


@dataclass(frozen=True)
class Example:
    """One labeled focus-word occurrence."""

    features: frozenset[FeatureKey]
    label: str
    sentence_id: str
    focus_index: int


@dataclass
class Dataset:
    """Examples for one focus word plus the feature-column bijection."""

    focus: FocusWord
    examples: list[Example]
    feature_index: dict[FeatureKey, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.feature_index:
            keys = sorted({k for ex in self.examples for k in ex.features})
            self.feature_index = {k: i for i, k in enumerate(keys)}

    @property
    def n_features(self) -> int:
        return len(self.feature_index)

    def choice_lemmas(self) -> tuple[str, ...]:
        return self.focus.choice_lemmas()

    def label_counts(self) -> dict[str, int]:
        counts = {lemma: 0 for lemma in self.choice_lemmas()}
        for ex in self.examples:
            counts[ex.label] = counts.get(ex.label, 0) + 1
        return counts

    def matrix(self) -> sp.csr_matrix:
        """Binary presence matrix, one row per example."""
        rows, cols = [], []
        for r, ex in enumerate(self.examples):
            for key in ex.features:
                col = self.feature_index.get(key)
                if col is not None:
                    rows.append(r)
                    cols.append(col)
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)),
                             shape=(len(self.examples), self.n_features))

    def labels(self) -> list[str]:
        return [ex.label for ex in self.examples]


def neighborhood(pair: SentencePair, focus_index: int, window: int = 3) -> list[Token]:
    """Context tokens: window around the focus plus its head and dependents.

    Deduplicated, in sentence order, excluding the focus token itself.
    """
    if not (0 <= focus_index < len(pair.src)):
        raise IndexError(f"focus index {focus_index} out of range")
    indices = {i for i in range(max(0, focus_index - window),
                                min(len(pair.src), focus_index + window + 1))
               if i != focus_index}
    head = pair.src[focus_index].head
    if head is not None:
        indices.add(head)
    for tok in pair.src:
        if tok.head == focus_index:
            indices.add(tok.index)
    indices.discard(focus_index)
    return [pair.src[i] for i in sorted(indices)]


def featurize(pair: SentencePair, focus_index: int, config: CorpusConfig) -> frozenset[FeatureKey]:
    """Feature set for one focus occurrence; source-side only, deterministic.

    Stopwords and punctuation contribute nothing; bigrams pair consecutive
    surviving lemmas inside the window, bridging over removed tokens, with
    the focus token itself participating.
    """
    keys: set[FeatureKey] = set()
    for tok in neighborhood(pair, focus_index, config.window):
        if is_excluded(tok, config):
            continue
        keys.add(FeatureKey.lemma(tok.lemma))
        if tok.sense:
            keys.add(FeatureKey.sense(tok.sense))
    span = range(max(0, focus_index - config.window),
                 min(len(pair.src), focus_index + config.window + 1))
    kept = [pair.src[i] for i in span
            if i == focus_index or not is_excluded(pair.src[i], config)]
    for left, right in zip(kept, kept[1:]):
        keys.add(FeatureKey.bigram(left.lemma, right.lemma))
    return frozenset(keys)


def build_dataset(corpus: Iterable[SentencePair], focus: FocusWord,
                  config: CorpusConfig) -> Dataset:
    """One example per focus occurrence whose alignment resolves to a choice.

    Raw aligned target lemmas are mapped through the choice variant merge;
    occurrences aligned to no known choice, or ambiguously to several
    distinct choices, contribute nothing.
    """
    canonical: dict[str, str] = {}
    for choice in focus.choices:
        for variant in choice.variants():
            canonical[variant] = choice.tgt_lemma
    examples: list[Example] = []
    for pair in corpus:
        by_src: dict[int, set[str]] = {}
        for i, j in pair.align:
            by_src.setdefault(i, set()).add(pair.tgt[j].lemma)
        for i, tok in enumerate(pair.src):
            if tok.lemma != focus.lemma or tok.upos != focus.upos:
                continue
            labels = {canonical[lemma] for lemma in by_src.get(i, set())
                      if lemma in canonical}
            if len(labels) != 1:
                continue
            examples.append(Example(
                features=featurize(pair, i, config),
                label=labels.pop(),
                sentence_id=pair.id,
                focus_index=i,
            ))
    return Dataset(focus=focus, examples=examples)


def stratified_split(dataset: Dataset, train_frac: float = 0.8,
                     seed: int = 0) -> tuple[Dataset, Dataset]:
    """Per-choice 80/20-style split; deterministic given the seed.

    Per choice the train share is ``train_frac * n`` rounded half-up. Splits
    rebuild their own feature index; examples keep their symbolic features,
    so the rebuild never misaligns columns.
    """
    by_label: dict[str, list[int]] = {lemma: [] for lemma in dataset.choice_lemmas()}
    for idx, ex in enumerate(dataset.examples):
        by_label.setdefault(ex.label, []).append(idx)
    rng = np.random.default_rng(seed)
    train_idx: set[int] = set()
    for lemma in dataset.choice_lemmas():
        indices = by_label.get(lemma, [])
        if len(indices) < 2:
            raise ValueError(f"choice {lemma!r} has fewer than 2 examples")
        shuffled = list(indices)
        rng.shuffle(shuffled)
        target = train_frac * len(shuffled)
        n_train = int(target) + (1 if target - int(target) >= 0.5 else 0)
        train_idx.update(shuffled[:n_train])
    train = [ex for i, ex in enumerate(dataset.examples) if i in train_idx]
    test = [ex for i, ex in enumerate(dataset.examples) if i not in train_idx]
    return (Dataset(focus=dataset.focus, examples=train),
            Dataset(focus=dataset.focus, examples=test))


def dataset_to_obj(dataset: Dataset) -> dict:
    from .discovery import focus_word_to_obj

    ordered = sorted(dataset.feature_index.items(), key=lambda kv: kv[1])
    return {
        "focus": focus_word_to_obj(dataset.focus),
        "feature_index": [key.to_obj() for key, _ in ordered],
        "examples": [
            {"features": sorted(dataset.feature_index[k] for k in ex.features),
             "label": ex.label, "sentence_id": ex.sentence_id,
             "focus_index": ex.focus_index}
            for ex in dataset.examples
        ],
    }


def dataset_from_obj(obj: dict) -> Dataset:
    from .discovery import focus_word_from_obj

    keys = [FeatureKey.from_obj(entry) for entry in obj["feature_index"]]
    examples = [
        Example(features=frozenset(keys[i] for i in ex["features"]),
                label=ex["label"], sentence_id=ex["sentence_id"],
                focus_index=int(ex["focus_index"]))
        for ex in obj["examples"]
    ]
    return Dataset(focus=focus_word_from_obj(obj["focus"]), examples=examples,
                   feature_index={k: i for i, k in enumerate(keys)})
