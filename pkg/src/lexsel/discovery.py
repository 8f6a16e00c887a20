"""Alignment-count aggregation and the four-stage focus-word filter.

A focus word is a source ``(lemma, upos)`` tuple whose aligned target lemmas
split into several frequent, balanced lexical choices that all carry the
same majority source sense, i.e. the sense annotation alone cannot explain
the distinction.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .corpus import CorpusConfig, SentencePair

NO_SENSE = "∅"


@dataclass
class AlignmentCounts:
    """Streaming aggregates over aligned lemma pairs.

    ``cross_count[(vx, tx, vy)]`` counts, inside sentence pairs that contain
    a source token ``(vx, tx)``, alignments of target lemma ``vy`` to a
    source lemma other than ``vx``. Used to exclude target-side ambiguity.
    """

    pair_count: Counter = field(default_factory=Counter)    # (vx, tx, vy) -> n
    total_count: Counter = field(default_factory=Counter)   # (vx, tx) -> n
    sense_count: Counter = field(default_factory=Counter)   # (vx, tx, sx, vy) -> n
    cross_count: Counter = field(default_factory=Counter)   # (vx, tx, vy) -> n

    def merge(self, other: "AlignmentCounts") -> "AlignmentCounts":
        """Element-wise sum; associative and commutative, used to join shards."""
        out = AlignmentCounts()
        for name in ("pair_count", "total_count", "sense_count", "cross_count"):
            target = getattr(out, name)
            target.update(getattr(self, name))
            target.update(getattr(other, name))
        return out

    def check_marginals(self) -> None:
        """Assert the marginal-consistency invariants; raises on violation."""
        by_tuple: Counter = Counter()
        for (vx, tx, _vy), n in self.pair_count.items():
            by_tuple[(vx, tx)] += n
        if by_tuple != +self.total_count:
            raise AssertionError("pair_count marginals do not match total_count")
        by_pair: Counter = Counter()
        for (vx, tx, _sx, vy), n in self.sense_count.items():
            by_pair[(vx, tx, vy)] += n
        if by_pair != +self.pair_count:
            raise AssertionError("sense_count marginals do not match pair_count")


@dataclass(frozen=True)
class ChoiceStats:
    """One target lexical choice of a focus word."""

    tgt_lemma: str
    count: int
    prob: float
    majority_sense: str = NO_SENSE
    merged_from: tuple[str, ...] = ()

    def variants(self) -> tuple[str, ...]:
        return self.merged_from if self.merged_from else (self.tgt_lemma,)


@dataclass(frozen=True)
class FocusWord:
    """A source (lemma, upos) tuple with >= 2 lexical choices."""

    lemma: str
    upos: str
    choices: tuple[ChoiceStats, ...]

    @property
    def key(self) -> str:
        return f"{self.lemma}|{self.upos}"

    def choice_lemmas(self) -> tuple[str, ...]:
        return tuple(c.tgt_lemma for c in self.choices)


def accumulate_counts(corpus: Iterable[SentencePair]) -> AlignmentCounts:
    """Single streaming pass over the corpus; order- and shard-independent."""
    counts = AlignmentCounts()
    for pair in corpus:
        src, tgt = pair.src, pair.tgt
        for i, j in pair.align:
            s, t = src[i], tgt[j]
            counts.pair_count[(s.lemma, s.upos, t.lemma)] += 1
            counts.total_count[(s.lemma, s.upos)] += 1
            counts.sense_count[(s.lemma, s.upos, s.sense or NO_SENSE, t.lemma)] += 1
        tuples_here = {(tok.lemma, tok.upos) for tok in src}
        for vx, tx in tuples_here:
            for i, j in pair.align:
                if src[i].lemma != vx:
                    counts.cross_count[(vx, tx, tgt[j].lemma)] += 1
    return counts


def _choices_by_tuple(counts: AlignmentCounts) -> dict[tuple[str, str], dict[str, int]]:
    index: dict[tuple[str, str], dict[str, int]] = defaultdict(dict)
    for (vx, tx, vy), n in counts.pair_count.items():
        index[(vx, tx)][vy] = n
    return index


def filter_frequency(counts: AlignmentCounts, min_pair: int = 50,
                     min_choices: int = 2, cross_max: int = 3) -> list[FocusWord]:
    """Keep tuples aligned to >= min_choices target lemmas >= min_pair times.

    A surviving choice is additionally dropped when it was aligned to other
    source lemmas at least ``cross_max`` times within the tuple's sentences;
    tuples falling below ``min_choices`` after that are dropped.
    """
    index = _choices_by_tuple(counts)
    out: list[FocusWord] = []
    for (vx, tx), by_target in sorted(index.items()):
        frequent = {vy: n for vy, n in by_target.items() if n >= min_pair}
        if len(frequent) < min_choices:
            continue
        kept = {vy: n for vy, n in frequent.items()
                if counts.cross_count.get((vx, tx, vy), 0) < cross_max}
        if len(kept) < min_choices:
            continue
        total = counts.total_count[(vx, tx)]
        choices = tuple(
            ChoiceStats(tgt_lemma=vy, count=n, prob=n / total, merged_from=(vy,))
            for vy, n in sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))
        )
        out.append(FocusWord(lemma=vx, upos=tx, choices=choices))
    return out


def entropy(probs: Sequence[float]) -> float:
    """Shannon entropy in nats, sum of -p*ln(p) over the given probabilities."""
    if any(p <= 0.0 for p in probs):
        raise ValueError("entropy requires strictly positive probabilities")
    if any(p > 1.0 for p in probs) or sum(probs) > 1.0 + 1e-9:
        raise ValueError("probabilities must lie in (0, 1] and sum to at most 1")
    return float(sum(-p * math.log(p) for p in probs))


def filter_entropy(candidates: Sequence[FocusWord], threshold: float = 0.69) -> list[FocusWord]:
    """Keep candidates whose choice distribution has entropy above threshold.

    Probabilities are renormalized over the surviving choices, so the test
    measures how evenly the kept translations split.
    """
    out = []
    for word in candidates:
        total = sum(c.count for c in word.choices)
        renorm = [c.count / total for c in word.choices]
        if entropy(renorm) > threshold:
            out.append(word)
    return out


def filter_sense(candidates: Sequence[FocusWord], counts: AlignmentCounts) -> list[FocusWord]:
    """Keep tuples whose choices all share one majority source sense.

    Words whose target split is explained by distinct source senses are easy
    to gloss and excluded; sense ties break lexicographically.
    """
    sense_index: dict[tuple[str, str, str], Counter] = defaultdict(Counter)
    for (vx, tx, sx, vy), n in counts.sense_count.items():
        sense_index[(vx, tx, vy)][sx] += n
    out = []
    for word in candidates:
        majorities = []
        new_choices = []
        for choice in word.choices:
            by_sense = sense_index.get((word.lemma, word.upos, choice.tgt_lemma), Counter())
            if by_sense:
                sense = min(by_sense, key=lambda s: (-by_sense[s], s))
            else:
                sense = NO_SENSE
            majorities.append(sense)
            new_choices.append(replace(choice, majority_sense=sense))
        if len(set(majorities)) == 1:
            out.append(replace(word, choices=tuple(new_choices)))
    return out


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n


def _variants_match(a: str, b: str, min_prefix: int, max_edit: int) -> bool:
    p = _common_prefix_len(a, b)
    if p < min_prefix:
        return False
    if p == len(a) or p == len(b):
        return True
    return _edit_distance(a[p:], b[p:]) <= max_edit


def merge_choice_variants(choices: Sequence[ChoiceStats], min_prefix: int = 4,
                          max_edit: int = 2) -> list[ChoiceStats]:
    """Merge lemmatizer-variant choices that share a long common prefix.

    Two forms merge when they share a prefix of at least ``min_prefix``
    characters and either one is a prefix of the other or their suffixes are
    within ``max_edit`` edits; merging is transitive. The surviving lemma is
    the shortest variant and counts are summed. A crude heuristic: it can
    both over- and under-merge for heavily affixing languages, so both
    parameters are exposed in the config.
    """
    parent = list(range(len(choices)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(choices)):
        for j in range(i + 1, len(choices)):
            if _variants_match(choices[i].tgt_lemma, choices[j].tgt_lemma,
                               min_prefix, max_edit):
                parent[find(j)] = find(i)

    clusters: dict[int, list[ChoiceStats]] = defaultdict(list)
    for i, choice in enumerate(choices):
        clusters[find(i)].append(choice)

    merged: list[ChoiceStats] = []
    for members in clusters.values():
        if len(members) == 1:
            merged.append(members[0])
            continue
        canonical = min(members, key=lambda c: (len(c.tgt_lemma), c.tgt_lemma))
        variants = tuple(sorted({v for m in members for v in m.variants()}))
        merged.append(ChoiceStats(
            tgt_lemma=canonical.tgt_lemma,
            count=sum(m.count for m in members),
            prob=sum(m.prob for m in members),
            majority_sense=canonical.majority_sense,
            merged_from=variants,
        ))
    merged.sort(key=lambda c: (-c.count, c.tgt_lemma))
    return merged


def discover(corpus: Iterable[SentencePair], config: CorpusConfig) -> list[FocusWord]:
    """Full pipeline: count, filter on frequency, entropy and sense, merge.

    Deterministic; output sorted by total alignment count descending.
    """
    counts = accumulate_counts(corpus)
    candidates = filter_frequency(counts, min_pair=config.min_pair_count,
                                  min_choices=config.min_choices,
                                  cross_max=config.cross_align_max)
    candidates = filter_entropy(candidates, threshold=config.entropy_threshold)
    candidates = filter_sense(candidates, counts)
    out = []
    for word in candidates:
        choices = merge_choice_variants(word.choices, min_prefix=config.merge_min_prefix,
                                        max_edit=config.merge_max_edit)
        if len(choices) >= config.min_choices:
            out.append(replace(word, choices=tuple(choices)))
    out.sort(key=lambda w: (-counts.total_count[(w.lemma, w.upos)], w.lemma, w.upos))
    return out


def focus_word_to_obj(word: FocusWord) -> dict:
    return {
        "lemma": word.lemma,
        "upos": word.upos,
        "choices": [
            {"tgt_lemma": c.tgt_lemma, "count": c.count, "prob": c.prob,
             "majority_sense": c.majority_sense, "merged_from": list(c.variants())}
            for c in word.choices
        ],
    }


def focus_word_from_obj(obj: dict) -> FocusWord:
    return FocusWord(
        lemma=obj["lemma"],
        upos=obj["upos"],
        choices=tuple(
            ChoiceStats(tgt_lemma=c["tgt_lemma"], count=int(c["count"]),
                        prob=float(c["prob"]),
                        majority_sense=c.get("majority_sense", NO_SENSE),
                        merged_from=tuple(c.get("merged_from") or (c["tgt_lemma"],)))
            for c in obj["choices"]
        ),
    )
