"""Annotated parallel-corpus data model and JSONL streaming.

The toolkit consumes pre-annotated bitext: the source side carries lemma,
POS, dependency and word-sense annotation, the target side only lemmas.
One sentence pair per line, schema documented in the README.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator


class CorpusFormatError(ValueError):
    """A corpus line failed to parse or validate."""

    def __init__(self, message: str, line_no: int | None = None, sent_id: str | None = None):
        loc = []
        if line_no is not None:
            loc.append(f"line {line_no}")
        if sent_id is not None:
            loc.append(f"sentence {sent_id!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.line_no = line_no
        self.sent_id = sent_id


@dataclass(frozen=True)
class Token:
    """One token; target-side tokens only need index, surface and lemma."""

    index: int
    surface: str
    lemma: str
    upos: str = ""
    head: int | None = None
    deprel: str | None = None
    sense: str | None = None


@dataclass(frozen=True)
class SentencePair:
    """An aligned sentence pair; ``align`` holds (src_index, tgt_index) pairs."""

    id: str
    src: tuple[Token, ...]
    tgt: tuple[Token, ...]
    align: frozenset[tuple[int, int]]


@dataclass
class CorpusConfig:
    """Stopword/punctuation predicates plus pipeline thresholds.

    Stopwords are injected from a file (one lowercase lemma per line) rather
    than hardcoded; the set is lowercase-normalized on construction.
    """

    stopwords: frozenset[str] = frozenset()
    punct_upos: frozenset[str] = frozenset({"PUNCT", "SYM"})
    min_pair_count: int = 50
    min_choices: int = 2
    cross_align_max: int = 3
    entropy_threshold: float = 0.69
    merge_min_prefix: int = 4
    merge_max_edit: int = 2
    window: int = 3

    def __post_init__(self):
        self.stopwords = frozenset(w.lower() for w in self.stopwords)
        self.punct_upos = frozenset(self.punct_upos)


def is_excluded(token: Token, config: CorpusConfig) -> bool:
    """True iff the token is punctuation or a stopword (case-insensitive lemma)."""
    return token.upos in config.punct_upos or token.lemma.lower() in config.stopwords


def _token_from_obj(obj: dict, *, source_side: bool, n_tokens: int,
                    line_no: int, sent_id: str) -> Token:
    try:
        index = int(obj["i"])
        surface = str(obj["form"])
        lemma = str(obj["lemma"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"bad token object: {exc}", line_no, sent_id) from exc
    upos = str(obj.get("upos") or "")
    head = obj.get("head")
    if head is not None:
        head = int(head)
        if not (0 <= head < n_tokens) or head == index:
            raise CorpusFormatError(
                f"token {index}: head {head} is not a valid other index", line_no, sent_id)
    if source_side and (not lemma or not upos):
        raise CorpusFormatError(
            f"source token {index}: lemma and upos must be non-empty", line_no, sent_id)
    sense = obj.get("sense")
    return Token(
        index=index,
        surface=surface,
        lemma=lemma,
        upos=upos,
        head=head,
        deprel=obj.get("deprel"),
        sense=str(sense) if sense is not None else None,
    )


def pair_from_obj(obj: dict, line_no: int | None = None) -> SentencePair:
    """Build and validate one SentencePair from a decoded JSON object."""
    sent_id = str(obj.get("id", ""))
    if not sent_id:
        raise CorpusFormatError("missing sentence id", line_no)
    src_objs = obj.get("src") or []
    tgt_objs = obj.get("tgt") or []
    src = tuple(_token_from_obj(t, source_side=True, n_tokens=len(src_objs),
                                line_no=line_no, sent_id=sent_id) for t in src_objs)
    tgt = tuple(_token_from_obj(t, source_side=False, n_tokens=len(tgt_objs),
                                line_no=line_no, sent_id=sent_id) for t in tgt_objs)
    align_raw = obj.get("align") or []
    align: set[tuple[int, int]] = set()
    for entry in align_raw:
        i, j = int(entry[0]), int(entry[1])
        if not (0 <= i < len(src)) or not (0 <= j < len(tgt)):
            raise CorpusFormatError(
                f"alignment index out of range: ({i}, {j})", line_no, sent_id)
        if (i, j) in align:
            raise CorpusFormatError(f"duplicate alignment pair ({i}, {j})", line_no, sent_id)
        align.add((i, j))
    return SentencePair(id=sent_id, src=src, tgt=tgt, align=frozenset(align))


def pair_to_obj(pair: SentencePair) -> dict:
    """Inverse of :func:`pair_from_obj`; round-trips exactly."""
    return {
        "id": pair.id,
        "src": [
            {"i": t.index, "form": t.surface, "lemma": t.lemma, "upos": t.upos,
             "head": t.head, "deprel": t.deprel, "sense": t.sense}
            for t in pair.src
        ],
        "tgt": [{"i": t.index, "form": t.surface, "lemma": t.lemma} for t in pair.tgt],
        "align": [list(p) for p in sorted(pair.align)],
    }


def load_corpus(path: str | Path) -> Iterator[SentencePair]:
    """Stream sentence pairs from a JSONL file, one object per line.

    Lazily yields pairs in file order; memory use is independent of corpus
    size. Blank lines are skipped.
    """
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", line_no) from exc
            yield pair_from_obj(obj, line_no)


def write_corpus(path: str | Path, pairs: Iterable[SentencePair]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(json.dumps(pair_to_obj(pair), ensure_ascii=False) + "\n")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one lemma per line."""
    words = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            word = line.strip()
            if word:
                words.add(word.lower())
    return frozenset(words)


_INT_KEYS = {"min_pair_count", "min_choices", "cross_align_max",
             "merge_min_prefix", "merge_max_edit", "window"}
_FLOAT_KEYS = {"entropy_threshold"}


def load_config(path: str | Path) -> CorpusConfig:
    """Parse a flat ``key = value`` config file.

    Recognized keys: ``stopwords_file``, ``punct_upos`` (comma-separated) and
    the threshold keys of :class:`CorpusConfig`. Paths are resolved relative
    to the config file. Lines starting with ``#`` are comments.
    """
    path = Path(path)
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not 'key = value': {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "stopwords_file":
                values["stopwords"] = load_stopwords(path.parent / value)
            elif key == "punct_upos":
                values["punct_upos"] = frozenset(
                    v.strip() for v in value.split(",") if v.strip())
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                raise ValueError(f"unknown config key {key!r}")
    return CorpusConfig(**values)  # type: ignore[arg-type]
