#!/usr/bin/env python3
"""Write the planted synthetic corpus plus its stopword and config files.

Usage: python3 scripts/make_synthetic_corpus.py [outdir] [--seed N] [--fillers N]
"""

import argparse
from pathlib import Path

from lexsel.corpus import write_corpus
from lexsel.synth import STOPWORDS, make_planted_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="synthetic")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--fillers", type=int, default=4400)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus = make_planted_corpus(seed=args.seed, n_filler=args.fillers)
    write_corpus(outdir / "corpus.jsonl", corpus)
    (outdir / "stopwords.txt").write_text(
        "\n".join(sorted(STOPWORDS)) + "\n", encoding="utf-8")
    (outdir / "lexsel.cfg").write_text(
        "stopwords_file = stopwords.txt\n"
        "min_pair_count = 50\n"
        "min_choices = 2\n"
        "cross_align_max = 3\n"
        "entropy_threshold = 0.69\n"
        "merge_min_prefix = 4\n"
        "merge_max_edit = 2\n"
        "window = 3\n", encoding="utf-8")
    print(f"wrote {len(corpus)} sentence pairs under {outdir}/")


if __name__ == "__main__":
    main()
