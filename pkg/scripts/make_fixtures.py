#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

Run from the repository root:  python3 scripts/make_fixtures.py

Outputs (committed, stable under the fixed seeds):
  tests/data/conformance/cands.txt / refs.txt  -- 50 scored pairs
  tests/data/conformance/golden_scores.json    -- oracle-computed scores
  tests/data/intraclass_pairs.jsonl            -- frozen intra-class sample
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from _synth import three_level_records  # noqa: E402
from bleu_oracle import oracle_score  # noqa: E402

from commentbench.affinity import sample_pairs, write_pairs_jsonl  # noqa: E402
from commentbench.metrics import VARIANT_NAMES, get_variant  # noqa: E402


def conformance_pairs(seed=20_200_921):
    rng = random.Random(seed)
    verbs = ["returns", "creates", "updates", "removes", "checks", "parses"]
    nouns = ["value", "node", "listener", "buffer", "index", "stream", "view"]
    tails = ["from the cache", "for the given key", "of this widget", "if present"]

    pairs = []
    # identical pairs
    for _ in range(10):
        text = f"{rng.choice(verbs)} the {rng.choice(nouns)} {rng.choice(tails)}"
        pairs.append((text, text))
    # partial overlap: same template, one slot differs
    for _ in range(22):
        verb = rng.choice(verbs)
        tail = rng.choice(tails)
        pairs.append(
            (f"{verb} the {rng.choice(nouns)} {tail}", f"{verb} the {rng.choice(nouns)} {tail}")
        )
    # weak overlap: only the leading verb phrase shared
    for _ in range(10):
        verb = rng.choice(verbs)
        pairs.append(
            (
                f"{verb} the {rng.choice(nouns)} {rng.choice(tails)}",
                f"{verb} the {rng.choice(nouns)} when the {rng.choice(nouns)} changes",
            )
        )
    # disjoint vocabulary
    for i in range(5):
        pairs.append((f"alpha{i} beta{i} gamma{i} delta{i}", "wholly unrelated reference text here"))
    # degenerate shapes: short candidate, short identical pair, empty candidate
    pairs.append(("returns", "returns the buffer if present"))
    pairs.append(("close it", "close it"))
    pairs.append(("", "drains the queue before shutdown"))
    assert len(pairs) == 50
    return pairs


def main():
    data_dir = ROOT / "tests" / "data"
    conf_dir = data_dir / "conformance"
    conf_dir.mkdir(parents=True, exist_ok=True)

    pairs = conformance_pairs()
    (conf_dir / "cands.txt").write_text("\n".join(c for c, _ in pairs) + "\n", encoding="utf-8")
    (conf_dir / "refs.txt").write_text("\n".join(r for _, r in pairs) + "\n", encoding="utf-8")

    token_pairs = [(c.split(), r.split()) for c, r in pairs]
    golden = []
    for name in VARIANT_NAMES:
        score = oracle_score(token_pairs, name)
        golden.append(
            {
                "variant": name,
                "aggregation": get_variant(name).aggregation,
                "n_examples": len(pairs),
                "score": round(score, 2),
            }
        )
    (conf_dir / "golden_scores.json").write_text(
        json.dumps(golden, indent=2) + "\n", encoding="utf-8"
    )
    scores = [g["score"] for g in golden]
    print("conformance goldens:", {g["variant"]: g["score"] for g in golden})
    print("spread:", max(scores) - min(scores))

    records = three_level_records()
    sample = sample_pairs(records, "intra_class", count=300, seed=9)
    write_pairs_jsonl(sample, data_dir / "intraclass_pairs.jsonl")
    print(f"intraclass fixture: {len(sample)} pairs")


if __name__ == "__main__":
    main()
