"""N-gram precision machinery and the seven BLEU flavors used across the
published code-to-comment corpora.

All flavors share the same skeleton -- clipped n-gram precisions for
n = 1..4 combined by geometric mean and scaled by a brevity penalty, on a
0..100 scale -- and differ in aggregation and zero-precision smoothing:

========  ==========  =====================================================
name      aggregation smoothing of p_n
========  ==========  =====================================================
CN        sentence    (m+1)/(c+1) for n >= 2; p_1 raw
M2        sentence    identical to CN
NCS       sentence    (m+1)/(c+1) for every n, unigrams included
DC        sentence    only where m = 0: p_n = 1/((n-1) + 5/ln(cand_len))
FC        corpus      none (any zero cumulative precision zeroes the score)
Moses     corpus      none (computed identically to FC)
Sacre     corpus      where cumulative m = 0: p_n = 1/(2^s * c), s = 1, 2, ...
========  ==========  =====================================================

Degenerate inputs are pinned as follows.  A candidate shorter than n has
its (0, 0) precision replaced by (0, 1) before smoothing so sentence
scores stay defined; as a consequence an identical candidate/reference
pair scores exactly 100 only when the candidate has at least 4 tokens
(shorter identical pairs sit below 100 under the add-one floor, as the
reference implementations this mirrors also do).  Under DC a candidate of
length <= 1 has no usable ln(cand_len), and the fallback value is 0, which
zeroes the score.  An empty candidate always scores 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from math import fsum
from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Union

if TYPE_CHECKING:
    from .corpus import TokenSequence

N_ORDER = 4

Tokens = Union["TokenSequence", Sequence[str]]


def _tokens(seq) -> tuple[str, ...]:
    tokens = getattr(seq, "tokens", None)
    if tokens is not None:
        return tuple(tokens)
    return tuple(seq)


@dataclass(frozen=True)
class PrecisionFraction:
    """Clipped overlap ``matches`` over candidate n-gram count ``total``."""

    order: int
    matches: int
    total: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0 <= self.matches <= max(self.total, 0):
            raise ValueError("matches must lie in [0, total]")


@dataclass(frozen=True)
class BleuBreakdown:
    precisions: tuple[PrecisionFraction, ...]
    smoothed_p: tuple[float, ...]
    bp: float
    cand_len: int
    ref_len: int
    score: float


@dataclass(frozen=True)
class BleuVariant:
    name: str
    aggregation: str  # "sentence" | "corpus"
    smoothing: str    # "none" | "add-one-high" | "add-one-all" | "len-fallback" | "halving"


VARIANTS = {
    "CN": BleuVariant("CN", "sentence", "add-one-high"),
    "DC": BleuVariant("DC", "sentence", "len-fallback"),
    "FC": BleuVariant("FC", "corpus", "none"),
    "Moses": BleuVariant("Moses", "corpus", "none"),
    "NCS": BleuVariant("NCS", "sentence", "add-one-all"),
    "Sacre": BleuVariant("Sacre", "corpus", "halving"),
    "M2": BleuVariant("M2", "sentence", "add-one-high"),
}

VARIANT_NAMES = tuple(VARIANTS)

_CANONICAL = {name.lower(): name for name in VARIANTS}


def get_variant(name: Union[str, BleuVariant]) -> BleuVariant:
    """Look up a variant by (case-insensitive) name."""
    if isinstance(name, BleuVariant):
        return name
    key = _CANONICAL.get(str(name).lower())
    if key is None:
        raise ValueError(
            f"unknown BLEU variant {name!r}; expected one of {', '.join(VARIANTS)}"
        )
    return VARIANTS[key]


def ngrams(seq: Tokens, n: int) -> Counter:
    """All contiguous length-``n`` windows with multiplicity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = _tokens(seq)
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(cand: Tokens, refs: Sequence[Tokens], n: int) -> PrecisionFraction:
    """Clipped precision: each reference n-gram may be matched at most its
    own count, with the count taken as the max over references."""
    if not refs:
        raise ValueError("at least one reference is required")
    cand_counts = ngrams(cand, n)
    max_ref: Counter = Counter()
    for ref in refs:
        for gram, count in ngrams(ref, n).items():
            if count > max_ref[gram]:
                max_ref[gram] = count
    matches = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
    return PrecisionFraction(order=n, matches=matches, total=sum(cand_counts.values()))


def brevity_penalty(cand_len: int, ref_len: int) -> float:
    """1 when the candidate is longer; exp(1 - r/c) otherwise; 0 for an
    empty candidate."""
    if cand_len < 0 or ref_len < 0:
        raise ValueError("lengths must be >= 0")
    if cand_len == 0:
        return 0.0
    if cand_len > ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / cand_len)


def closest_ref_length(cand_len: int, refs: Sequence[Tokens]) -> int:
    """Reference length closest to the candidate's (ties pick the shorter)."""
    return min((len(_tokens(r)) for r in refs), key=lambda rl: (abs(rl - cand_len), rl))


def _normalized(fracs: Sequence[PrecisionFraction]) -> list[tuple[int, int]]:
    # (0, 0) -> (0, 1): keeps every order defined for very short candidates.
    return [(f.matches, f.total if f.total > 0 else 1) for f in fracs]


def _smooth(
    fracs: Sequence[PrecisionFraction], smoothing: str, cand_len: int
) -> tuple[float, ...]:
    counts = _normalized(fracs)
    out: list[float] = []
    if smoothing == "none":
        out = [m / c for m, c in counts]
    elif smoothing == "add-one-high":
        out = [m / c if n == 0 else (m + 1) / (c + 1) for n, (m, c) in enumerate(counts)]
    elif smoothing == "add-one-all":
        out = [(m + 1) / (c + 1) for m, c in counts]
    elif smoothing == "len-fallback":
        for i, (m, c) in enumerate(counts):
            if m > 0:
                out.append(m / c)
            elif cand_len <= 1:
                out.append(0.0)  # ln(cand_len) unusable; degenerate, scores 0
            else:
                out.append(1.0 / (i + 5.0 / math.log(cand_len)))
    elif smoothing == "halving":
        s = 1
        for m, c in counts:
            if m == 0:
                out.append(1.0 / (2**s * c))
                s += 1
            else:
                out.append(m / c)
    else:  # pragma: no cover - registry guards this
        raise ValueError(f"unknown smoothing {smoothing!r}")
    return tuple(out)


def _finish(
    fracs: tuple[PrecisionFraction, ...],
    smoothed: tuple[float, ...],
    cand_len: int,
    ref_len: int,
) -> BleuBreakdown:
    bp = brevity_penalty(cand_len, ref_len)
    if cand_len == 0 or any(p == 0.0 for p in smoothed):
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(fsum(math.log(p) for p in smoothed) / N_ORDER)
    return BleuBreakdown(
        precisions=fracs,
        smoothed_p=smoothed,
        bp=bp,
        cand_len=cand_len,
        ref_len=ref_len,
        score=score,
    )


def sentence_bleu(cand: Tokens, refs: Sequence[Tokens], variant) -> BleuBreakdown:
    """Score one candidate against its reference(s) under a sentence variant."""
    variant = get_variant(variant)
    if variant.aggregation != "sentence":
        raise ValueError(f"{variant.name} is corpus-aggregated; use corpus_bleu")
    if not refs:
        raise ValueError("at least one reference is required")
    cand_len = len(_tokens(cand))
    fracs = tuple(modified_precision(cand, refs, n) for n in range(1, N_ORDER + 1))
    smoothed = _smooth(fracs, variant.smoothing, cand_len)
    return _finish(fracs, smoothed, cand_len, closest_ref_length(cand_len, refs))


def corpus_bleu(pairs: Sequence[tuple[Tokens, Sequence[Tokens]]], variant) -> BleuBreakdown:
    """Accumulate match/total counts over all pairs, then combine once."""
    variant = get_variant(variant)
    if variant.aggregation != "corpus":
        raise ValueError(f"{variant.name} is sentence-aggregated; use sentence_bleu")
    if not pairs:
        raise ValueError("corpus BLEU needs at least one pair")
    matches = [0] * N_ORDER
    totals = [0] * N_ORDER
    cand_len = 0
    ref_len = 0
    for cand, refs in pairs:
        if not refs:
            raise ValueError("at least one reference is required")
        c_len = len(_tokens(cand))
        cand_len += c_len
        ref_len += closest_ref_length(c_len, refs)
        for n in range(1, N_ORDER + 1):
            frac = modified_precision(cand, refs, n)
            matches[n - 1] += frac.matches
            totals[n - 1] += frac.total
    fracs = tuple(
        PrecisionFraction(order=n, matches=matches[n - 1], total=totals[n - 1])
        for n in range(1, N_ORDER + 1)
    )
    smoothed = _smooth(fracs, variant.smoothing, cand_len)
    return _finish(fracs, smoothed, cand_len, ref_len)


@dataclass(frozen=True)
class ScoreReport:
    """Score of a pair set under one variant.

    Sentence variants carry per-example scores and ``score`` is their
    arithmetic mean; corpus variants carry the cumulative breakdown.
    Scores are reported to two decimals when serialized; internal values
    stay double precision.
    """

    variant: BleuVariant
    n_examples: int
    score: float
    per_example_scores: Optional[tuple[float, ...]] = None
    breakdown: Optional[BleuBreakdown] = None

    def to_json_dict(self, include_per_example: bool = True) -> dict:
        out = {
            "variant": self.variant.name,
            "aggregation": self.variant.aggregation,
            "n_examples": self.n_examples,
            "score": round(self.score, 2),
        }
        if include_per_example and self.per_example_scores is not None:
            out["per_example"] = [round(s, 2) for s in self.per_example_scores]
        return out


def score_set(pairs: Sequence[tuple[Tokens, Sequence[Tokens]]], variant) -> ScoreReport:
    """Dispatch to the sentence mean or the corpus accumulation."""
    variant = get_variant(variant)
    if variant.aggregation == "sentence":
        scores = tuple(sentence_bleu(cand, refs, variant).score for cand, refs in pairs)
        mean = fsum(scores) / len(scores) if scores else 0.0
        return ScoreReport(
            variant=variant,
            n_examples=len(pairs),
            score=mean,
            per_example_scores=scores,
        )
    breakdown = corpus_bleu(pairs, variant)
    return ScoreReport(
        variant=variant,
        n_examples=len(pairs),
        score=breakdown.score,
        breakdown=breakdown,
    )


def score_all_variants(
    pairs: Sequence[tuple[Tokens, Sequence[Tokens]]],
    names: Iterable[str] = VARIANT_NAMES,
) -> list[ScoreReport]:
    return [score_set(pairs, name) for name in names]
