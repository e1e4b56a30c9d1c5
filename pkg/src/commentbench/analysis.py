"""Corpus-level analyses: rank/frequency (Zipf) tables, frequent-n-gram
ablation curves, bivariate input/output similarity sampling, Spearman
dependence with Benjamini-Hochberg adjustment, and a binnable 2-D grid.

Randomized operations take an explicit seed and are bit-reproducible for
equal inputs and seeds.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from math import fsum
from typing import Optional, Sequence

from .corpus import ParallelCorpus, TokenSequence
from .errors import DataError
from .metrics import get_variant, sentence_bleu

_M2 = get_variant("M2")

#: Similarity threshold of the "non-zero" pair filter, on the 0..1 scale.
DEFAULT_EPSILON = 1e-5

#: Permutation count above which the exact permutation test switches to
#: seeded Monte Carlo sampling.
_MAX_EXACT_PERMS = 100_000


# ---------------------------------------------------------------------------
# Zipf tables


@dataclass(frozen=True)
class ZipfTable:
    """N-grams ranked by count (descending, ties lexicographic)."""

    n: int
    rows: tuple[tuple[tuple[str, ...], int, float], ...]  # (ngram, count, rel_freq)
    total_ngrams: int


def zipf_table(corpus_side: Sequence[TokenSequence], n: int) -> ZipfTable:
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter = Counter()
    for seq in corpus_side:
        tokens = tuple(seq)
        counts.update(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    total = sum(counts.values())
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    rows = tuple((gram, count, count / total) for gram, count in ranked)
    return ZipfTable(n=n, rows=rows, total_ngrams=total)


def zipf_slope(table: ZipfTable, head: int) -> float:
    """Least-squares slope of ln(rel_freq) against ln(rank) over the top
    ``head`` rows; more negative means more repetitive, template-like text."""
    if head < 2:
        raise ValueError("head must be >= 2")
    if len(table.rows) < head:
        raise ValueError(f"table has {len(table.rows)} rows; need >= {head}")
    xs = [math.log(rank) for rank in range(1, head + 1)]
    ys = [math.log(table.rows[i][2]) for i in range(head)]
    x_mean = fsum(xs) / head
    y_mean = fsum(ys) / head
    sxy = fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    sxx = fsum((x - x_mean) ** 2 for x in xs)
    return sxy / sxx


# ---------------------------------------------------------------------------
# Frequent-n-gram ablation


@dataclass(frozen=True)
class AblationCurve:
    n: int
    points: tuple[tuple[int, float], ...]  # (k, mean sentence M2 score)
    seed: int


def _placeholder(rank: int, pos: int, vocab: frozenset) -> str:
    tok = f"⟨rnd-{rank}-{pos}⟩"
    while tok in vocab:  # never collides in practice; guarded anyway
        tok += "⟩"
    return tok


def _replace_top(
    tokens: tuple[str, ...],
    rank_of: dict[tuple[str, ...], int],
    n: int,
    vocab: frozenset,
) -> tuple[str, ...]:
    out = list(tokens)
    i = 0
    limit = len(tokens) - n
    while i <= limit:
        rank = rank_of.get(tuple(tokens[i : i + n]))
        if rank is not None:
            for pos in range(n):
                out[i + pos] = _placeholder(rank, pos, vocab)
            i += n
        else:
            i += 1
    return tuple(out)


def ablation_curve(
    targets: Sequence[TokenSequence], n: int, k_max: int = 100, seed: int = 0
) -> AblationCurve:
    """Replace every occurrence of the top-k most frequent n-grams with
    out-of-vocabulary placeholders (length-preserving) and record the mean
    sentence M2 score of perturbed-vs-original for k = 0..k_max.

    Placeholders are deterministic, so the curve does not depend on the
    seed; it is recorded for provenance.  The k = 0 point is exactly 100
    whenever every target has at least 4 tokens.
    """
    if n not in (1, 3):
        raise ValueError("ablation order must be 1 or 3")
    if not targets:
        raise DataError("ablation needs a non-empty target side")
    table = zipf_table(targets, n)
    ranked_types = [gram for gram, _, _ in table.rows]
    vocab = frozenset(tok for seq in targets for tok in seq)
    originals = [tuple(seq) for seq in targets]

    points = []
    for k in range(k_max + 1):
        rank_of = {gram: r + 1 for r, gram in enumerate(ranked_types[:k])}
        if k == 0:
            perturbed = originals
        else:
            perturbed = [_replace_top(toks, rank_of, n, vocab) for toks in originals]
        scores = [
            sentence_bleu(pert, [orig], _M2).score
            for pert, orig in zip(perturbed, originals)
        ]
        points.append((k, fsum(scores) / len(scores)))
    return AblationCurve(n=n, points=tuple(points), seed=seed)


# ---------------------------------------------------------------------------
# Bivariate input/output similarity


@dataclass(frozen=True)
class BivariateSample:
    """(input similarity, output similarity) pairs on the 0..100 scale."""

    pairs: tuple[tuple[float, float], ...]
    count_requested: int
    epsilon: float  # on the 0..1 scale
    seed: int

    def surviving(self) -> list[tuple[float, float]]:
        threshold = self.epsilon * 100.0
        return [(x, y) for x, y in self.pairs if x > threshold and y > threshold]


def sample_bivariate(
    corpus: ParallelCorpus,
    count: int = 10_000,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
) -> BivariateSample:
    """Draw ``count`` random pairs of distinct examples (with replacement
    across pairs) and score source-vs-source and target-vs-target with
    sentence M2; the first-drawn example serves as the reference."""
    n = len(corpus)
    if n < 2:
        raise DataError("bivariate sampling needs at least 2 examples")
    rng = random.Random(seed)
    examples = corpus.examples
    pairs = []
    for _ in range(count):
        i = rng.randrange(n)
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        in_sim = sentence_bleu(examples[j].source, [examples[i].source], _M2).score
        out_sim = sentence_bleu(examples[j].target, [examples[i].target], _M2).score
        pairs.append((in_sim, out_sim))
    return BivariateSample(
        pairs=tuple(pairs), count_requested=count, epsilon=epsilon, seed=seed
    )


# ---------------------------------------------------------------------------
# Spearman / Benjamini-Hochberg


def _average_ranks(values: Sequence[float]) -> list[float]:
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    n = len(xs)
    x_mean = fsum(xs) / n
    y_mean = fsum(ys) / n
    sxy = fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    sxx = fsum((x - x_mean) ** 2 for x in xs)
    syy = fsum((y - y_mean) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _permutation_p(rx: list[float], ry: list[float], rho_obs: float, seed: int) -> float:
    n = len(rx)
    target = abs(rho_obs) - 1e-12
    if math.factorial(n) <= _MAX_EXACT_PERMS:
        hits = total = 0
        for perm in itertools.permutations(ry):
            r = _pearson(rx, perm)
            total += 1
            if r is not None and abs(r) >= target:
                hits += 1
        return hits / total
    rng = random.Random(seed)
    shuffled = list(ry)
    hits = 0
    for _ in range(_MAX_EXACT_PERMS):
        rng.shuffle(shuffled)
        r = _pearson(rx, shuffled)
        if r is not None and abs(r) >= target:
            hits += 1
    return (1 + hits) / (1 + _MAX_EXACT_PERMS)


def spearman(
    xs: Sequence[float], ys: Sequence[float], seed: int = 0
) -> tuple[Optional[float], Optional[float]]:
    """Spearman's rho with average ranks for ties, plus a two-sided p.

    The p-value uses the t approximation with n-2 degrees of freedom; for
    n < 10 it is replaced by an exact permutation test over all n!
    orderings (seeded Monte Carlo with 100k permutations once n! exceeds
    100k).  A constant input yields the undefined marker (None, None).
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 3:
        raise ValueError("need at least 3 points")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rho = _pearson(rx, ry)
    if rho is None:
        return None, None
    if n < 10:
        return rho, _permutation_p(rx, ry, rho, seed)
    if abs(rho) >= 1.0:
        return rho, 0.0
    from scipy.stats import t as t_dist

    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, float(2.0 * t_dist.sf(abs(t), n - 2))


@dataclass(frozen=True)
class CorrelationResult:
    """Spearman dependence over all pairs and over the above-epsilon subset.

    None marks an undefined correlation (constant ranks or fewer than 3
    surviving pairs).
    """

    rho_nonzero: Optional[float]
    p_nonzero: Optional[float]
    rho_all: Optional[float]
    p_all: Optional[float]
    n_nonzero: int


def dependence_report(sample: BivariateSample) -> CorrelationResult:
    if not sample.pairs:
        raise DataError("empty bivariate sample")

    def _corr(pairs):
        if len(pairs) < 3:
            return None, None
        return spearman([p[0] for p in pairs], [p[1] for p in pairs], seed=sample.seed)

    surviving = sample.surviving()
    rho_nz, p_nz = _corr(surviving)
    rho_all, p_all = _corr(list(sample.pairs))
    return CorrelationResult(
        rho_nonzero=rho_nz,
        p_nonzero=p_nz,
        rho_all=rho_all,
        p_all=p_all,
        n_nonzero=len(surviving),
    )


def bh_adjust(pvals: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjustment, returned in input order."""
    for p in pvals:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value out of [0, 1]: {p}")
    m = len(pvals)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: pvals[i])
    adjusted = [0.0] * m
    running = 1.0
    for pos in range(m - 1, -1, -1):
        idx = order[pos]
        running = min(running, pvals[idx] * m / (pos + 1))
        adjusted[idx] = min(running, 1.0)
    return adjusted


# ---------------------------------------------------------------------------
# Binned similarity grid


@dataclass(frozen=True)
class HexbinGrid:
    """Rectangular count grid over [0,100]^2; hexagons are a plot-time
    rendering, the counts are the contract."""

    bins: int
    cells: tuple[tuple[float, float, int], ...]  # (x_center, y_center, count)

    @property
    def total(self) -> int:
        return sum(c for _, _, c in self.cells)


def hexbin(sample: BivariateSample, bins: int) -> HexbinGrid:
    """Count surviving (above-epsilon) pairs on a bins x bins grid."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts = [[0] * bins for _ in range(bins)]
    width = 100.0 / bins
    for x, y in sample.surviving():
        ix = min(int(x / width), bins - 1)
        iy = min(int(y / width), bins - 1)
        counts[ix][iy] += 1
    cells = tuple(
        ((ix + 0.5) * width, (iy + 0.5) * width, counts[ix][iy])
        for ix in range(bins)
        for iy in range(bins)
    )
    return HexbinGrid(bins=bins, cells=cells)
