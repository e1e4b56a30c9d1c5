"""Corpus ingestion, tokenization, stoplists, and basic corpus statistics.

Corpora are immutable once loaded.  Two wire formats are supported: JSON
Lines records and aligned parallel files (one example per line, equal line
counts).  Tokenization covers three modes:

* ``passthrough`` -- the input is already tokenized on single spaces and is
  taken verbatim (the default for published code/comment corpora).
* ``whitespace`` -- split on runs of whitespace.
* ``punctuation`` -- whitespace split, then every character that is not
  alphanumeric or an underscore becomes its own token.

After splitting, subtoken expansion, lowercasing, and stoplist filtering
apply in that order (never for passthrough).
"""

from __future__ import annotations

import json
import math
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import DataError

TOKENIZER_MODES = ("whitespace", "punctuation", "passthrough")

_PUNCT_SPLIT_RE = re.compile(r"\w+|[^\w\s]")
# Order matters: acronym runs, capitalized words, lowercase runs, digit
# runs, then anything else (kept so the concatenation invariant holds).
_SUBTOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|[0-9]+|[^A-Za-z0-9_\s]+")

#: The 30 reserved Java keywords used as the default code stoplist.
JAVA_KEYWORD_STOPLIST = frozenset(
    {
        "public", "private", "protected", "static", "final", "void",
        "int", "long", "double", "float", "boolean", "char", "byte",
        "short", "class", "interface", "return", "if", "else", "for",
        "while", "do", "switch", "case", "break", "continue", "new",
        "this", "super", "null",
    }
)

#: Standalone ASCII punctuation tokens (single characters).
PUNCTUATION_STOPLIST = frozenset(string.punctuation)


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens of one code or comment side.

    Tokens are non-empty and contain no whitespace; ``tokenizer_id`` names
    the configuration that produced them.
    """

    tokens: tuple[str, ...]
    tokenizer_id: str = "unspecified"

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok:
                raise ValueError("empty token in sequence")
            if any(ch.isspace() for ch in tok):
                raise ValueError(f"token contains whitespace: {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer settings; ``passthrough`` ignores every post-processing flag."""

    mode: str = "passthrough"
    subtoken_split: bool = False
    lowercase: bool = False
    stoplist: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.mode not in TOKENIZER_MODES:
            raise ValueError(f"unknown tokenizer mode: {self.mode!r}")
        if self.stoplist is not None:
            object.__setattr__(self, "stoplist", frozenset(self.stoplist))

    @property
    def config_id(self) -> str:
        if self.mode == "passthrough":
            return "passthrough"
        parts = [self.mode]
        if self.subtoken_split:
            parts.append("sub")
        if self.lowercase:
            parts.append("lower")
        if self.stoplist:
            parts.append(f"stop{len(self.stoplist)}")
        return "+".join(parts)


PASSTHROUGH = TokenizerConfig(mode="passthrough")


@dataclass(frozen=True)
class ParallelExample:
    """One (code, comment) pair with optional provenance metadata."""

    id: str
    source: TokenSequence
    target: TokenSequence
    meta: Optional[dict] = None


@dataclass(frozen=True)
class ParallelCorpus:
    examples: tuple[ParallelExample, ...]
    split: str = "unsplit"
    fold: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if self.split not in ("train", "valid", "test", "unsplit"):
            raise ValueError(f"unknown split: {self.split!r}")
        if self.fold is not None:
            if self.split not in ("train", "test"):
                raise ValueError("fold is only meaningful for train/test splits")
            if self.fold < 0:
                raise ValueError("fold must be >= 0")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def sources(self) -> list[TokenSequence]:
        return [ex.source for ex in self.examples]

    def targets(self) -> list[TokenSequence]:
        return [ex.target for ex in self.examples]


@dataclass(frozen=True)
class LoadReport:
    """Per-load accounting of lines that could not be used."""

    n_loaded: int = 0
    skipped: tuple[tuple[int, str], ...] = ()  # (1-based line number, reason)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)


def split_subtokens(token: str, lowercase: bool = True) -> list[str]:
    """Split a compound identifier into its constituent parts.

    Boundaries: underscores (dropped), lower-to-upper camelCase
    transitions, digit/letter transitions, and the end of an acronym run
    ("HTTPServer" -> HTTP, Server).  Punctuation runs are preserved so
    that the concatenated parts reproduce the underscore-stripped input.
    The original compound token is *not* included; index-side expansion
    adds it where wanted.
    """
    if not token:
        raise ValueError("cannot split an empty token")
    parts = _SUBTOKEN_RE.findall(token)
    if lowercase:
        parts = [p.lower() for p in parts]
    return parts


def apply_stoplist(seq: TokenSequence, stoplist: Iterable[str]) -> TokenSequence:
    """Order-preserving removal of stoplisted tokens."""
    stop = frozenset(stoplist)
    if not stop:
        return seq
    return TokenSequence(
        tuple(t for t in seq.tokens if t not in stop), seq.tokenizer_id
    )


def tokenize(text: str, config: TokenizerConfig = PASSTHROUGH) -> TokenSequence:
    """Tokenize ``text`` under ``config``; empty text gives an empty sequence."""
    if config.mode == "passthrough":
        tokens = [t for t in text.split(" ") if t]
        return TokenSequence(tuple(tokens), config.config_id)

    if config.mode == "whitespace":
        tokens = text.split()
    else:  # punctuation
        tokens = _PUNCT_SPLIT_RE.findall(text)

    if config.subtoken_split:
        expanded: list[str] = []
        for tok in tokens:
            expanded.extend(split_subtokens(tok, lowercase=False))
        tokens = expanded
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.stoplist:
        tokens = [t for t in tokens if t not in config.stoplist]
    return TokenSequence(tuple(tokens), config.config_id)


def default_stoplist() -> frozenset[str]:
    """Java reserved keywords plus standalone punctuation tokens."""
    return JAVA_KEYWORD_STOPLIST | PUNCTUATION_STOPLIST


def top_k_stoplist(side: Sequence[TokenSequence], k: int) -> frozenset[str]:
    """The ``k`` most frequent tokens of a corpus side (ties broken lexically)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    counts = Counter()
    for seq in side:
        counts.update(seq.tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(tok for tok, _ in ranked[:k])


def _make_example(
    idx: str, src: str, tgt: str, meta, tokenizer: TokenizerConfig, allow_empty: bool
) -> ParallelExample:
    source = tokenize(src, tokenizer)
    target = tokenize(tgt, tokenizer)
    if not allow_empty and (len(source) == 0 or len(target) == 0):
        raise DataError("empty side (pass allow_empty to accept)")
    return ParallelExample(id=idx, source=source, target=target, meta=meta)


def load_jsonl(
    path,
    tokenizer: TokenizerConfig = PASSTHROUGH,
    strict: bool = False,
    allow_empty: bool = False,
    split: str = "unsplit",
    fold: Optional[int] = None,
) -> tuple[ParallelCorpus, LoadReport]:
    """Load a JSONL corpus: one ``{"id"?, "src", "tgt", "meta"?}`` object per line.

    Missing ids default to the 1-based line number.  In lenient mode
    (default) malformed lines are skipped and reported; in strict mode the
    first malformed line raises.  Duplicate explicit ids always raise.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    examples: list[ParallelExample] = []
    skipped: list[tuple[int, str]] = []
    seen_ids: dict[str, int] = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            reason = "blank line"
            if strict:
                raise DataError(f"{path}:{lineno}: {reason}")
            skipped.append((lineno, reason))
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise DataError("record is not an object")
            if "src" not in rec or "tgt" not in rec:
                raise DataError("missing src/tgt field")
            idx = str(rec["id"]) if "id" in rec else str(lineno)
            meta = rec.get("meta")
            if meta is not None and not isinstance(meta, dict):
                raise DataError("meta is not an object")
            example = _make_example(
                idx, str(rec["src"]), str(rec["tgt"]), meta, tokenizer, allow_empty
            )
        except (json.JSONDecodeError, DataError, ValueError) as exc:
            reason = str(exc)
            if strict:
                raise DataError(f"{path}:{lineno}: {reason}") from exc
            skipped.append((lineno, reason))
            continue
        if example.id in seen_ids:
            raise DataError(
                f"duplicate id {example.id!r} at lines "
                f"{seen_ids[example.id]} and {lineno}"
            )
        seen_ids[example.id] = lineno
        examples.append(example)

    corpus = ParallelCorpus(tuple(examples), split=split, fold=fold)
    return corpus, LoadReport(n_loaded=len(examples), skipped=tuple(skipped))


def load_parallel_files(
    src_path,
    tgt_path,
    tokenizer: TokenizerConfig = PASSTHROUGH,
    allow_empty: bool = False,
    split: str = "unsplit",
    fold: Optional[int] = None,
) -> ParallelCorpus:
    """Load aligned line-per-example files; example ids are 0-based line numbers."""
    src_path, tgt_path = Path(src_path), Path(tgt_path)
    try:
        src_lines = src_path.read_text(encoding="utf-8").splitlines()
        tgt_lines = tgt_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read parallel files: {exc}") from exc
    if len(src_lines) != len(tgt_lines):
        raise DataError(
            f"line count mismatch {len(src_lines)} vs {len(tgt_lines)} "
            f"({src_path} vs {tgt_path})"
        )
    examples = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        try:
            examples.append(_make_example(str(i), src, tgt, None, tokenizer, allow_empty))
        except (DataError, ValueError) as exc:
            raise DataError(f"line {i}: {exc}") from exc
    return ParallelCorpus(tuple(examples), split=split, fold=fold)


@dataclass(frozen=True)
class SideStats:
    n_tokens: int = 0
    vocab_size: int = 0
    mean_len: float = 0.0
    percentiles: dict = field(default_factory=dict)  # {25, 50, 75, 90} -> length


@dataclass(frozen=True)
class CorpusStats:
    n_examples: int
    source: SideStats
    target: SideStats


def _nearest_rank(sorted_vals: list[int], pct: int) -> int:
    # Nearest-rank percentile: ceil(p/100 * n)-th smallest, 1-based.
    n = len(sorted_vals)
    if n == 0:
        return 0
    rank = max(1, math.ceil(pct / 100.0 * n))
    return sorted_vals[rank - 1]


def _side_stats(seqs: list[TokenSequence]) -> SideStats:
    lengths = sorted(len(s) for s in seqs)
    vocab = set()
    for s in seqs:
        vocab.update(s.tokens)
    total = sum(lengths)
    mean = total / len(lengths) if lengths else 0.0
    pcts = {p: _nearest_rank(lengths, p) for p in (25, 50, 75, 90)}
    return SideStats(n_tokens=total, vocab_size=len(vocab), mean_len=mean, percentiles=pcts)


def corpus_stats(corpus: ParallelCorpus) -> CorpusStats:
    """Deterministic summary: counts, vocabulary sizes, nearest-rank length percentiles."""
    return CorpusStats(
        n_examples=len(corpus),
        source=_side_stats(corpus.sources()),
        target=_side_stats(corpus.targets()),
    )
