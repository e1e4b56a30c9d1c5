"""Embedded BM25 retrieval baseline: index training code, query with test
code, and hand back the nearest neighbor's comment as the "generated"
comment.

The index is frozen after build and safe to share across threads.  The
scoring function is BM25 with ``idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5))``
and the classic ``tf (k1+1) / (tf + k1 (1 - b + b dl/avgdl))`` term
component; duplicate query terms contribute once per occurrence.
"""

from __future__ import annotations

import io
import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path
from typing import Optional, Sequence, Union

from .corpus import ParallelCorpus, TokenSequence, TokenizerConfig, split_subtokens, tokenize
from .errors import DataError
from .metrics import ScoreReport, get_variant, score_set

_SNAPSHOT_MAGIC = b"CBIX"
_SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class AnalyzerConfig:
    """Term pipeline applied identically at index and query time:
    tokenize, optionally add the split forms of compound identifiers
    alongside the originals, then drop stoplisted terms."""

    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    expand_subtokens: bool = False
    stoplist: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "stoplist", frozenset(self.stoplist))

    def analyze(self, code: Union[str, TokenSequence]) -> list[str]:
        text = code if isinstance(code, str) else code.text()
        cfg = self.tokenizer
        # Split with case intact so expansion sees camelCase boundaries;
        # lowercasing applies afterwards (never under passthrough).
        raw = tokenize(
            text,
            TokenizerConfig(mode=cfg.mode, subtoken_split=cfg.subtoken_split),
        )
        lower = cfg.lowercase and cfg.mode != "passthrough"
        terms: list[str] = []
        for tok in raw:
            emitted = tok.lower() if lower else tok
            terms.append(emitted)
            if self.expand_subtokens:
                parts = split_subtokens(tok, lowercase=lower)
                if parts != [emitted]:
                    terms.extend(parts)
        stop = (cfg.stoplist or frozenset()) | self.stoplist
        if stop:
            terms = [t for t in terms if t not in stop]
        return terms

    def to_json_dict(self) -> dict:
        tk = self.tokenizer
        return {
            "tokenizer": {
                "mode": tk.mode,
                "subtoken_split": tk.subtoken_split,
                "lowercase": tk.lowercase,
                "stoplist": sorted(tk.stoplist) if tk.stoplist else None,
            },
            "expand_subtokens": self.expand_subtokens,
            "stoplist": sorted(self.stoplist),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "AnalyzerConfig":
        tk = data["tokenizer"]
        stop = tk.get("stoplist")
        return cls(
            tokenizer=TokenizerConfig(
                mode=tk["mode"],
                subtoken_split=tk["subtoken_split"],
                lowercase=tk["lowercase"],
                stoplist=frozenset(stop) if stop is not None else None,
            ),
            expand_subtokens=data["expand_subtokens"],
            stoplist=frozenset(data["stoplist"]),
        )


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


DEFAULT_PARAMS = Bm25Params()


@dataclass(frozen=True)
class Index:
    """Frozen inverted index over analyzed source tokens."""

    postings: dict  # term -> {doc_id: tf}, doc ids ascending
    doc_lengths: tuple[int, ...]
    avgdl: float
    n_docs: int
    doc_ids: tuple[str, ...]  # original example ids, by doc position
    doc_payloads: tuple[TokenSequence, ...]
    analyzer: AnalyzerConfig

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))


def build_index(train: ParallelCorpus, analyzer: AnalyzerConfig) -> Index:
    if len(train) == 0:
        raise DataError("cannot index an empty corpus")
    postings: dict[str, dict[int, int]] = {}
    doc_lengths: list[int] = []
    payloads: list[TokenSequence] = []
    ids: list[str] = []
    for doc_id, example in enumerate(train):
        terms = analyzer.analyze(example.source)
        doc_lengths.append(len(terms))
        payloads.append(example.target)
        ids.append(example.id)
        for term, tf in sorted(Counter(terms).items()):
            postings.setdefault(term, {})[doc_id] = tf
    n = len(doc_lengths)
    return Index(
        postings=postings,
        doc_lengths=tuple(doc_lengths),
        avgdl=fsum(doc_lengths) / n,
        n_docs=n,
        doc_ids=tuple(ids),
        doc_payloads=tuple(payloads),
        analyzer=analyzer,
    )


def _tf_component(tf: int, dl: int, avgdl: float, params: Bm25Params) -> float:
    ratio = dl / avgdl if avgdl > 0 else 0.0
    return tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * ratio))


def score_doc(
    index: Index,
    query_terms: Sequence[str],
    doc_id: int,
    params: Bm25Params = DEFAULT_PARAMS,
) -> float:
    """BM25 score of one document for the given query terms."""
    if not 0 <= doc_id < index.n_docs:
        raise ValueError(f"unknown doc id {doc_id}")
    dl = index.doc_lengths[doc_id]
    score = 0.0
    for term, qtf in Counter(query_terms).items():
        plist = index.postings.get(term)
        if not plist:
            continue
        tf = plist.get(doc_id)
        if tf is None:
            continue
        score += qtf * index.idf(term) * _tf_component(tf, dl, index.avgdl, params)
    return score


def retrieve(
    index: Index,
    code: Union[str, TokenSequence],
    k: int,
    params: Bm25Params = DEFAULT_PARAMS,
) -> list[tuple[int, float]]:
    """Top-k documents by BM25, ties broken by ascending doc id; documents
    sharing no term with the query are never returned."""
    if k < 1:
        raise ValueError("k must be >= 1")
    terms = index.analyzer.analyze(code)
    accum: dict[int, float] = {}
    for term, qtf in Counter(terms).items():
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist.items():
            w = qtf * idf * _tf_component(tf, index.doc_lengths[doc_id], index.avgdl, params)
            accum[doc_id] = accum.get(doc_id, 0.0) + w
    ranked = sorted(accum.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


@dataclass
class RunCounters:
    fallbacks: int = 0


def ir_generate(
    index: Index,
    code: Union[str, TokenSequence],
    params: Bm25Params = DEFAULT_PARAMS,
    counters: Optional[RunCounters] = None,
) -> TokenSequence:
    """The nearest neighbor's comment, or the empty sequence (counted as a
    fallback) when nothing matches."""
    hits = retrieve(index, code, 1, params)
    if not hits:
        if counters is not None:
            counters.fallbacks += 1
        return TokenSequence((), "ir-fallback")
    return index.doc_payloads[hits[0][0]]


@dataclass(frozen=True)
class IrExampleRow:
    example_id: str
    retrieved_id: Optional[str]
    bm25_score: float
    candidate: TokenSequence
    reference: TokenSequence


@dataclass(frozen=True)
class IrEvalResult:
    report: ScoreReport
    fallback_count: int
    rows: tuple[IrExampleRow, ...]


def ir_eval(
    index: Index,
    test: ParallelCorpus,
    variant,
    params: Bm25Params = DEFAULT_PARAMS,
    workers: int = 1,
) -> IrEvalResult:
    """Retrieve a candidate comment for every test source and score the
    candidate/reference pairs under the requested variant.  With
    ``workers`` > 1 retrieval runs in a thread pool; results are collected
    in example order either way."""
    variant = get_variant(variant)
    if len(test) == 0:
        raise DataError("empty test corpus")
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_hits = list(pool.map(lambda ex: retrieve(index, ex.source, 1, params), test))
    else:
        all_hits = [retrieve(index, ex.source, 1, params) for ex in test]
    rows = []
    fallbacks = 0
    pairs = []
    for example, hits in zip(test, all_hits):
        if hits:
            doc_id, bm25 = hits[0]
            cand = index.doc_payloads[doc_id]
            retrieved: Optional[str] = index.doc_ids[doc_id]
        else:
            fallbacks += 1
            cand = TokenSequence((), "ir-fallback")
            retrieved = None
            bm25 = 0.0
        rows.append(IrExampleRow(example.id, retrieved, bm25, cand, example.target))
        pairs.append((cand, [example.target]))
    report = score_set(pairs, variant)
    return IrEvalResult(report=report, fallback_count=fallbacks, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Binary snapshot


def _pack_str(buf: io.BytesIO, s: str) -> None:
    raw = s.encode("utf-8")
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)


def _unpack_str(buf: io.BytesIO) -> str:
    (n,) = struct.unpack("<I", buf.read(4))
    return buf.read(n).decode("utf-8")


def dump_index(index: Index) -> bytes:
    """Serialize to a versioned binary snapshot.  The layout is fully
    deterministic, so equal indexes produce identical bytes."""
    buf = io.BytesIO()
    buf.write(_SNAPSHOT_MAGIC)
    buf.write(struct.pack("<H", _SNAPSHOT_VERSION))
    _pack_str(buf, json.dumps(index.analyzer.to_json_dict(), sort_keys=True))
    buf.write(struct.pack("<Id", index.n_docs, index.avgdl))
    for dl in index.doc_lengths:
        buf.write(struct.pack("<I", dl))
    for doc_id in index.doc_ids:
        _pack_str(buf, doc_id)
    for payload in index.doc_payloads:
        _pack_str(buf, payload.tokenizer_id)
        buf.write(struct.pack("<I", len(payload)))
        for tok in payload:
            _pack_str(buf, tok)
    terms = sorted(index.postings)
    buf.write(struct.pack("<I", len(terms)))
    for term in terms:
        _pack_str(buf, term)
        plist = index.postings[term]
        buf.write(struct.pack("<I", len(plist)))
        for doc_id, tf in plist.items():  # ascending doc order by construction
            buf.write(struct.pack("<II", doc_id, tf))
    return buf.getvalue()


def load_index_bytes(data: bytes) -> Index:
    buf = io.BytesIO(data)
    magic = buf.read(4)
    if magic != _SNAPSHOT_MAGIC:
        raise DataError("not an index snapshot (bad magic)")
    (version,) = struct.unpack("<H", buf.read(2))
    if version != _SNAPSHOT_VERSION:
        raise DataError(f"unsupported snapshot version {version}")
    analyzer = AnalyzerConfig.from_json_dict(json.loads(_unpack_str(buf)))
    n_docs, avgdl = struct.unpack("<Id", buf.read(12))
    doc_lengths = tuple(struct.unpack("<I", buf.read(4))[0] for _ in range(n_docs))
    doc_ids = tuple(_unpack_str(buf) for _ in range(n_docs))
    payloads = []
    for _ in range(n_docs):
        tokenizer_id = _unpack_str(buf)
        (n_tokens,) = struct.unpack("<I", buf.read(4))
        tokens = tuple(_unpack_str(buf) for _ in range(n_tokens))
        payloads.append(TokenSequence(tokens, tokenizer_id))
    (n_terms,) = struct.unpack("<I", buf.read(4))
    postings: dict[str, dict[int, int]] = {}
    for _ in range(n_terms):
        term = _unpack_str(buf)
        (n_postings,) = struct.unpack("<I", buf.read(4))
        plist: dict[int, int] = {}
        for _ in range(n_postings):
            doc_id, tf = struct.unpack("<II", buf.read(8))
            plist[doc_id] = tf
        postings[term] = plist
    return Index(
        postings=postings,
        doc_lengths=doc_lengths,
        avgdl=avgdl,
        n_docs=n_docs,
        doc_ids=doc_ids,
        doc_payloads=tuple(payloads),
        analyzer=analyzer,
    )


def save_index(index: Index, path) -> None:
    Path(path).write_bytes(dump_index(index))


def load_index(path) -> Index:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read snapshot {path}: {exc}") from exc
    return load_index_bytes(data)
