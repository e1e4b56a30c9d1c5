import math

import pytest

from _synth import unique_source_corpus

from commentbench.corpus import (
    ParallelCorpus,
    ParallelExample,
    TokenizerConfig,
    TokenSequence,
)
from commentbench.errors import DataError
from commentbench.metrics import VARIANT_NAMES
from commentbench.retrieval import (
    AnalyzerConfig,
    Bm25Params,
    build_index,
    dump_index,
    ir_eval,
    ir_generate,
    load_index,
    load_index_bytes,
    retrieve,
    RunCounters,
    save_index,
    score_doc,
)

WS = AnalyzerConfig(tokenizer=TokenizerConfig(mode="whitespace"))


def _corpus(rows):
    return ParallelCorpus(
        tuple(
            ParallelExample(
                str(i),
                TokenSequence(tuple(src.split())),
                TokenSequence(tuple(tgt.split())),
            )
            for i, (src, tgt) in enumerate(rows)
        )
    )


THREE_DOCS = _corpus(
    [
        ("open file and read file", "opens then reads"),
        ("write file", "writes data out"),
        ("close socket", "closes the socket"),
    ]
)


# ---------------------------------------------------------------------------
# analyzer


def test_analyzer_expansion_keeps_original_and_parts():
    cfg = AnalyzerConfig(
        tokenizer=TokenizerConfig(mode="whitespace"), expand_subtokens=True
    )
    assert cfg.analyze("readFile x") == ["readFile", "read", "File", "x"]
    lower = AnalyzerConfig(
        tokenizer=TokenizerConfig(mode="whitespace", lowercase=True),
        expand_subtokens=True,
    )
    assert lower.analyze("readFile") == ["readfile", "read", "file"]


def test_analyzer_stoplist_applies_after_expansion():
    cfg = AnalyzerConfig(
        tokenizer=TokenizerConfig(mode="whitespace"),
        expand_subtokens=True,
        stoplist=frozenset({"get"}),
    )
    assert cfg.analyze("getFoo get") == ["getFoo", "Foo"]


def test_analyzer_accepts_token_sequences():
    seq = TokenSequence(("open", "file"))
    assert WS.analyze(seq) == ["open", "file"]


# ---------------------------------------------------------------------------
# index construction


def test_build_index_single_doc():
    idx = build_index(_corpus([("alpha beta", "a comment here now")]), WS)
    assert idx.n_docs == 1
    assert idx.avgdl == 2.0
    assert idx.doc_lengths == (2,)
    assert idx.postings == {"alpha": {0: 1}, "beta": {0: 1}}


def test_build_index_all_tokens_stopped_doc_unreachable():
    cfg = AnalyzerConfig(
        tokenizer=TokenizerConfig(mode="whitespace"), stoplist=frozenset({"public", "void"})
    )
    idx = build_index(_corpus([("public void", "stopped doc comment x"), ("real code", "kept")]), cfg)
    assert idx.doc_lengths[0] == 0
    assert retrieve(idx, "public void", 5) == []


def test_build_index_three_doc_postings_hand_built():
    idx = build_index(THREE_DOCS, WS)
    assert idx.n_docs == 3
    assert idx.avgdl == 3.0
    assert idx.postings["file"] == {0: 2, 1: 1}
    assert idx.postings["open"] == {0: 1}
    assert idx.postings["write"] == {1: 1}
    assert idx.postings["socket"] == {2: 1}
    assert idx.df("file") == 2


def test_build_index_empty_corpus():
    with pytest.raises(DataError):
        build_index(_corpus([]), WS)


# ---------------------------------------------------------------------------
# scoring


def test_score_doc_no_matching_terms_is_zero():
    idx = build_index(THREE_DOCS, WS)
    assert score_doc(idx, ["zzz"], 0) == 0.0
    assert score_doc(idx, ["socket"], 0) == 0.0


def test_score_doc_single_doc_single_term_formula():
    # N = 1, df = 1: idf = ln(1 + 0.5/1.5) = ln(4/3); tf = 1 at dl = avgdl
    # makes the tf component exactly 1.
    idx = build_index(_corpus([("term other", "c o m m e n t")]), WS)
    assert score_doc(idx, ["term"], 0) == pytest.approx(math.log(4 / 3), abs=1e-12)


def test_score_doc_duplicate_docs_score_equally():
    idx = build_index(_corpus([("a b c", "x"), ("a b c", "y")]), WS)
    assert score_doc(idx, ["a", "c"], 0) == score_doc(idx, ["a", "c"], 1)


def test_score_doc_unknown_doc():
    idx = build_index(THREE_DOCS, WS)
    with pytest.raises(ValueError):
        score_doc(idx, ["file"], 7)


def test_score_doc_monotone_in_tf():
    low = build_index(_corpus([("file x y", "c"), ("other q r", "c2")]), WS)
    high = build_index(_corpus([("file file y", "c"), ("other q r", "c2")]), WS)
    assert score_doc(high, ["file"], 0) >= score_doc(low, ["file"], 0)


def test_retrieve_three_doc_fixture_hand_scored():
    idx = build_index(THREE_DOCS, WS)
    k1, b = 1.2, 0.75
    idf_file = math.log(1 + (3 - 2 + 0.5) / (2 + 0.5))
    idf_read = math.log(1 + (3 - 1 + 0.5) / (1 + 0.5))
    d0 = idf_read * (1 * 2.2) / (1 + k1 * (1 - b + b * 5 / 3)) + idf_file * (2 * 2.2) / (
        2 + k1 * (1 - b + b * 5 / 3)
    )
    d1 = idf_file * (1 * 2.2) / (1 + k1 * (1 - b + b * 2 / 3))
    hits = retrieve(idx, "read file", 5)
    assert [doc for doc, _ in hits] == [0, 1]
    assert hits[0][1] == pytest.approx(d0, abs=1e-12)
    assert hits[1][1] == pytest.approx(d1, abs=1e-12)
    assert score_doc(idx, ["read", "file"], 0) == pytest.approx(d0, abs=1e-12)


def test_retrieve_exact_source_ranks_first():
    idx = build_index(THREE_DOCS, WS)
    for i, ex in enumerate(THREE_DOCS):
        assert retrieve(idx, ex.source, 1)[0][0] == i


def test_retrieve_oov_query_empty():
    idx = build_index(THREE_DOCS, WS)
    assert retrieve(idx, "nothing matches here", 3) == []


def test_retrieve_tie_broken_by_doc_id():
    idx = build_index(_corpus([("dup code", "first"), ("dup code", "second")]), WS)
    hits = retrieve(idx, "dup code", 5)
    assert [doc for doc, _ in hits] == [0, 1]
    assert hits[0][1] == hits[1][1]


def test_retrieve_k_validation():
    idx = build_index(THREE_DOCS, WS)
    with pytest.raises(ValueError):
        retrieve(idx, "file", 0)


def test_bm25_params_validation():
    with pytest.raises(ValueError):
        Bm25Params(k1=-0.1)
    with pytest.raises(ValueError):
        Bm25Params(b=1.5)


# ---------------------------------------------------------------------------
# generation / evaluation


def test_ir_generate_duplicate_query_returns_its_comment():
    idx = build_index(THREE_DOCS, WS)
    out = ir_generate(idx, "write file")
    assert out.tokens == ("writes", "data", "out")


def test_ir_generate_fallback_counts():
    idx = build_index(THREE_DOCS, WS)
    counters = RunCounters()
    out = ir_generate(idx, "zebra quagga", counters=counters)
    assert out.tokens == ()
    assert counters.fallbacks == 1


def test_ir_generate_nearest_by_hand_is_doc0():
    idx = build_index(THREE_DOCS, WS)
    assert ir_generate(idx, "read file").tokens == ("opens", "then", "reads")


def test_ir_eval_self_retrieval_all_variants():
    corpus = unique_source_corpus(n=120, seed=5)
    idx = build_index(corpus, WS)
    for name in VARIANT_NAMES:
        result = ir_eval(idx, corpus, name)
        assert result.report.score == 100.0
        assert result.fallback_count == 0


def test_ir_eval_disjoint_test_all_fallbacks():
    idx = build_index(THREE_DOCS, WS)
    test = _corpus([("zzz qqq", "alpha beta gamma delta"), ("yyy www", "epsilon zeta eta theta")])
    result = ir_eval(idx, test, "M2")
    assert result.fallback_count == 2
    assert result.report.score == 0.0
    assert result.rows[0].retrieved_id is None


def test_ir_eval_rows_and_workers_match():
    corpus = unique_source_corpus(n=40, seed=6)
    idx = build_index(corpus, WS)
    serial = ir_eval(idx, corpus, "M2", workers=1)
    threaded = ir_eval(idx, corpus, "M2", workers=4)
    assert serial == threaded
    assert [r.example_id for r in serial.rows] == [ex.id for ex in corpus]


def test_ir_eval_empty_test():
    idx = build_index(THREE_DOCS, WS)
    with pytest.raises(DataError):
        ir_eval(idx, _corpus([]), "M2")


# ---------------------------------------------------------------------------
# snapshots


def test_snapshot_roundtrip_and_bit_identical_rebuild(tmp_path):
    corpus = unique_source_corpus(n=60, seed=12)
    cfg = AnalyzerConfig(
        tokenizer=TokenizerConfig(mode="whitespace", lowercase=True),
        expand_subtokens=True,
        stoplist=frozenset({"the"}),
    )
    idx = build_index(corpus, cfg)
    blob1 = dump_index(idx)
    blob2 = dump_index(build_index(corpus, cfg))
    assert blob1 == blob2

    path = tmp_path / "index.cbix"
    save_index(idx, path)
    loaded = load_index(path)
    assert loaded.analyzer == idx.analyzer
    assert loaded.doc_lengths == idx.doc_lengths
    assert loaded.avgdl == idx.avgdl
    assert loaded.postings == idx.postings
    assert loaded.doc_payloads == idx.doc_payloads
    assert dump_index(loaded) == blob1
    for ex in list(corpus)[:10]:
        assert retrieve(loaded, ex.source, 3) == retrieve(idx, ex.source, 3)


def test_snapshot_rejects_garbage(tmp_path):
    with pytest.raises(DataError):
        load_index_bytes(b"not a snapshot")
    missing = tmp_path / "nope.cbix"
    with pytest.raises(DataError):
        load_index(missing)
