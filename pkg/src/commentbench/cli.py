"""Single command line entry point.

Every artifact-producing run writes a manifest (command, flags, seeds,
input digests, tool version, timestamp) alongside its outputs, so any
report can be re-derived.  Machine-readable output goes to stdout or to
files; progress and summaries go to stderr.  Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .affinity import (
    AFFINITY_KINDS,
    affinity_report,
    extract_methods,
    filter_records,
    load_pairs_jsonl,
    load_records,
    pair_scores,
    sample_pairs,
    write_pairs_jsonl,
    write_records_jsonl,
)
from .analysis import (
    DEFAULT_EPSILON,
    ablation_curve,
    bh_adjust,
    dependence_report,
    hexbin,
    sample_bivariate,
    zipf_slope,
    zipf_table,
)
from .corpus import (
    TOKENIZER_MODES,
    TokenizerConfig,
    default_stoplist,
    load_jsonl,
    load_parallel_files,
    tokenize,
    top_k_stoplist,
)
from .errors import DataError
from .metrics import VARIANT_NAMES, get_variant, score_set
from .retrieval import (
    AnalyzerConfig,
    Bm25Params,
    build_index,
    ir_eval,
    load_index,
    retrieve,
    save_index,
)

# Exit-code contract: usage errors are 1, data errors are 2.
click.UsageError.exit_code = 1


class CliDataError(click.ClickException):
    exit_code = 2


def _fail_data(exc: Exception) -> "CliDataError":
    return CliDataError(str(exc))


def worker_count() -> int:
    """Worker cap from COMMENTBENCH_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("COMMENTBENCH_THREADS", "1")))
    except ValueError:
        return 1


def _log(msg: str) -> None:
    click.echo(msg, err=True)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, flags: dict, inputs: list) -> None:
    seeds = {k: v for k, v in flags.items() if "seed" in k}
    manifest = {
        "command": command,
        "flags": {k: v for k, v in sorted(flags.items())},
        "seeds": seeds,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _ensure_out(out) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _expand_variants(names) -> list[str]:
    if not names or any(n.lower() == "all" for n in names):
        return list(VARIANT_NAMES)
    resolved = []
    for n in names:
        try:
            resolved.append(get_variant(n).name)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--variant")
    return resolved


def _corpus_arg(spec: str, tokenizer: TokenizerConfig):
    """A corpus argument: either a JSONL path or a ``src:tgt`` pair of
    aligned files.  Returns (label, corpus, input paths)."""
    if ":" in spec and not spec.endswith(".jsonl"):
        src, _, tgt = spec.partition(":")
        try:
            corpus = load_parallel_files(src, tgt, tokenizer=tokenizer, allow_empty=True)
        except DataError as exc:
            raise _fail_data(exc)
        return Path(src).stem, corpus, [src, tgt]
    try:
        corpus, report = load_jsonl(spec, tokenizer=tokenizer, allow_empty=True)
    except DataError as exc:
        raise _fail_data(exc)
    if report.n_skipped:
        _log(f"{spec}: skipped {report.n_skipped} malformed line(s)")
    return Path(spec).stem, corpus, [spec]


def _load_corpora(specs, tokenizer: TokenizerConfig):
    labels = []
    corpora = []
    inputs = []
    for spec in specs:
        label, corpus, paths = _corpus_arg(spec, tokenizer)
        base = label
        i = 2
        while label in labels:
            label = f"{base}_{i}"
            i += 1
        labels.append(label)
        corpora.append(corpus)
        inputs.extend(paths)
    return labels, corpora, inputs


def _read_stoplist(path) -> frozenset:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(t.strip() for t in lines if t.strip())


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


@click.group()
@click.version_option(version=__version__, prog_name="commentbench")
def cli():
    """Scoring, corpus analysis, IR baselining, and affinity-group
    calibration for code-to-comment generation."""


# ---------------------------------------------------------------------------
# score


@cli.command()
@click.option("--cand", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ref", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--variant", "variants", multiple=True, default=("all",), show_default=True)
@click.option("--tokenizer", "mode", type=click.Choice(TOKENIZER_MODES), default="passthrough", show_default=True)
@click.option("--lowercase", is_flag=True, help="Case-fold after splitting.")
@click.option("--subtokens", is_flag=True, help="Split compound identifiers.")
@click.option("--stoplist", "stoplist_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--per-example", is_flag=True, help="Include per-example scores in the JSON.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def score(cand, ref, variants, mode, lowercase, subtokens, stoplist_path, per_example, out):
    """Score aligned candidate/reference files under one or more variants."""
    names = _expand_variants(variants)
    stop = _read_stoplist(stoplist_path) if stoplist_path else None
    cfg = TokenizerConfig(mode=mode, subtoken_split=subtokens, lowercase=lowercase, stoplist=stop)
    cand_lines = Path(cand).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(ref).read_text(encoding="utf-8").splitlines()
    if len(cand_lines) != len(ref_lines):
        raise CliDataError(
            f"line count mismatch {len(cand_lines)} vs {len(ref_lines)} ({cand} vs {ref})"
        )
    if not cand_lines:
        raise CliDataError("no examples to score")
    pairs = [
        (tokenize(c, cfg), [tokenize(r, cfg)]) for c, r in zip(cand_lines, ref_lines)
    ]
    reports = [score_set(pairs, name) for name in names]
    payload = [r.to_json_dict(include_per_example=per_example) for r in reports]
    click.echo(json.dumps(payload, indent=2))
    if out:
        out_dir = _ensure_out(out)
        (out_dir / "scores.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        _write_manifest(
            out_dir,
            "score",
            {
                "cand": cand, "ref": ref, "variant": names, "tokenizer": mode,
                "lowercase": lowercase, "subtokens": subtokens,
                "stoplist": stoplist_path, "per_example": per_example,
            },
            [cand, ref],
        )


# ---------------------------------------------------------------------------
# analyze


@cli.group()
def analyze():
    """Corpus analyses: zipf, ablate, bivariate."""


def _side_seqs(corpus, side):
    return corpus.sources() if side == "src" else corpus.targets()


@analyze.command()
@click.option("--corpus", "corpora", multiple=True, required=True)
@click.option("--side", type=click.Choice(["src", "tgt"]), default="tgt", show_default=True)
@click.option("--n", default=3, show_default=True)
@click.option("--head", default=None, type=int, help="Rows used for the slope fit (default: min(100, rows)).")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def zipf(corpora, side, n, head, out):
    """Rank/frequency tables, slopes, and a log-log plot."""
    from .plots import save_zipf_svg

    out_dir = _ensure_out(out)
    labels, loaded, inputs = _load_corpora(corpora, TokenizerConfig())
    tables = {}
    summary = {}
    for label, corpus in zip(labels, loaded):
        table = zipf_table(_side_seqs(corpus, side), n)
        tables[label] = table
        rows = [
            (rank, " ".join(gram), count, f"{rel:.10g}")
            for rank, (gram, count, rel) in enumerate(table.rows, start=1)
        ]
        _write_csv(out_dir / f"zipf_{label}.csv", ["rank", "ngram", "count", "rel_freq"], rows)
        fit_head = head if head is not None else min(100, len(table.rows))
        if fit_head >= 2 and len(table.rows) >= fit_head:
            slope = zipf_slope(table, fit_head)
        else:
            slope = None
        summary[label] = {
            "n": n, "side": side, "total_ngrams": table.total_ngrams,
            "distinct_ngrams": len(table.rows), "slope_head": fit_head, "slope": slope,
        }
    save_zipf_svg(tables, out_dir / "zipf.svg")
    (out_dir / "zipf_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps(summary, indent=2))
    _write_manifest(out_dir, "analyze zipf",
                    {"corpus": list(corpora), "side": side, "n": n, "head": head}, inputs)


@analyze.command()
@click.option("--corpus", "corpora", multiple=True, required=True)
@click.option("--side", type=click.Choice(["src", "tgt"]), default="tgt", show_default=True)
@click.option("--n", type=click.Choice(["1", "3"]), default="1", show_default=True)
@click.option("--k-max", default=100, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def ablate(corpora, side, n, k_max, seed, out):
    """Score decay as the most frequent n-grams are replaced by placeholders."""
    from .plots import save_ablation_svg

    out_dir = _ensure_out(out)
    labels, loaded, inputs = _load_corpora(corpora, TokenizerConfig())
    curves = {}
    for label, corpus in zip(labels, loaded):
        try:
            curve = ablation_curve(_side_seqs(corpus, side), int(n), k_max=k_max, seed=seed)
        except DataError as exc:
            raise _fail_data(exc)
        curves[label] = curve
        _write_csv(
            out_dir / f"ablation_{label}.csv",
            ["k", "bleu"],
            [(k, f"{s:.6f}") for k, s in curve.points],
        )
    save_ablation_svg(curves, out_dir / "ablation.svg")
    _write_manifest(out_dir, "analyze ablate",
                    {"corpus": list(corpora), "side": side, "n": int(n), "k_max": k_max, "seed": seed},
                    inputs)


@analyze.command()
@click.option("--corpus", "corpora", multiple=True, required=True)
@click.option("--count", default=10_000, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--epsilon", default=DEFAULT_EPSILON, show_default=True,
              help="Similarity floor on the 0..1 scale.")
@click.option("--bins", default=30, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def bivariate(corpora, count, seed, epsilon, bins, out):
    """Input/output similarity sampling with Spearman dependence.

    P-values are Benjamini-Hochberg adjusted across every correlation
    reported by the invocation."""
    from .plots import save_hexbin_svg

    out_dir = _ensure_out(out)
    labels, loaded, inputs = _load_corpora(corpora, TokenizerConfig())
    results = {}
    for label, corpus in zip(labels, loaded):
        try:
            sample = sample_bivariate(corpus, count=count, seed=seed, epsilon=epsilon)
        except DataError as exc:
            raise _fail_data(exc)
        _write_csv(
            out_dir / f"bivariate_{label}.csv",
            ["in_sim", "out_sim"],
            [(f"{x:.6f}", f"{y:.6f}") for x, y in sample.pairs],
        )
        grid = hexbin(sample, bins)
        _write_csv(
            out_dir / f"hexbin_{label}.csv",
            ["x", "y", "count"],
            [(f"{x:.4f}", f"{y:.4f}", c) for x, y, c in grid.cells],
        )
        save_hexbin_svg(sample, bins, out_dir / f"hexbin_{label}.svg", label=label)
        corr = dependence_report(sample)
        results[label] = {
            "rho_nonzero": corr.rho_nonzero, "p_nonzero": corr.p_nonzero,
            "rho_all": corr.rho_all, "p_all": corr.p_all,
            "n_nonzero": corr.n_nonzero,
        }
    # One BH family per invocation, spanning every p it reports.
    keyed = [
        (label, key)
        for label in results
        for key in ("p_nonzero", "p_all")
        if results[label][key] is not None
    ]
    adjusted = bh_adjust([results[label][key] for label, key in keyed])
    for (label, key), adj in zip(keyed, adjusted):
        results[label][key + "_adj"] = adj
    (out_dir / "correlations.json").write_text(json.dumps(results, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps(results, indent=2))
    _write_manifest(out_dir, "analyze bivariate",
                    {"corpus": list(corpora), "count": count, "seed": seed,
                     "epsilon": epsilon, "bins": bins},
                    inputs)


# ---------------------------------------------------------------------------
# ir


@cli.group()
def ir():
    """BM25 retrieval baseline: index, query, eval."""


def _analyzer_from_flags(mode, lowercase, expand_subtokens, stoplist_path, use_default_stoplist, stop_top_k, train):
    stop = set()
    if stoplist_path:
        stop |= _read_stoplist(stoplist_path)
    if use_default_stoplist:
        stop |= default_stoplist()
    if stop_top_k and train is not None:
        stop |= top_k_stoplist(train.sources(), stop_top_k)
    return AnalyzerConfig(
        tokenizer=TokenizerConfig(mode=mode, lowercase=lowercase),
        expand_subtokens=expand_subtokens,
        stoplist=frozenset(stop),
    )


_IR_ANALYZER_FLAGS = [
    click.option("--tokenizer", "mode", type=click.Choice(TOKENIZER_MODES), default="passthrough", show_default=True),
    click.option("--lowercase", is_flag=True),
    click.option("--expand-subtokens", is_flag=True,
                 help="Index and search the split forms of compound identifiers too."),
    click.option("--stoplist", "stoplist_path", type=click.Path(exists=True, dir_okay=False), default=None),
    click.option("--default-stoplist", "use_default_stoplist", is_flag=True,
                 help="Add the reserved-keyword + punctuation stoplist."),
    click.option("--stop-top-k", default=0, show_default=True,
                 help="Also stop the K most frequent source tokens of the training set."),
]


def _with_flags(flags):
    def deco(fn):
        for flag in reversed(flags):
            fn = flag(fn)
        return fn
    return deco


@ir.command()
@click.option("--train", required=True, help="Training corpus (JSONL or src:tgt).")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--snapshot-name", default="index.cbix", show_default=True)
@_with_flags(_IR_ANALYZER_FLAGS)
def index(train, out, snapshot_name, mode, lowercase, expand_subtokens, stoplist_path,
          use_default_stoplist, stop_top_k):
    """Build and snapshot a BM25 index over the training code."""
    out_dir = _ensure_out(out)
    label, corpus, inputs = _corpus_arg(train, TokenizerConfig())
    analyzer = _analyzer_from_flags(mode, lowercase, expand_subtokens, stoplist_path,
                                    use_default_stoplist, stop_top_k, corpus)
    try:
        idx = build_index(corpus, analyzer)
    except DataError as exc:
        raise _fail_data(exc)
    save_index(idx, out_dir / snapshot_name)
    _log(f"indexed {idx.n_docs} documents (avgdl {idx.avgdl:.2f}) -> {out_dir / snapshot_name}")
    _write_manifest(out_dir, "ir index",
                    {"train": train, "tokenizer": mode, "lowercase": lowercase,
                     "expand_subtokens": expand_subtokens, "stoplist": stoplist_path,
                     "default_stoplist": use_default_stoplist, "stop_top_k": stop_top_k,
                     "snapshot_name": snapshot_name},
                    inputs + ([stoplist_path] if stoplist_path else []))


@ir.command()
@click.option("--snapshot", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--code", default=None, help="Query code as a string.")
@click.option("--code-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--k", default=10, show_default=True)
@click.option("--k1", default=1.2, show_default=True)
@click.option("--b", default=0.75, show_default=True)
def query(snapshot, code, code_file, k, k1, b):
    """Rank indexed documents against a code query (empty result is not an error)."""
    if (code is None) == (code_file is None):
        raise click.UsageError("provide exactly one of --code / --code-file")
    if code_file is not None:
        code = Path(code_file).read_text(encoding="utf-8")
    try:
        idx = load_index(snapshot)
        hits = retrieve(idx, code, k, Bm25Params(k1=k1, b=b))
    except DataError as exc:
        raise _fail_data(exc)
    payload = [
        {"rank": rank, "doc": idx.doc_ids[doc_id], "doc_index": doc_id, "score": s}
        for rank, (doc_id, s) in enumerate(hits, start=1)
    ]
    click.echo(json.dumps(payload, indent=2))


@ir.command(name="eval")
@click.option("--train", default=None, help="Training corpus (JSONL or src:tgt).")
@click.option("--snapshot", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--test", required=True, help="Test corpus (JSONL or src:tgt).")
@click.option("--variant", required=True)
@click.option("--k1", default=1.2, show_default=True)
@click.option("--b", default=0.75, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@_with_flags(_IR_ANALYZER_FLAGS)
def ir_eval_cmd(train, snapshot, test, variant, k1, b, out, mode, lowercase,
                expand_subtokens, stoplist_path, use_default_stoplist, stop_top_k):
    """Retrieve a comment for every test input and score it like the dataset would."""
    if (train is None) == (snapshot is None):
        raise click.UsageError("provide exactly one of --train / --snapshot")
    names = _expand_variants([variant])
    if len(names) != 1:
        raise click.BadParameter("ir eval takes a single variant", param_hint="--variant")
    out_dir = _ensure_out(out)
    inputs = []
    if snapshot is not None:
        try:
            idx = load_index(snapshot)
        except DataError as exc:
            raise _fail_data(exc)
        inputs.append(snapshot)
    else:
        _, train_corpus, train_inputs = _corpus_arg(train, TokenizerConfig())
        analyzer = _analyzer_from_flags(mode, lowercase, expand_subtokens, stoplist_path,
                                        use_default_stoplist, stop_top_k, train_corpus)
        try:
            idx = build_index(train_corpus, analyzer)
        except DataError as exc:
            raise _fail_data(exc)
        inputs.extend(train_inputs)
    _, test_corpus, test_inputs = _corpus_arg(test, TokenizerConfig())
    inputs.extend(test_inputs)
    try:
        result = ir_eval(idx, test_corpus, names[0], Bm25Params(k1=k1, b=b),
                         workers=worker_count())
    except DataError as exc:
        raise _fail_data(exc)
    payload = result.report.to_json_dict(include_per_example=False)
    payload["fallback_count"] = result.fallback_count
    click.echo(json.dumps(payload, indent=2))
    (out_dir / "score.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    with open(out_dir / "per_example.tsv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["id", "retrieved_doc", "score", "candidate", "reference"])
        for row in result.rows:
            writer.writerow([
                row.example_id,
                row.retrieved_id if row.retrieved_id is not None else "",
                f"{row.bm25_score:.6f}",
                row.candidate.text(),
                row.reference.text(),
            ])
    _write_manifest(out_dir, "ir eval",
                    {"train": train, "snapshot": snapshot, "test": test,
                     "variant": names[0], "k1": k1, "b": b, "tokenizer": mode,
                     "lowercase": lowercase, "expand_subtokens": expand_subtokens,
                     "stoplist": stoplist_path, "default_stoplist": use_default_stoplist,
                     "stop_top_k": stop_top_k},
                    inputs)
    _log(f"{names[0]}: {payload['score']:.2f} ({result.fallback_count} fallbacks)")


# ---------------------------------------------------------------------------
# affinity


@cli.group()
def affinity():
    """Affinity groups: extract, sample, report."""


@affinity.command()
@click.option("--source-root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--full-comment", is_flag=True, help="Keep whole comment summaries instead of first sentences.")
@click.option("--no-filter", is_flag=True, help="Skip getter/setter removal and overload dedup.")
def extract(source_root, out, full_comment, no_filter):
    """Extract documented Java methods into the corpus JSONL schema."""
    out_dir = _ensure_out(out)
    try:
        records, report = extract_methods(source_root, full_comment=full_comment)
    except DataError as exc:
        raise _fail_data(exc)
    if not no_filter:
        records = filter_records(records)
    write_records_jsonl(records, out_dir / "records.jsonl")
    _log(
        f"{report.n_files} files, {report.n_records} documented methods, "
        f"{len(records)} kept; skipped {len(report.unreadable_files)} unreadable "
        f"file(s), {report.undelimited_methods} undelimited method(s), "
        f"{report.empty_comments} empty comment(s)"
    )
    _write_manifest(out_dir, "affinity extract",
                    {"source_root": source_root, "full_comment": full_comment,
                     "no_filter": no_filter},
                    [])


@affinity.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", required=True, type=click.Choice(AFFINITY_KINDS))
@click.option("--count", default=5000, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--max-per-class", default=6, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def sample(records_path, kind, count, seed, max_per_class, out):
    """Draw random method pairs at the requested affinity level."""
    out_dir = _ensure_out(out)
    try:
        records = load_records(records_path)
        pairs = sample_pairs(records, kind, count=count, seed=seed, max_per_class=max_per_class)
    except DataError as exc:
        raise _fail_data(exc)
    write_pairs_jsonl(pairs, out_dir / "pairs.jsonl")
    meta = {"kind": kind, "count": count, "seed": seed, "max_per_class": max_per_class,
            "records": str(records_path)}
    (out_dir / "pairs.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    _write_manifest(out_dir, "affinity sample",
                    {"records": records_path, "kind": kind, "count": count,
                     "seed": seed, "max_per_class": max_per_class},
                    [records_path])
    _log(f"sampled {len(pairs)} {kind} pairs -> {out_dir / 'pairs.jsonl'}")


@affinity.command()
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--records", "records_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--kind", type=click.Choice(AFFINITY_KINDS), default=None)
@click.option("--count", default=5000, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--max-per-class", default=6, show_default=True)
@click.option("--variant", "variants", multiple=True, default=("all",), show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def report(pairs_path, records_path, kind, count, seed, max_per_class, variants, out):
    """Per-variant score distributions over an affinity pair sample.

    Either score a previously sampled --pairs file, or sample on the fly
    from --records with --kind and --seed."""
    if (pairs_path is None) == (records_path is None):
        raise click.UsageError("provide exactly one of --pairs / --records")
    names = _expand_variants(variants)
    out_dir = _ensure_out(out)
    inputs = []
    try:
        if pairs_path is not None:
            pairs = load_pairs_jsonl(pairs_path)
            inputs.append(pairs_path)
            meta_path = Path(pairs_path).with_suffix(".meta.json")
            if kind is None and meta_path.exists():
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                kind = meta.get("kind")
                seed = seed if seed is not None else meta.get("seed")
        else:
            if kind is None or seed is None:
                raise click.UsageError("--records mode needs --kind and --seed")
            records = load_records(records_path)
            pairs = sample_pairs(records, kind, count=count, seed=seed,
                                 max_per_class=max_per_class)
            inputs.append(records_path)
        rep = affinity_report(pairs, names, kind=kind, seed=seed)
    except DataError as exc:
        raise _fail_data(exc)
    payload = rep.to_json_dict()
    click.echo(json.dumps(payload, indent=2))
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    scores_by_variant = {name: pair_scores(pairs, name) for name in names}
    _write_csv(
        out_dir / "scores.csv",
        ["pair"] + names,
        [
            [i] + [f"{scores_by_variant[name][i]:.4f}" for name in names]
            for i in range(len(pairs))
        ],
    )
    from .plots import save_violin_svg

    save_violin_svg(scores_by_variant, out_dir / "violin.svg")
    _write_manifest(out_dir, "affinity report",
                    {"pairs": pairs_path, "records": records_path, "kind": kind,
                     "count": count, "seed": seed, "max_per_class": max_per_class,
                     "variant": names},
                    inputs)


def entry():  # console-script entry point
    cli()


def main(argv=None) -> int:
    """Programmatic entry; returns the exit code instead of raising."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1


if __name__ == "__main__":
    sys.exit(main())
