"""Affinity groups: extract documented Java methods, filter boilerplate,
sample comment pairs at a fixed structural closeness (different project /
same project / same class), and report per-variant score distributions.

The extractor is a tolerant doc-comment + brace-matching scanner, not a
grammar-complete parser; methods it cannot delimit are skipped and
counted.  Records serialize to the corpus JSONL schema (src = the
whitespace-normalized method text, tgt = the comment tokens, meta =
project/class/path) so downstream tooling consumes affinity data like any
other corpus.
"""

from __future__ import annotations

import json
import random
import re
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .corpus import TokenSequence, TokenizerConfig, tokenize
from .errors import DataError
from .metrics import BleuVariant, corpus_bleu, get_variant, sentence_bleu

AFFINITY_KINDS = ("inter_project", "intra_project", "intra_class")

#: Default tokenizer for extracted comments: punctuation-isolating, no
#: case folding (case folding stays an explicit choice).
COMMENT_TOKENIZER = TokenizerConfig(mode="punctuation")

_CLASS_RE = re.compile(r"\b(?:class|interface|enum)\s+([A-Za-z_$][\w$]*)")
_NAME_RE = re.compile(r"([A-Za-z_$][\w$]*)\s*$")
_GETTER_SETTER_RE = re.compile(r"(?:get|set|is)[A-Z]")
_ASSIGN_RE = re.compile(r"^[\w$.\[\]]+\s*=[^=]")
_INLINE_TAG_RE = re.compile(r"\{@\w+\s*([^{}]*)\}")
_HTML_TAG_RE = re.compile(r"<[^>]+>")

_MODIFIERS = frozenset(
    {
        "public", "private", "protected", "static", "final", "abstract",
        "synchronized", "native", "strictfp", "default", "transient",
        "volatile",
    }
)
_REJECT_NAMES = frozenset(
    {"if", "for", "while", "switch", "catch", "new", "return", "do", "else", "try"}
)


@dataclass(frozen=True)
class MethodRecord:
    project: str
    path: str
    class_name: str
    method_name: str
    param_count: int
    comment: TokenSequence  # first sentence unless extracted with full_comment
    body: str

    @property
    def class_key(self) -> tuple[str, str, str]:
        return (self.project, self.path, self.class_name)

    @property
    def record_id(self) -> str:
        return "::".join((self.project, self.path, self.class_name, self.method_name))


@dataclass(frozen=True)
class ExtractionReport:
    n_files: int = 0
    n_records: int = 0
    unreadable_files: tuple[str, ...] = ()
    undelimited_methods: int = 0
    empty_comments: int = 0


# ---------------------------------------------------------------------------
# Source scanning


def _mask_noncode(text: str) -> tuple[str, list[tuple[int, int]]]:
    """Blank out comments and string/char literals (newlines kept) and
    collect the spans of ``/** ... */`` doc comments."""
    out = list(text)
    doc_spans: list[tuple[int, int]] = []
    i, n = 0, len(text)
    state = "code"
    start = 0
    is_doc = False
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if state == "code":
            if ch == "/" and nxt == "/":
                state = "line"
                out[i] = out[i + 1] = " "
                i += 2
                continue
            if ch == "/" and nxt == "*":
                state = "block"
                start = i
                is_doc = text[i : i + 3] == "/**" and text[i : i + 4] != "/**/"
                out[i] = out[i + 1] = " "
                i += 2
                continue
            if ch == '"':
                state = "string"
                i += 1
                continue
            if ch == "'":
                state = "char"
                i += 1
                continue
            i += 1
        elif state == "line":
            if ch == "\n":
                state = "code"
            else:
                out[i] = " "
            i += 1
        elif state == "block":
            if ch == "*" and nxt == "/":
                out[i] = out[i + 1] = " "
                if is_doc:
                    doc_spans.append((start, i + 2))
                state = "code"
                i += 2
                continue
            if ch != "\n":
                out[i] = " "
            i += 1
        else:  # string or char literal
            if ch == "\\":
                out[i] = " "
                if i + 1 < n and text[i + 1] != "\n":
                    out[i + 1] = " "
                i += 2
                continue
            if (state == "string" and ch == '"') or (state == "char" and ch == "'"):
                state = "code"
            elif ch != "\n":
                out[i] = " "
            i += 1
    return "".join(out), doc_spans


def _balanced_end(text: str, open_pos: int, open_ch: str, close_ch: str) -> int:
    depth = 0
    for i in range(open_pos, len(text)):
        if text[i] == open_ch:
            depth += 1
        elif text[i] == close_ch:
            depth -= 1
            if depth == 0:
                return i
    return -1


def _class_spans(masked: str) -> list[tuple[str, int, int]]:
    spans = []
    for m in _CLASS_RE.finditer(masked):
        open_pos = masked.find("{", m.end())
        if open_pos == -1:
            continue
        close = _balanced_end(masked, open_pos, "{", "}")
        spans.append((m.group(1), open_pos, close if close != -1 else len(masked)))
    return spans


def _innermost_class(spans: list[tuple[str, int, int]], pos: int) -> Optional[str]:
    best = None
    best_width = None
    for name, open_pos, close_pos in spans:
        if open_pos < pos <= close_pos:
            width = close_pos - open_pos
            if best_width is None or width < best_width:
                best, best_width = name, width
    return best


def _skip_annotations(masked: str, pos: int) -> int:
    n = len(masked)
    while True:
        while pos < n and masked[pos].isspace():
            pos += 1
        if pos < n and masked[pos] == "@":
            pos += 1
            while pos < n and (masked[pos].isalnum() or masked[pos] in "_$."):
                pos += 1
            while pos < n and masked[pos].isspace():
                pos += 1
            if pos < n and masked[pos] == "(":
                end = _balanced_end(masked, pos, "(", ")")
                if end == -1:
                    return n
                pos = end + 1
            continue
        return pos


def _strip_generics(text: str) -> str:
    out = []
    depth = 0
    for ch in text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth = max(0, depth - 1)
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _header_end(masked: str, pos: int) -> tuple[int, str]:
    """Position and kind of the first structural delimiter at paren depth 0."""
    depth = 0
    for i in range(pos, len(masked)):
        ch = masked[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "{;}":
            return i, ch
    return -1, ""


def _parse_signature(header: str) -> Optional[tuple[str, int]]:
    """(method name, parameter count), or None when the header is not a
    method declaration (field, class, constructor, ...)."""
    if _CLASS_RE.search(header):
        return None
    flat = _strip_generics(header)
    paren = flat.find("(")
    if paren == -1:
        return None
    close = _balanced_end(flat, paren, "(", ")")
    if close == -1:
        return None
    name_match = _NAME_RE.search(flat[:paren])
    if not name_match:
        return None
    name = name_match.group(1)
    if name in _REJECT_NAMES:
        return None
    preceding = re.findall(r"[\w$.\[\]]+", flat[: name_match.start(1)])
    if not any(tok not in _MODIFIERS for tok in preceding):
        return None  # no return type: constructor or stray construct
    inner = flat[paren + 1 : close].strip()
    if not inner:
        param_count = 0
    else:
        depth = 0
        param_count = 1
        for ch in inner:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                param_count += 1
    return name, param_count


def clean_comment(raw: str, full_comment: bool = False) -> str:
    """Strip Javadoc furniture and return the summary (first sentence by
    default: up to the first period followed by whitespace, falling back
    to the first line when there is no period)."""
    body = raw
    if body.startswith("/**"):
        body = body[3:]
    if body.endswith("*/"):
        body = body[:-2]
    lines = []
    for line in body.splitlines():
        stripped = line.strip()
        while stripped.startswith("*"):
            stripped = stripped[1:].lstrip()
        if stripped.startswith("@"):  # tag section ends the summary
            break
        lines.append(stripped)
    text = "\n".join(lines)
    text = _INLINE_TAG_RE.sub(r"\1", text)
    text = _HTML_TAG_RE.sub(" ", text)
    if not full_comment:
        joined = " ".join(text.split())
        m = re.search(r"\.(?=\s|$)", joined)
        if m:
            return joined[: m.end()].strip()
        first_line = next((ln for ln in text.splitlines() if ln.strip()), "")
        return " ".join(first_line.split())
    return " ".join(text.split())


def _extract_from_text(
    text: str,
    project: str,
    rel_path: str,
    tokenizer: TokenizerConfig,
    full_comment: bool,
) -> tuple[list[MethodRecord], int, int]:
    masked, doc_spans = _mask_noncode(text)
    classes = _class_spans(masked)
    records: list[MethodRecord] = []
    undelimited = 0
    empty_comments = 0
    for doc_start, doc_end in doc_spans:
        pos = _skip_annotations(masked, doc_end)
        end, delim = _header_end(masked, pos)
        if end == -1 or delim == "}":
            continue
        parsed = _parse_signature(masked[pos:end])
        if parsed is None:
            continue
        name, param_count = parsed
        if delim == "{":
            body_close = _balanced_end(masked, end, "{", "}")
            if body_close == -1:
                undelimited += 1
                continue
            body = text[pos : body_close + 1]
        else:  # ';' -- abstract or interface method
            body = text[pos : end + 1]
        class_name = _innermost_class(classes, pos)
        if class_name is None:
            undelimited += 1
            continue
        comment_text = clean_comment(text[doc_start:doc_end], full_comment)
        comment = tokenize(comment_text, tokenizer)
        if len(comment) == 0:
            empty_comments += 1
            continue
        records.append(
            MethodRecord(
                project=project,
                path=rel_path,
                class_name=class_name,
                method_name=name,
                param_count=param_count,
                comment=comment,
                body=body,
            )
        )
    return records, undelimited, empty_comments


def extract_methods(
    source_root,
    tokenizer: TokenizerConfig = COMMENT_TOKENIZER,
    full_comment: bool = False,
) -> tuple[list[MethodRecord], ExtractionReport]:
    """Scan ``source_root`` (one top-level folder per project) for ``.java``
    files and return one record per method that carries a doc comment."""
    root = Path(source_root)
    if not root.is_dir():
        raise DataError(f"source root {root} is not a directory")
    records: list[MethodRecord] = []
    unreadable: list[str] = []
    undelimited = 0
    empty_comments = 0
    files = sorted(root.rglob("*.java"))
    for path in files:
        rel = path.relative_to(root)
        project = rel.parts[0] if len(rel.parts) > 1 else "(root)"
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError):
            unreadable.append(str(rel))
            continue
        recs, n_undelim, n_empty = _extract_from_text(
            text, project, rel.as_posix(), tokenizer, full_comment
        )
        records.extend(recs)
        undelimited += n_undelim
        empty_comments += n_empty
    report = ExtractionReport(
        n_files=len(files),
        n_records=len(records),
        unreadable_files=tuple(unreadable),
        undelimited_methods=undelimited,
        empty_comments=empty_comments,
    )
    return records, report


# ---------------------------------------------------------------------------
# Filtering


def _is_trivial_body(body: str) -> bool:
    open_pos = body.find("{")
    close_pos = body.rfind("}")
    if open_pos == -1 or close_pos <= open_pos:
        return False
    inner, _ = _mask_noncode(body[open_pos + 1 : close_pos])
    statements = [s.strip() for s in inner.split(";") if s.strip()]
    if len(statements) != 1:
        return False
    stmt = statements[0]
    return stmt.startswith("return") or bool(_ASSIGN_RE.match(stmt))


def filter_records(records: Sequence[MethodRecord]) -> list[MethodRecord]:
    """Drop getters/setters (get/set/is name prefix, or a single
    return/assignment body) and deduplicate overloads, keeping the first
    occurrence per (project, class, method name).  Idempotent."""
    out: list[MethodRecord] = []
    seen: set[tuple[str, str, str]] = set()
    for rec in records:
        if _GETTER_SETTER_RE.match(rec.method_name):
            continue
        if _is_trivial_body(rec.body):
            continue
        key = (rec.project, rec.class_name, rec.method_name)
        if key in seen:
            continue
        seen.add(key)
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Pair sampling


class _WeightedChoice:
    """Exact weighted sampling with removable entries (rebuilds lazily)."""

    def __init__(self, weights: list[int]):
        self.weights = list(weights)
        self._rebuild()

    def _rebuild(self):
        self.cum = []
        total = 0
        for w in self.weights:
            total += w
            self.cum.append(total)
        self.total = total

    def draw(self, rng: random.Random) -> int:
        r = rng.randrange(self.total)
        return bisect_right(self.cum, r)

    def remove(self, idx: int):
        self.weights[idx] = 0
        self._rebuild()


def _distinct_pair(rng: random.Random, n: int) -> tuple[int, int]:
    i = rng.randrange(n)
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    return i, j


def _check_pairs(pairs, kind):
    for a, b in pairs:
        if kind == "inter_project":
            ok = a.project != b.project
        elif kind == "intra_project":
            ok = a.project == b.project and a.class_key != b.class_key
        else:
            ok = a.class_key == b.class_key and a is not b
        if not ok:
            raise AssertionError(f"sampled pair violates {kind} constraint")


def sample_pairs(
    records: Sequence[MethodRecord],
    kind: str,
    count: int = 5000,
    seed: int = 0,
    max_per_class: int = 6,
) -> list[tuple[MethodRecord, MethodRecord]]:
    """Uniform random ordered pairs satisfying the affinity kind, sampled
    with replacement across pairs; the first element of each pair is the
    designated reference.  Intra-class sampling takes at most
    ``max_per_class`` pairs from any single class."""
    if kind not in AFFINITY_KINDS:
        raise ValueError(f"unknown affinity kind {kind!r}")
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = random.Random(seed)

    by_class: dict[tuple, list[MethodRecord]] = defaultdict(list)
    by_project: dict[str, list[MethodRecord]] = defaultdict(list)
    for rec in records:
        by_class[rec.class_key].append(rec)
        by_project[rec.project].append(rec)

    pairs: list[tuple[MethodRecord, MethodRecord]] = []
    if kind == "intra_class":
        classes = sorted(key for key, members in by_class.items() if len(members) >= 2)
        if count > max_per_class * len(classes):
            raise DataError(
                f"cannot draw {count} intra-class pairs: only {len(classes)} classes "
                f"with >= 2 methods at <= {max_per_class} pairs each"
            )
        members = [by_class[key] for key in classes]
        chooser = _WeightedChoice([len(m) * (len(m) - 1) for m in members])
        taken = [0] * len(classes)
        for _ in range(count):
            c = chooser.draw(rng)
            group = members[c]
            i, j = _distinct_pair(rng, len(group))
            pairs.append((group[i], group[j]))
            taken[c] += 1
            if taken[c] >= max_per_class:
                chooser.remove(c)
    elif kind == "intra_project":
        projects = sorted(by_project)
        weights = []
        for p in projects:
            n_p = len(by_project[p])
            same_class = sum(
                len(m) ** 2 for key, m in by_class.items() if key[0] == p
            )
            weights.append(n_p * n_p - same_class)
        valid = [w > 0 for w in weights]
        if not any(valid):
            raise DataError("no project has methods in two different classes")
        chooser = _WeightedChoice(weights)
        for _ in range(count):
            p = projects[chooser.draw(rng)]
            group = by_project[p]
            while True:
                i, j = _distinct_pair(rng, len(group))
                if group[i].class_key != group[j].class_key:
                    pairs.append((group[i], group[j]))
                    break
    else:  # inter_project
        projects = sorted(by_project)
        if len(projects) < 2:
            raise DataError("inter-project pairs need at least two projects")
        n_total = len(records)
        flat: list[MethodRecord] = []
        offsets: dict[str, tuple[int, int]] = {}
        for p in projects:
            start = len(flat)
            flat.extend(by_project[p])
            offsets[p] = (start, len(flat))
        chooser = _WeightedChoice(
            [len(by_project[p]) * (n_total - len(by_project[p])) for p in projects]
        )
        for _ in range(count):
            p = projects[chooser.draw(rng)]
            group = by_project[p]
            first = group[rng.randrange(len(group))]
            start, end = offsets[p]
            r = rng.randrange(n_total - len(group))
            idx = r if r < start else r + (end - start)
            pairs.append((first, flat[idx]))
    _check_pairs(pairs, kind)
    return pairs


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class VariantStats:
    mean: float
    q1: float
    median: float
    q3: float


@dataclass(frozen=True)
class AffinityReport:
    kind: Optional[str]
    n_pairs: int
    per_variant: dict  # variant name -> VariantStats
    seed: Optional[int] = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_pairs": self.n_pairs,
            "seed": self.seed,
            "variants": {
                name: {
                    "mean": round(st.mean, 2),
                    "q1": round(st.q1, 2),
                    "median": round(st.median, 2),
                    "q3": round(st.q3, 2),
                }
                for name, st in self.per_variant.items()
            },
        }


def pair_scores(
    pairs: Sequence[tuple[MethodRecord, MethodRecord]], variant: Union[str, BleuVariant]
) -> list[float]:
    """Per-pair scores (candidate = second element, reference = first);
    corpus variants are applied to each pair as a one-pair corpus."""
    variant = get_variant(variant)
    if variant.aggregation == "sentence":
        return [
            sentence_bleu(cand.comment, [ref.comment], variant).score
            for ref, cand in pairs
        ]
    return [
        corpus_bleu([(cand.comment, [ref.comment])], variant).score
        for ref, cand in pairs
    ]


def affinity_report(
    pairs: Sequence[tuple[MethodRecord, MethodRecord]],
    variants: Sequence[Union[str, BleuVariant]],
    kind: Optional[str] = None,
    seed: Optional[int] = None,
) -> AffinityReport:
    """Mean and quartiles per variant over a pair sample.  Sentence
    variants report the mean of per-pair scores; corpus variants score the
    whole pair set as one corpus.  Quartiles always come from the per-pair
    scores."""
    if not pairs:
        raise DataError("affinity report needs a non-empty pair sample")
    per_variant = {}
    for v in variants:
        v = get_variant(v)
        scores = pair_scores(pairs, v)
        if v.aggregation == "sentence":
            mean = fsum(scores) / len(scores)
        else:
            mean = corpus_bleu(
                [(cand.comment, [ref.comment]) for ref, cand in pairs], v
            ).score
        q1, median, q3 = (float(q) for q in np.percentile(scores, [25, 50, 75]))
        per_variant[v.name] = VariantStats(mean=mean, q1=q1, median=median, q3=q3)
    return AffinityReport(kind=kind, n_pairs=len(pairs), per_variant=per_variant, seed=seed)


# ---------------------------------------------------------------------------
# JSONL round trip


def write_records_jsonl(records: Sequence[MethodRecord], path) -> None:
    """Serialize records to the corpus JSONL schema.  The src field is the
    whitespace-normalized method text so generic loaders can consume it.
    Record ids are unique only after overload dedup; pre-filter duplicates
    get a deterministic ``#k`` suffix so the file stays loadable."""
    seen: dict[str, int] = {}
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            rec_id = rec.record_id
            n = seen.get(rec_id, 0)
            seen[rec_id] = n + 1
            if n:
                rec_id = f"{rec_id}#{n + 1}"
            obj = {
                "id": rec_id,
                "src": " ".join(rec.body.split()),
                "tgt": rec.comment.text(),
                "meta": {
                    "project": rec.project,
                    "class_name": rec.class_name,
                    "path": rec.path,
                },
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_pairs_jsonl(pairs: Sequence[tuple[MethodRecord, MethodRecord]], path) -> None:
    """One sampled pair per line: reference/candidate comment text plus ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for ref, cand in pairs:
            obj = {
                "ref": ref.comment.text(),
                "cand": cand.comment.text(),
                "ref_id": ref.record_id,
                "cand_id": cand.record_id,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_pairs_jsonl(path) -> list[tuple[MethodRecord, MethodRecord]]:
    """Rebuild a pair sample written by :func:`write_pairs_jsonl` as stub
    records (only the comments matter for scoring)."""

    def _stub(record_id: str, comment_text: str) -> MethodRecord:
        parts = record_id.split("::")
        project, rel_path, class_name, method_name = (
            parts if len(parts) == 4 else ("", "", "", record_id)
        )
        return MethodRecord(
            project=project,
            path=rel_path,
            class_name=class_name,
            method_name=method_name,
            param_count=0,
            comment=tokenize(comment_text),
            body="",
        )

    pairs = []
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            ref = _stub(str(obj.get("ref_id", f"pair-{lineno}-ref")), str(obj["ref"]))
            cand = _stub(str(obj.get("cand_id", f"pair-{lineno}-cand")), str(obj["cand"]))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"{path}:{lineno}: malformed pair line") from exc
        pairs.append((ref, cand))
    return pairs


def load_records(path) -> list[MethodRecord]:
    """Rebuild records from the JSONL schema written by
    :func:`write_records_jsonl`.  Parameter counts are not round-tripped
    (they only matter before filtering) and load as 0."""
    records = []
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON") from exc
        parts = str(obj.get("id", "")).split("::")
        if len(parts) != 4:
            raise DataError(
                f"{path}:{lineno}: id is not of the form project::path::class::method"
            )
        project, rel_path, class_name, method_name = parts
        method_name = re.sub(r"#\d+$", "", method_name)
        records.append(
            MethodRecord(
                project=project,
                path=rel_path,
                class_name=class_name,
                method_name=method_name,
                param_count=0,
                comment=tokenize(str(obj["tgt"])),
                body=str(obj["src"]),
            )
        )
    return records
