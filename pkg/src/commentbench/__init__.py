"""commentbench: scoring, corpus analysis, IR baselining, and
affinity-group calibration for code-to-comment generation."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    ParallelCorpus,
    ParallelExample,
    TokenSequence,
    TokenizerConfig,
    apply_stoplist,
    corpus_stats,
    load_jsonl,
    load_parallel_files,
    split_subtokens,
    tokenize,
)
from .errors import DataError  # noqa: F401
from .metrics import (  # noqa: F401
    VARIANT_NAMES,
    BleuBreakdown,
    BleuVariant,
    ScoreReport,
    brevity_penalty,
    corpus_bleu,
    get_variant,
    modified_precision,
    ngrams,
    score_set,
    sentence_bleu,
)
