"""Authorship verification toolkit.

Builds temporally stratified paragraph-pair datasets from a manifest-described
corpus, verifies same-authorship with the Impostors Method over character
n-gram tf-idf features, talks to external classifiers over a line protocol,
and computes the evaluation statistics (P/R/F1, distance series, Pearson,
McNemar).
"""

from authverify.corpus import (
    Document,
    Paragraph,
    TokenizerConfig,
    count_tokens,
    load_manifest,
    segment_paragraphs,
    truncate_pair,
)
from authverify.pairgen import (
    AuthorSplit,
    PairSample,
    QuotaSpec,
    SampleCategory,
    categorize_pair,
    generate_pairs,
    group_authors,
    split_authors,
)
from authverify.features import (
    FeatureModel,
    SparseVector,
    build_idf,
    build_vocabulary,
    vectorize,
)
from authverify.impostors import (
    ImpostorParams,
    PoolCandidate,
    VerificationResult,
    minmax_similarity,
    run_testset,
    verify,
)
from authverify.evaluate import (
    ConfusionMatrix,
    CorrelationStat,
    by_distance,
    mcnemar,
    pearson,
    pool_runs,
    prf,
)
from authverify.protocol import run_external
from authverify.synthetic import SyntheticCorpus, generate_synthetic_corpus

__version__ = "0.1.0"
