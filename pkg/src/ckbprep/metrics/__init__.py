"""BLEU, METEOR (exact-match stage) and TER with per-component reporting."""
from ckbprep.metrics.bleu import BleuScore, NgramPrecision, bleu_corpus, bleu_from_counts
from ckbprep.metrics.meteor import MeteorScore, meteor_sentence
from ckbprep.metrics.report import (
    AlignmentError,
    ScoreReport,
    eval_buckets,
    format_bucket_csv,
    score_files,
    score_segments,
)
from ckbprep.metrics.ter import TerScore, ter_sentence

__all__ = [
    "AlignmentError", "BleuScore", "MeteorScore", "NgramPrecision", "ScoreReport", "TerScore",
    "bleu_corpus", "bleu_from_counts", "eval_buckets", "format_bucket_csv", "meteor_sentence",
    "score_files", "score_segments", "ter_sentence",
]
