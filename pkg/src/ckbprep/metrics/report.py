"""File-level scoring and length-bucketed BLEU reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from ckbprep.corpus import DEFAULT_EDGES, bucket_labels, bucket_of
from ckbprep.metrics.bleu import BleuScore, bleu_corpus
from ckbprep.metrics.meteor import MeteorScore, meteor_sentence
from ckbprep.metrics.ter import TerScore, ter_sentence
from ckbprep.textio import read_lines
from ckbprep.tokenizers.wordpunct import wordpunct_tokenize

TOKENIZERS: dict[str, Callable[[str], list[str]]] = {
    "wordpunct": wordpunct_tokenize,
    "none": str.split,
}


class AlignmentError(ValueError):
    """Hypothesis and reference files do not line up."""


@dataclass(frozen=True)
class ScoreReport:
    bleu: BleuScore
    meteor: float
    ter: float
    meteor_segments: tuple[MeteorScore, ...] = field(repr=False)
    ter_segments: tuple[TerScore, ...] = field(repr=False)
    skipped_lines: tuple[int, ...] = ()

    @property
    def segments(self) -> int:
        return len(self.meteor_segments)

    def meteor_components(self) -> dict:
        segs = self.meteor_segments
        n = len(segs)
        return {
            "matches": sum(s.matches for s in segs),
            "chunks": sum(s.chunks for s in segs),
            "P": math.fsum(s.precision for s in segs) / n,
            "R": math.fsum(s.recall for s in segs) / n,
            "Fmean": math.fsum(s.fmean for s in segs) / n,
            "penalty": math.fsum(s.penalty for s in segs) / n,
        }

    def ter_components(self) -> dict:
        segs = self.ter_segments
        return {
            "edits": sum(s.edits for s in segs),
            "shifts": sum(s.shifts for s in segs),
            "normalizer": math.fsum(s.normalizer for s in segs) / len(segs),
        }

    def as_dict(self) -> dict:
        return {
            "segments": self.segments,
            "skipped_lines": list(self.skipped_lines),
            "bleu": self.bleu.as_dict(),
            "meteor": {"score": self.meteor, **self.meteor_components()},
            "ter": {"score": self.ter, **self.ter_components()},
            "per_segment": [
                {"meteor": m.as_dict(), "ter": t.as_dict()}
                for m, t in zip(self.meteor_segments, self.ter_segments)
            ],
        }

    def format_text(self) -> str:
        b = self.bleu
        precisions = " / ".join(f"{100 * p.ratio:.2f}" for p in b.precisions)
        mc, tc = self.meteor_components(), self.ter_components()
        lines = [
            f"segments  {self.segments}",
            f"BLEU      {b.score:.2f}  ({precisions})  BP={b.brevity_penalty:.4f}  hyp_len={b.hyp_len}  ref_len={b.ref_len}",
            f"METEOR    {self.meteor:.4f}  (matches={mc['matches']} chunks={mc['chunks']} "
            f"P={mc['P']:.4f} R={mc['R']:.4f} Fmean={mc['Fmean']:.4f} penalty={mc['penalty']:.4f})",
            f"TER       {self.ter:.2f}  (edits={tc['edits']} shifts={tc['shifts']} "
            f"normalizer={tc['normalizer']:.2f})",
        ]
        return "\n".join(lines) + "\n"


def align_lines(hyp_lines: Sequence[str], ref_sets: Sequence[Sequence[str]]):
    """Pair hypothesis lines with their references.

    Every reference file must have exactly as many lines as the hypothesis
    file.  Lines whose references are all blank are dropped; their 1-based
    line numbers are returned alongside the kept segments.
    """
    for k, refs in enumerate(ref_sets):
        if len(refs) != len(hyp_lines):
            first = min(len(refs), len(hyp_lines)) + 1
            raise AlignmentError(
                f"reference {k + 1} has {len(refs)} lines but the hypothesis has "
                f"{len(hyp_lines)}; first divergent line is {first}"
            )
    hyps, refs, skipped = [], [], []
    for i, hyp in enumerate(hyp_lines):
        row = [r[i] for r in ref_sets if r[i].strip()]
        if not row:
            skipped.append(i + 1)
            continue
        hyps.append(hyp)
        refs.append(row)
    if not hyps:
        raise AlignmentError("no segment has a non-blank reference")
    return hyps, refs, tuple(skipped)


def score_segments(hyps: Sequence[str], refs: Sequence[Sequence[str]], max_order: int = 4,
                   smoothing: str = "none", tokenize: str = "wordpunct",
                   skipped: tuple[int, ...] = ()) -> ScoreReport:
    tok = TOKENIZERS[tokenize]
    hyp_toks = [tok(h) for h in hyps]
    ref_toks = [[tok(r) for r in rs] for rs in refs]
    bleu = bleu_corpus(hyp_toks, ref_toks, max_order, smoothing)
    meteors = tuple(meteor_sentence(h, rs) for h, rs in zip(hyp_toks, ref_toks))
    ters = tuple(ter_sentence(h, rs) for h, rs in zip(hyp_toks, ref_toks))
    n = len(hyp_toks)
    return ScoreReport(
        bleu=bleu,
        meteor=math.fsum(m.score for m in meteors) / n,
        ter=math.fsum(t.score for t in ters) / n,
        meteor_segments=meteors,
        ter_segments=ters,
        skipped_lines=skipped,
    )


def score_files(hyp_path: str | Path, ref_paths: Sequence[str | Path], max_order: int = 4,
                smoothing: str = "none", tokenize: str = "wordpunct") -> ScoreReport:
    """Corpus BLEU plus macro-averaged METEOR and TER for a hypothesis file."""
    if not ref_paths:
        raise ValueError("at least one reference file is required")
    hyps, refs, skipped = align_lines(read_lines(hyp_path), [read_lines(p) for p in ref_paths])
    return score_segments(hyps, refs, max_order, smoothing, tokenize, skipped)


BUCKET_HEADER = ("bucket", "count")


def eval_buckets(
    hyps: Sequence[str],
    refs: Sequence[Sequence[str]],
    edges: Sequence[int] = DEFAULT_EDGES,
    max_order: int = 4,
    lengths: Sequence[int] | None = None,
    tokenize: str = "wordpunct",
) -> list[dict]:
    """BLEU-1..``max_order`` per length bucket with floor smoothing.

    Segments are bucketed by ``lengths`` when given, otherwise by the token
    count of their first reference.  Empty buckets get ``None`` scores.
    """
    if len(hyps) != len(refs):
        raise AlignmentError(f"{len(hyps)} hypotheses but {len(refs)} reference sets")
    if lengths is not None and len(lengths) != len(hyps):
        raise AlignmentError(f"{len(lengths)} lengths for {len(hyps)} segments")
    tok = TOKENIZERS[tokenize]
    hyp_toks = [tok(h) for h in hyps]
    ref_toks = [[tok(r) for r in rs] for rs in refs]
    if lengths is None:
        lengths = [len(rs[0]) for rs in ref_toks]
    labels = bucket_labels(edges)
    members: list[list[int]] = [[] for _ in labels]
    for i, n in enumerate(lengths):
        members[bucket_of(n, edges)].append(i)
    rows = []
    for label, idx in zip(labels, members):
        row: dict = {"bucket": label, "count": len(idx)}
        for order in range(1, max_order + 1):
            if idx:
                score = bleu_corpus([hyp_toks[i] for i in idx], [ref_toks[i] for i in idx],
                                    order, "floor").score
            else:
                score = None
            row[f"bleu{order}"] = score
        rows.append(row)
    return rows


def format_bucket_csv(rows: Sequence[dict], max_order: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*BUCKET_HEADER, *(f"BLEU-{n}" for n in range(1, max_order + 1))])
    for row in rows:
        scores = [row[f"bleu{n}"] for n in range(1, max_order + 1)]
        writer.writerow([row["bucket"], row["count"], *("" if s is None else f"{s:.4f}" for s in scores)])
    return buf.getvalue()
