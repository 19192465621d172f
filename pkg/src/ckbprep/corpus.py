"""Parallel corpus ingestion, statistics, splitting and length bucketing."""
from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ckbprep.textio import split_lines
from ckbprep.tokenizers.wordpunct import wordpunct_tokenize

log = logging.getLogger(__name__)

XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"
Tokenizer = Callable[[str], Sequence[str]]


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class SentencePair:
    id: int
    corpus_tag: str
    src_lang: str
    tgt_lang: str
    src: str
    refs: tuple[str, ...]

    def __post_init__(self):
        if not self.refs:
            raise ValueError(f"pair {self.id} has no reference")

    @property
    def key(self) -> tuple[str, int]:
        return (self.corpus_tag, self.id)

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "corpus": self.corpus_tag, "src_lang": self.src_lang,
             "tgt_lang": self.tgt_lang, "src": self.src, "refs": list(self.refs)},
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "SentencePair":
        d = json.loads(line)
        return cls(int(d["id"]), d["corpus"], d["src_lang"], d["tgt_lang"], d["src"], tuple(d["refs"]))


@dataclass
class ParallelCorpus:
    pairs: list[SentencePair]
    provenance: tuple[str, ...] = ()
    skipped: int = 0

    def __post_init__(self):
        for a, b in zip(self.pairs, self.pairs[1:]):
            if b.id <= a.id:
                raise CorpusError(f"pair ids must be strictly increasing ({a.id} then {b.id})")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _lang_matches(lang: str | None, wanted: str) -> bool:
    if not lang:
        return False
    lang = lang.lower().replace("_", "-")
    wanted = wanted.lower()
    return lang == wanted or lang.startswith(wanted + "-")


def parse_tmx(data: bytes, src_lang: str, tgt_lang: str, corpus_tag: str = "other") -> ParallelCorpus:
    """Read ``<tu>`` units holding both languages; extra target variants become extra refs."""
    pairs = []
    skipped = 0
    try:
        # stream the document and drop each unit once read
        for _, tu in ET.iterparse(io.BytesIO(data), events=("end",)):
            if tu.tag != "tu":
                continue
            srcs, tgts = [], []
            for tuv in tu.iter("tuv"):
                lang = tuv.get(XML_LANG) or tuv.get("lang")
                seg = tuv.find("seg")
                if seg is None:
                    continue
                text = "".join(seg.itertext()).strip()
                if _lang_matches(lang, src_lang):
                    srcs.append(text)
                elif _lang_matches(lang, tgt_lang):
                    tgts.append(text)
            tu.clear()
            if not srcs or not tgts:
                skipped += 1
                continue
            pairs.append(SentencePair(len(pairs), corpus_tag, src_lang, tgt_lang, srcs[0], tuple(tgts)))
    except ET.ParseError as exc:
        line, col = exc.position
        raise CorpusError(f"malformed TMX at line {line}, column {col}: {exc}") from None
    if skipped:
        log.warning("skipped %d <tu> lacking %s or %s", skipped, src_lang, tgt_lang)
    if not pairs:
        raise CorpusError(f"no usable <tu> for {src_lang}-{tgt_lang}")
    return ParallelCorpus(pairs, (sha256_bytes(data),), skipped)


def read_parallel_text(src_path: str | Path, tgt_path: str | Path, src_lang: str, tgt_lang: str,
                       corpus_tag: str = "other") -> ParallelCorpus:
    src_bytes = Path(src_path).read_bytes()
    tgt_bytes = Path(tgt_path).read_bytes()
    src = split_lines(src_bytes.decode("utf-8"))
    tgt = split_lines(tgt_bytes.decode("utf-8"))
    if len(src) != len(tgt):
        raise CorpusError(f"{src_path} has {len(src)} lines but {tgt_path} has {len(tgt)}")
    pairs = [SentencePair(i, corpus_tag, src_lang, tgt_lang, s, (t,)) for i, (s, t) in enumerate(zip(src, tgt))]
    return ParallelCorpus(pairs, (sha256_bytes(src_bytes), sha256_bytes(tgt_bytes)))


def dumps_jsonl(pairs: Iterable[SentencePair]) -> str:
    return "".join(p.to_json() + "\n" for p in pairs)


def write_jsonl(pairs: Iterable[SentencePair], path: str | Path) -> None:
    Path(path).write_text(dumps_jsonl(pairs), encoding="utf-8")


def loads_jsonl(text: str) -> list[SentencePair]:
    pairs = []
    for lineno, line in enumerate(split_lines(text), 1):
        if not line.strip():
            continue
        try:
            pairs.append(SentencePair.from_json(line))
        except (KeyError, ValueError, TypeError) as exc:
            raise CorpusError(f"line {lineno}: bad pair record ({exc})") from None
    return pairs


def read_jsonl(path: str | Path) -> ParallelCorpus:
    data = Path(path).read_bytes()
    return ParallelCorpus(loads_jsonl(data.decode("utf-8")), (sha256_bytes(data),))


def explode(corpus: ParallelCorpus) -> ParallelCorpus:
    """One single-reference pair per reference, renumbered in order."""
    pairs = []
    for p in corpus.pairs:
        for ref in p.refs:
            pairs.append(replace(p, id=len(pairs), refs=(ref,)))
    return ParallelCorpus(pairs, corpus.provenance, corpus.skipped)


# -- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    lang: str
    line_count: int
    token_count: int
    char_count: int

    @property
    def tokens_per_line(self) -> Fraction:
        return Fraction(self.token_count, self.line_count)

    @property
    def chars_per_line(self) -> Fraction:
        return Fraction(self.char_count, self.line_count)

    def as_dict(self) -> dict:
        return {
            "lang": self.lang,
            "line_count": self.line_count,
            "token_count": self.token_count,
            "char_count": self.char_count,
            "tokens_per_line": round(float(self.tokens_per_line), 2),
            "chars_per_line": round(float(self.chars_per_line), 2),
        }


def _side_stats(lang: str, lines: Iterable[str], tokenizer: Tokenizer) -> CorpusStats:
    n = tokens = chars = 0
    for line in lines:
        n += 1
        tokens += len(tokenizer(line))
        chars += len(line)
    return CorpusStats(lang, n, tokens, chars)


def compute_stats(pairs: Sequence[SentencePair], tokenizer: Tokenizer = wordpunct_tokenize) -> dict[str, CorpusStats]:
    """Per-language line, token and character averages; every reference counts as a line."""
    pairs = list(pairs)
    if not pairs:
        raise CorpusError("cannot compute statistics of an empty corpus")
    src_lang, tgt_lang = pairs[0].src_lang, pairs[0].tgt_lang
    return {
        src_lang: _side_stats(src_lang, (p.src for p in pairs), tokenizer),
        tgt_lang: _side_stats(tgt_lang, (r for p in pairs for r in p.refs), tokenizer),
    }


def format_stats_table(rows: Sequence[tuple[str, CorpusStats]]) -> str:
    header = ("Corpus", "Language", "tokens per line", "characters per line")
    body = [(name, s.lang, f"{float(s.tokens_per_line):.2f}", f"{float(s.chars_per_line):.2f}") for name, s in rows]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(4)]

    def fmt(row):
        return "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))

    return "\n".join([fmt(header), *(fmt(r) for r in body)]) + "\n"


# -- splitting ------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    test2_fraction: float = 0.10
    ratios: tuple[float, float, float] = (0.80, 0.10, 0.10)

    def __post_init__(self):
        if not 0 < self.test2_fraction < 1:
            raise ValueError("test2_fraction must lie in (0, 1)")
        if len(self.ratios) != 3 or any(not 0 < r < 1 for r in self.ratios):
            raise ValueError("ratios must be three fractions in (0, 1)")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("train/val/test1 ratios must sum to 1")


def decimal_fraction(x: float) -> Fraction:
    # repr gives the shortest decimal, so 0.1 means exactly 1/10
    return Fraction(repr(float(x)))


def round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


@dataclass
class SplitResult:
    test2: dict[str, list[SentencePair]] = field(default_factory=dict)
    train: list[SentencePair] = field(default_factory=list)
    val: list[SentencePair] = field(default_factory=list)
    test1: list[SentencePair] = field(default_factory=list)

    def sets(self) -> dict[str, list[SentencePair]]:
        out = {f"test2.{tag}": pairs for tag, pairs in self.test2.items()}
        out.update(train=self.train, val=self.val, test1=self.test1)
        return out


MIN_SPLIT_SIZE = 10


def split_corpus(corpora: Sequence[ParallelCorpus], spec: SplitSpec = SplitSpec()) -> SplitResult:
    """Hold out a per-corpus test set, then split the merged rest into train/val/test1.

    Pairs are identified by ``(corpus_tag, id)``; one seeded generator drives every shuffle.
    """
    rng = random.Random(spec.seed)
    result = SplitResult()
    rest: list[SentencePair] = []
    seen: set[tuple[str, int]] = set()
    for corpus in corpora:
        pairs = list(corpus.pairs)
        if len(pairs) < MIN_SPLIT_SIZE:
            raise CorpusError("corpus too small to split")
        tag = pairs[0].corpus_tag
        for p in pairs:
            if p.key in seen:
                raise CorpusError(f"duplicate pair key {p.key}")
            seen.add(p.key)
        if tag in result.test2:
            raise CorpusError(f"two corpora share the tag {tag!r}")
        # held-out size rounds down: 92325, 2355 and 4659 pairs give 9232, 235 and 465
        k = math.floor(decimal_fraction(spec.test2_fraction) * len(pairs))
        order = list(range(len(pairs)))
        rng.shuffle(order)
        held = set(order[:k])
        result.test2[tag] = [pairs[i] for i in sorted(order[:k])]
        rest.extend(p for i, p in enumerate(pairs) if i not in held)
    rng.shuffle(rest)
    m = len(rest)
    n_train = round_half_up(decimal_fraction(spec.ratios[0]) * m)
    n_val = round_half_up(decimal_fraction(spec.ratios[1]) * m)
    n_val = min(n_val, m - n_train)
    result.train = rest[:n_train]
    result.val = rest[n_train:n_train + n_val]
    result.test1 = rest[n_train + n_val:]
    return result


# -- length buckets ------------------------------------------------------------

DEFAULT_EDGES = (25, 50, 75)


def bucket_labels(edges: Sequence[int]) -> list[str]:
    edges = list(edges)
    if any(b <= a for a, b in zip(edges, edges[1:])) or not edges:
        raise ValueError("bucket edges must be non-empty and strictly increasing")
    labels = [f"≤{edges[0]}"]
    labels += [f"({a},{b}]" for a, b in zip(edges, edges[1:])]
    labels.append(f">{edges[-1]}")
    return labels


def bucket_of(length: int, edges: Sequence[int]) -> int:
    for i, edge in enumerate(edges):
        if length <= edge:
            return i
    return len(edges)


def filter_by_length(
    pairs: Iterable[SentencePair],
    tokenizer: Tokenizer = wordpunct_tokenize,
    edges: Sequence[int] = DEFAULT_EDGES,
    side: str = "src",
) -> dict[str, list[SentencePair]]:
    """Partition pairs by token count of the source (or first reference) side."""
    labels = bucket_labels(edges)
    buckets: dict[str, list[SentencePair]] = {label: [] for label in labels}
    for p in pairs:
        text = p.src if side == "src" else p.refs[0]
        buckets[labels[bucket_of(len(tokenizer(text)), edges)]].append(p)
    return buckets
