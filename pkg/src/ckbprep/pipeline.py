"""End-to-end preparation runs driven by a JSON config, with a digest manifest."""
from __future__ import annotations

import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable

from ckbprep.corpus import (
    ParallelCorpus,
    SentencePair,
    SplitSpec,
    compute_stats,
    dumps_jsonl,
    explode,
    format_stats_table,
    parse_tmx,
    read_jsonl,
    read_parallel_text,
    sha256_bytes,
    split_corpus,
)
from ckbprep.lexicon import FrequencyLexicon, split_trailing_conjunction
from ckbprep.normalize import GraphemeMap, NormalizationConfig, TruecaseModel, normalize_pipeline, train_truecaser
from ckbprep.textio import read_lines
from ckbprep.tokenizers import KINDS, TrainerConfig, encode, save_model, train
from ckbprep.tokenizers.wordpunct import WORDPUNCT_RE, count_pretokens, wordpunct_tokenize

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
MANIFEST_VERSION = 1
STAGES = ("ingest", "normalize", "repair", "train-tokenizer", "tokenize", "split", "stats")
FORMATS = ("tmx", "text", "jsonl")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class CorpusInput:
    path: Path
    tag: str
    format: str = "tmx"
    src_lang: str = "ckb"
    tgt_lang: str = "en"
    tgt_path: Path | None = None
    repair: bool | None = None  # None: on for tanzil, off otherwise

    @property
    def repair_enabled(self) -> bool:
        return self.tag == "tanzil" if self.repair is None else self.repair


@dataclass(frozen=True)
class PipelineConfig:
    corpora: tuple[CorpusInput, ...]
    output_dir: Path
    normalization: dict[str, dict] = field(default_factory=dict)
    profile: Path | None = None
    lexicon: Path | None = None
    truecase_model: Path | None = None
    tokenizer_kind: str = "wordpunct"
    trainer: TrainerConfig = TrainerConfig()
    train_corpus: Path | None = None
    split: SplitSpec = SplitSpec()
    explode_refs: bool = False
    raw: dict = field(default_factory=dict, compare=False)
    base: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "PipelineConfig":
        def path(value):
            return None if value is None else (base / value)

        try:
            corpora = tuple(
                CorpusInput(
                    path=path(c["path"]),
                    tag=c["tag"],
                    format=c.get("format", "tmx"),
                    src_lang=c.get("src_lang", "ckb"),
                    tgt_lang=c.get("tgt_lang", "en"),
                    tgt_path=path(c.get("tgt_path")),
                    repair=c.get("repair"),
                )
                for c in data["corpora"]
            )
            tok = dict(data.get("tokenizer", {"kind": "wordpunct"}))
            kind = tok.pop("kind", "wordpunct")
            train_corpus = path(tok.pop("train_corpus", None))
            known = {f.name for f in fields(TrainerConfig)}
            unknown = set(tok) - known
            if unknown:
                raise ValueError(f"unknown tokenizer options {sorted(unknown)}")
            split = dict(data.get("split", {}))
            explode_refs = bool(split.pop("explode", False))
            if "ratios" in split:
                split["ratios"] = tuple(split["ratios"])
            config = cls(
                corpora=corpora,
                output_dir=path(data["output_dir"]),
                normalization=dict(data.get("normalization", {})),
                profile=path(data.get("profile")),
                lexicon=path(data.get("lexicon")),
                truecase_model=path(data.get("truecase_model")),
                tokenizer_kind=kind,
                trainer=TrainerConfig(**tok),
                train_corpus=train_corpus,
                split=SplitSpec(**split),
                explode_refs=explode_refs,
                raw=data,
                base=base,
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad pipeline config: {exc!r}") from None
        if not corpora:
            raise ValueError("bad pipeline config: no corpora")
        if kind not in ("wordpunct", *KINDS):
            raise ValueError(f"bad pipeline config: unknown tokenizer kind {kind!r}")
        for c in corpora:
            if c.format not in FORMATS:
                raise ValueError(f"bad pipeline config: unknown format {c.format!r}")
            if c.format == "text" and c.tgt_path is None:
                raise ValueError(f"bad pipeline config: text corpus {c.tag!r} needs tgt_path")
        if len({c.tag for c in corpora}) != len(corpora):
            raise ValueError("bad pipeline config: corpus tags must be unique")
        return config

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"bad pipeline config: {exc}") from None
        return cls.from_dict(data, path.parent)

    def input_paths(self) -> list[Path]:
        paths = []
        for c in self.corpora:
            paths.append(c.path)
            if c.tgt_path is not None:
                paths.append(c.tgt_path)
        for p in (self.profile, self.truecase_model, self.train_corpus):
            if p is not None:
                paths.append(p)
        return paths


def _json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _ingest(c: CorpusInput) -> ParallelCorpus:
    if c.format == "tmx":
        return parse_tmx(c.path.read_bytes(), c.src_lang, c.tgt_lang, c.tag)
    if c.format == "text":
        return read_parallel_text(c.path, c.tgt_path, c.src_lang, c.tgt_lang, c.tag)
    corpus = read_jsonl(c.path)
    return ParallelCorpus([replace(p, corpus_tag=c.tag) for p in corpus.pairs], corpus.provenance)


def repair_line(text: str, lexicon: FrequencyLexicon) -> str:
    """Split wrongly attached conjunctions inside running text, keeping other spacing."""
    out, last = [], 0
    for m in WORDPUNCT_RE.finditer(text):
        out.append(text[last:m.start()])
        out.append(" ".join(split_trailing_conjunction(m.group(), lexicon)))
        last = m.end()
    out.append(text[last:])
    return "".join(out)


def _side_lines(corpora, lang: str) -> list[str]:
    """Every text of ``lang`` in the corpora, sources and references alike."""
    lines = []
    for corpus in corpora:
        for p in corpus:
            if p.src_lang == lang:
                lines.append(p.src)
            if p.tgt_lang == lang:
                lines.extend(p.refs)
    return lines


class _Run:
    def __init__(self, config: PipelineConfig, workdir: Path):
        self.config = config
        self.work = workdir
        self.outputs: list[str] = []
        self.counts: dict = {}
        self.warnings = 0

    def write(self, rel: str, text: str) -> Path:
        path = self.work / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.outputs.append(rel)
        return path

    def write_pairs(self, rel: str, pairs) -> None:
        self.write(rel, dumps_jsonl(pairs))

    # -- stages -----------------------------------------------------------------

    def ingest(self) -> list[ParallelCorpus]:
        corpora = []
        for c in self.config.corpora:
            corpus = _ingest(c)
            if self.config.explode_refs:
                corpus = explode(corpus)
            corpora.append(corpus)
            self.write_pairs(f"ingested/{c.tag}.jsonl", corpus.pairs)
        return corpora

    def normalize(self, corpora: list[ParallelCorpus]) -> list[ParallelCorpus]:
        cfg = self.config
        profile = GraphemeMap.load(cfg.profile) if cfg.profile else None
        langs = {c.src_lang for c in cfg.corpora} | {c.tgt_lang for c in cfg.corpora}
        norm: dict[str, NormalizationConfig] = {}
        for lang in sorted(langs):
            overrides = dict(cfg.normalization.get(lang, {}))
            if profile is not None:
                overrides.setdefault("grapheme_profile", profile)
            norm[lang] = NormalizationConfig.for_lang(lang, **overrides)
        truecasers: dict[str, TruecaseModel | None] = {}
        for lang, nc in norm.items():
            if not nc.truecase:
                truecasers[lang] = None
            elif cfg.truecase_model is not None:
                truecasers[lang] = TruecaseModel.load(cfg.truecase_model)
            else:
                sentences = [wordpunct_tokenize(t) for t in _side_lines(corpora, lang)]
                sentences = [s for s in sentences if s]
                truecasers[lang] = train_truecaser(sentences) if sentences else None
                if truecasers[lang] is not None:
                    truecasers[lang].save(self.work / f"truecase.{lang}.json")
                    self.outputs.append(f"truecase.{lang}.json")
        self.fingerprints = {lang: nc.fingerprint() for lang, nc in norm.items()}

        def run(text: str, lang: str) -> str:
            out, warns = normalize_pipeline(text, norm[lang], truecasers[lang])
            self.warnings += len(warns)
            return out

        result = []
        for c, corpus in zip(cfg.corpora, corpora):
            pairs = [replace(p, src=run(p.src, p.src_lang), refs=tuple(run(r, p.tgt_lang) for r in p.refs))
                     for p in corpus.pairs]
            result.append(ParallelCorpus(pairs, corpus.provenance, corpus.skipped))
        return result

    def repair(self, corpora: list[ParallelCorpus]) -> list[ParallelCorpus]:
        cfg = self.config
        wanted = [c.repair_enabled for c in cfg.corpora]
        lexicon = None
        if any(wanted):
            if cfg.lexicon is None:
                raise ValueError("repair is enabled but no lexicon is configured")
            if not cfg.lexicon.is_file():
                raise FileNotFoundError(f"lexicon not found: {cfg.lexicon}")
            lexicon = FrequencyLexicon.load(cfg.lexicon)
            self.lexicon_digest = sha256_bytes(cfg.lexicon.read_bytes())
        result = []
        for c, corpus, on in zip(cfg.corpora, corpora, wanted):
            if on:
                corpus = ParallelCorpus([replace(p, src=repair_line(p.src, lexicon)) for p in corpus.pairs],
                                        corpus.provenance, corpus.skipped)
            result.append(corpus)
            self.write_pairs(f"normalized/{c.tag}.jsonl", corpus.pairs)
        return result

    def train_tokenizer(self, corpora: list[ParallelCorpus]) -> dict[str, Callable[[str], list[str]]]:
        cfg = self.config
        langs = sorted({c.src_lang for c in cfg.corpora} | {c.tgt_lang for c in cfg.corpora})
        if cfg.tokenizer_kind == "wordpunct":
            return {lang: wordpunct_tokenize for lang in langs}
        tokenizers = {}
        for lang in langs:
            lines = _side_lines(corpora, lang)
            if cfg.train_corpus is not None and lang == cfg.corpora[0].src_lang:
                lines = read_lines(cfg.train_corpus)
            model = train(cfg.tokenizer_kind, count_pretokens(lines), cfg.trainer, self.fingerprints[lang])
            rel = f"tokenizer/{lang}.model.json"
            (self.work / "tokenizer").mkdir(exist_ok=True)
            save_model(model, self.work / rel)
            self.outputs.append(rel)
            tokenizers[lang] = lambda text, m=model: encode(m, text)
        return tokenizers

    def tokenize(self, corpora, tokenizers) -> list[ParallelCorpus]:
        result = []
        for corpus in corpora:
            pairs = [replace(p, src=" ".join(tokenizers[p.src_lang](p.src)),
                             refs=tuple(" ".join(tokenizers[p.tgt_lang](r)) for r in p.refs))
                     for p in corpus.pairs]
            result.append(ParallelCorpus(pairs, corpus.provenance, corpus.skipped))
        return result

    def split(self, corpora) -> dict[str, list[SentencePair]]:
        sets = split_corpus(corpora, self.config.split).sets()
        for name, pairs in sets.items():
            self.write_pairs(f"splits/{name}.jsonl", pairs)
        return sets

    def stats(self, sets: dict[str, list[SentencePair]]) -> None:
        counts: dict = {}
        rows = []
        for name in sorted(sets):
            per_corpus: dict = {}
            for p in sets[name]:
                entry = per_corpus.setdefault(p.corpus_tag, {"sentences": 0, "src_tokens": 0, "tgt_tokens": 0})
                entry["sentences"] += 1
                entry["src_tokens"] += len(p.src.split())
                entry["tgt_tokens"] += sum(len(r.split()) for r in p.refs)
            counts[name] = {tag: per_corpus[tag] for tag in sorted(per_corpus)}
            if sets[name]:
                for lang, st in compute_stats(sets[name], str.split).items():
                    rows.append((name, st))
        self.counts = counts
        self.write("stats.json", _json([{"set": name, **st.as_dict()} for name, st in rows]))
        self.write("stats.txt", format_stats_table(rows))


def _digest(path: Path) -> str:
    return sha256_bytes(path.read_bytes())


def _install(tmp: Path, target: Path) -> None:
    if target.exists():
        old = Path(tempfile.mkdtemp(prefix=f".{target.name}.old-", dir=target.parent))
        os.replace(target, old / "prev")
        os.replace(tmp, target)
        shutil.rmtree(old, ignore_errors=True)
    else:
        os.replace(tmp, target)


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage and install the outputs plus ``manifest.json`` atomically."""
    missing = [str(p) for p in config.input_paths() if not p.is_file()]
    if missing:
        raise PipelineError("ingest", f"missing input files: {', '.join(missing)}")
    target = config.output_dir
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.tmp-", dir=target.parent))
    run = _Run(config, tmp)
    stage = STAGES[0]
    try:
        corpora = run.ingest()
        stage = "normalize"
        corpora = run.normalize(corpora)
        stage = "repair"
        corpora = run.repair(corpora)
        stage = "train-tokenizer"
        tokenizers = run.train_tokenizer(corpora)
        stage = "tokenize"
        corpora = run.tokenize(corpora, tokenizers)
        stage = "split"
        sets = run.split(corpora)
        stage = "stats"
        run.stats(sets)
        manifest = {
            "version": MANIFEST_VERSION,
            "config": config.raw,
            "inputs": {os.path.relpath(p, config.base): _digest(p) for p in config.input_paths()},
            "lexicon": getattr(run, "lexicon_digest", None),
            "normalization_fingerprints": run.fingerprints,
            "tokenizer": config.tokenizer_kind,
            "counts": run.counts,
            "normalization_warnings": run.warnings,
            "outputs": {rel: _digest(tmp / rel) for rel in sorted(run.outputs)},
        }
        (tmp / MANIFEST).write_text(_json(manifest), encoding="utf-8")
        _install(tmp, target)
        log.info("wrote %d outputs to %s", len(run.outputs), target)
    except PipelineError:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    except Exception as exc:  # any stage failure aborts the whole run
        shutil.rmtree(tmp, ignore_errors=True)
        raise PipelineError(stage, str(exc)) from exc
    return manifest


def verify_outputs(output_dir: str | Path) -> list[str]:
    """Problems found when re-checking the manifest digests (empty when all match)."""
    output_dir = Path(output_dir)
    manifest_path = output_dir / MANIFEST
    if not manifest_path.is_file():
        return [f"no {MANIFEST} in {output_dir}"]
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    problems = []
    for rel, digest in manifest.get("outputs", {}).items():
        path = output_dir / rel
        if not path.is_file():
            problems.append(f"missing: {rel}")
        elif _digest(path) != digest:
            problems.append(f"digest mismatch: {rel}")
    return problems
