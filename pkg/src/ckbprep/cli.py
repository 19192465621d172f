"""Command line entry point: ``ckbprep <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ckbprep.corpus import (
    DEFAULT_EDGES,
    SplitSpec,
    compute_stats,
    dumps_jsonl,
    explode,
    filter_by_length,
    format_stats_table,
    parse_tmx,
    read_jsonl,
    split_corpus,
    write_jsonl,
)
from ckbprep.lexicon import FrequencyLexicon, build_lexicon
from ckbprep.metrics.report import align_lines, eval_buckets, format_bucket_csv, score_files
from ckbprep.normalize import (
    GraphemeMap,
    NormalizationConfig,
    TruecaseModel,
    normalize_pipeline,
    train_truecaser,
)
from ckbprep.pipeline import PipelineConfig, PipelineError, repair_line, run_pipeline, verify_outputs
from ckbprep.textio import read_lines, split_lines
from ckbprep.tokenizers import KINDS, TrainerConfig, encode, load_model, save_model, train
from ckbprep.tokenizers.wordpunct import count_pretokens, wordpunct_tokenize

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# -- I/O helpers ----------------------------------------------------------------

def _read_input(paths) -> list[str]:
    if not paths:
        return split_lines(sys.stdin.read())
    lines = []
    for p in paths:
        lines.extend(read_lines(p))
    return lines


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def _require_out(args, what: str) -> Path:
    if not getattr(args, "out", None):
        raise UsageError(f"{what} needs --out")
    return Path(args.out)


# -- subcommands ------------------------------------------------------------------

def cmd_normalize(args) -> int:
    overrides = {}
    if args.profile:
        overrides["grapheme_profile"] = GraphemeMap.load(args.profile)
    if args.no_initial_r:
        overrides["initial_r"] = False
    if args.no_parens:
        overrides["strip_parens"] = False
    if args.keep_zwnj:
        overrides["remove_zwnj"] = False
    config = NormalizationConfig.for_lang(args.lang, **overrides)
    truecaser = TruecaseModel.load(args.truecase_model) if args.truecase_model else None
    out = []
    for lineno, line in enumerate(_read_input(args.input), 1):
        text, warns = normalize_pipeline(line, config, truecaser)
        for w in warns:
            print(f"line {lineno}: {w}", file=sys.stderr)
        out.append(text + "\n")
    _emit(args, "".join(out))
    return EXIT_OK


def cmd_build_lexicon(args) -> int:
    lines = _read_input(args.input)
    lexicon = build_lexicon(tok for line in lines for tok in wordpunct_tokenize(line))
    _emit(args, lexicon.dumps())
    return EXIT_OK


def cmd_repair(args) -> int:
    lexicon = FrequencyLexicon.load(args.lexicon)
    _emit(args, "".join(repair_line(line, lexicon) + "\n" for line in _read_input(args.input)))
    return EXIT_OK


def cmd_train_tokenizer(args) -> int:
    out = _require_out(args, "train-tokenizer")
    config = TrainerConfig(
        vocabulary_size=args.vocab_size,
        character_coverage=args.coverage,
        max_piece_length=args.max_piece_length,
        min_pair_frequency=args.min_pair_frequency,
    )
    counts = count_pretokens(_read_input(args.input), shards=args.shards)
    model = train(args.kind, counts, config, args.fingerprint, shards=args.shards)
    save_model(model, out)
    if args.json:
        _emit_json({"kind": model.kind, "vocab_size": len(model.vocab), "merges": len(model.merges)})
    return EXIT_OK


def cmd_train_truecaser(args) -> int:
    out = _require_out(args, "train-truecaser")
    sentences = [toks for toks in map(wordpunct_tokenize, _read_input(args.input)) if toks]
    train_truecaser(sentences).save(out)
    return EXIT_OK


def cmd_tokenize(args) -> int:
    if args.wordpunct:
        tokenize = wordpunct_tokenize
    else:
        model = load_model(args.model)
        def tokenize(text):
            return encode(model, text)
    _emit(args, "".join(" ".join(tokenize(line)) + "\n" for line in _read_input(args.input)))
    return EXIT_OK


def cmd_ingest_tmx(args) -> int:
    corpus = parse_tmx(Path(args.input).read_bytes(), args.src, args.tgt, args.tag)
    if args.explode:
        corpus = explode(corpus)
    _emit(args, dumps_jsonl(corpus.pairs))
    if corpus.skipped:
        print(f"skipped {corpus.skipped} translation units", file=sys.stderr)
    return EXIT_OK


def _tokenizer_for(args):
    if getattr(args, "model", None):
        model = load_model(args.model)
        return lambda text: encode(model, text)
    return wordpunct_tokenize


def cmd_stats(args) -> int:
    tokenize = _tokenizer_for(args)
    rows = []
    for path in args.input:
        corpus = read_jsonl(path)
        pairs = corpus.pairs
        if args.normalized and pairs:
            configs = {}

            def norm(text, lang):
                if lang not in configs:
                    configs[lang] = NormalizationConfig.for_lang(lang) if lang in ("ckb", "en") else None
                return normalize_pipeline(text, configs[lang])[0] if configs[lang] else text

            pairs = [replace(p, src=norm(p.src, p.src_lang), refs=tuple(norm(r, p.tgt_lang) for r in p.refs))
                     for p in pairs]
        name = pairs[0].corpus_tag if pairs else Path(path).stem
        for st in compute_stats(pairs, tokenize).values():
            rows.append((name, st))
    if args.json:
        _emit_json([{"corpus": name, **st.as_dict()} for name, st in rows])
    else:
        _emit(args, format_stats_table(rows))
    return EXIT_OK


def cmd_split(args) -> int:
    out = _require_out(args, "split")
    spec = SplitSpec(seed=0 if args.seed is None else args.seed, test2_fraction=args.test2, ratios=args.ratios)
    result = split_corpus([read_jsonl(p) for p in args.input], spec)
    out.mkdir(parents=True, exist_ok=True)
    sizes = {}
    for name, pairs in result.sets().items():
        write_jsonl(pairs, out / f"{name}.jsonl")
        sizes[name] = len(pairs)
    if args.json:
        _emit_json(sizes)
    else:
        for name, n in sizes.items():
            print(f"{name}\t{n}")
    return EXIT_OK


def cmd_buckets(args) -> int:
    edges = args.edges
    if args.hyp:
        if not args.ref:
            raise UsageError("buckets --hyp needs at least one --ref")
        hyp_lines = read_lines(args.hyp)
        hyps, refs, skipped = align_lines(hyp_lines, [read_lines(p) for p in args.ref])
        lengths = None
        if args.side == "src":
            if not args.src:
                raise UsageError("--side src needs --src")
            src = read_lines(args.src)
            if len(src) != len(hyp_lines):
                raise ValueError(f"{args.src} has {len(src)} lines but the hypothesis has {len(hyp_lines)}")
            dropped = set(skipped)
            lengths = [len(wordpunct_tokenize(s)) for i, s in enumerate(src, 1) if i not in dropped]
        rows = eval_buckets(hyps, refs, edges, args.max_order, lengths)
        if args.json:
            _emit_json(rows)
        else:
            _emit(args, format_bucket_csv(rows, args.max_order))
        return EXIT_OK
    if not args.input:
        raise UsageError("buckets needs --in (pairs mode) or --hyp/--ref (evaluation mode)")
    pairs = [p for path in args.input for p in read_jsonl(path).pairs]
    buckets = filter_by_length(pairs, wordpunct_tokenize, edges, side=args.side)
    counts = {label: len(members) for label, members in buckets.items()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, members in enumerate(buckets.values()):
            write_jsonl(members, out / f"bucket{i}.jsonl")
    if args.json:
        _emit_json(counts)
    else:
        sys.stdout.write("".join(f"{label}\t{n}\n" for label, n in counts.items()))
    return EXIT_OK


def cmd_score(args) -> int:
    report = score_files(args.hyp, args.ref, args.max_order, args.smooth, args.tokenize)
    if args.json:
        _emit_json(report.as_dict())
    else:
        sys.stdout.write(report.format_text())
    return EXIT_OK


def cmd_run(args) -> int:
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.out:
        data["output_dir"] = str(Path(args.out).resolve())
    if args.seed is not None:
        data.setdefault("split", {})["seed"] = args.seed
    config = PipelineConfig.from_dict(data, Path(args.config).parent)
    manifest = run_pipeline(config)
    if args.json:
        _emit_json(manifest)
    else:
        for name, per_corpus in manifest["counts"].items():
            for tag, c in per_corpus.items():
                print(f"{name}\t{tag}\t{c['sentences']}\t{c['src_tokens']}\t{c['tgt_tokens']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    target = args.dir or args.out
    if not target:
        raise UsageError("verify needs an output directory")
    problems = verify_outputs(target)
    if args.json:
        _emit_json({"ok": not problems, "problems": problems})
    else:
        for p in problems:
            print(p)
        if not problems:
            print("ok")
    return EXIT_DATA if problems else EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")

    parser = Parser(prog="ckbprep", description="Sorani Kurdish / English MT data preparation and scoring.")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("normalize", cmd_normalize, "normalize text, stdin to stdout")
    p.add_argument("--lang", choices=("ckb", "en"), required=True)
    p.add_argument("--profile", help="grapheme map file")
    p.add_argument("--no-initial-r", action="store_true")
    p.add_argument("--no-parens", action="store_true")
    p.add_argument("--keep-zwnj", action="store_true")
    p.add_argument("--truecase-model")
    p.add_argument("--in", dest="input", action="append")

    p = add("build-lexicon", cmd_build_lexicon, "count WordPunct tokens into a lexicon TSV")
    p.add_argument("--in", dest="input", action="append")

    p = add("repair", cmd_repair, "split trailing conjunctions, stdin to stdout")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--in", dest="input", action="append")

    p = add("train-tokenizer", cmd_train_tokenizer, "train a BPE, WordPiece or Unigram model")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--vocab-size", type=int, default=50000)
    p.add_argument("--coverage", type=float, default=1.0)
    p.add_argument("--max-piece-length", type=int, default=16)
    p.add_argument("--min-pair-frequency", type=int, default=2)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--fingerprint", default="", help="normalization fingerprint to record")
    p.add_argument("--in", dest="input", action="append")

    p = add("train-truecaser", cmd_train_truecaser, "learn canonical casings from text")
    p.add_argument("--in", dest="input", action="append")

    p = add("tokenize", cmd_tokenize, "tokenize text, stdin to stdout")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--model")
    g.add_argument("--wordpunct", action="store_true")
    p.add_argument("--in", dest="input", action="append")

    p = add("ingest-tmx", cmd_ingest_tmx, "convert a TMX file to JSON Lines pairs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--src", default="ckb")
    p.add_argument("--tgt", default="en")
    p.add_argument("--tag", default="other")
    p.add_argument("--explode", action="store_true", help="one pair per reference")

    p = add("stats", cmd_stats, "tokens and characters per line")
    p.add_argument("--in", dest="input", action="append", required=True)
    p.add_argument("--model", help="count subword pieces instead of WordPunct tokens")
    p.add_argument("--normalized", action="store_true", help="normalize before counting")

    p = add("split", cmd_split, "per-corpus test2 hold-out then train/val/test1")
    p.add_argument("--in", dest="input", action="append", required=True)
    p.add_argument("--test2", type=float, default=0.10)
    p.add_argument("--ratios", type=_float_list, default=(0.8, 0.1, 0.1))

    p = add("buckets", cmd_buckets, "length buckets of pairs, or bucketed BLEU of a hypothesis")
    p.add_argument("--edges", type=_int_list, default=DEFAULT_EDGES)
    p.add_argument("--in", dest="input", action="append")
    p.add_argument("--hyp")
    p.add_argument("--ref", action="append")
    p.add_argument("--src")
    p.add_argument("--side", choices=("src", "ref"), default=None)
    p.add_argument("--max-order", type=int, default=4)

    p = add("score", cmd_score, "BLEU, METEOR and TER of a hypothesis file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", action="append", required=True)
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--smooth", choices=("none", "floor"), default="none")
    p.add_argument("--tokenize", choices=("wordpunct", "none"), default="wordpunct")

    p = add("run", cmd_run, "run the whole preparation pipeline from a JSON config")
    p.add_argument("--config", required=True)

    p = add("verify", cmd_verify, "re-check the digests of a pipeline output directory")
    p.add_argument("dir", nargs="?")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "buckets" and args.side is None:
        # evaluation mode buckets by reference length, pairs mode by source length
        args.side = "ref" if args.hyp else "src"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ckbprep {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"ckbprep run: stage {exc.stage} failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError, KeyError) as exc:
        print(f"ckbprep {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
