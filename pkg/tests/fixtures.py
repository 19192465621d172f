"""Synthetic Kurdish-English corpora for pipeline and CLI tests."""
import json
import random
from pathlib import Path
from xml.sax.saxutils import escape

CKB_WORDS = "ئەم ڕۆژ کتێب دەخوێنم نان خواردن تاوانبار ماڵ باش زۆر".split() + ["تاوانبارو"]
EN_WORDS = "the day book read and bread eat guilty house good very".split()


def synthetic_pairs(n: int, seed: int = 0):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        k = rng.randint(1, 9)
        src = " ".join(rng.choice(CKB_WORDS) for _ in range(k))
        tgt = " ".join(rng.choice(EN_WORDS) for _ in range(k)).capitalize() + " ."
        pairs.append((src, tgt))
    return pairs


def write_tmx(path: Path, pairs) -> Path:
    units = "".join(
        f'<tu><tuv xml:lang="ckb"><seg>{escape(s)}</seg></tuv><tuv xml:lang="en"><seg>{escape(t)}</seg></tuv></tu>\n'
        for s, t in pairs
    )
    path.write_text(f'<?xml version="1.0" encoding="UTF-8"?>\n<tmx version="1.4"><body>\n{units}</body></tmx>\n',
                    encoding="utf-8")
    return path


def write_parallel(directory: Path, stem: str, pairs):
    src = directory / f"{stem}.ckb"
    tgt = directory / f"{stem}.en"
    src.write_text("".join(s + "\n" for s, _ in pairs), encoding="utf-8")
    tgt.write_text("".join(t + "\n" for _, t in pairs), encoding="utf-8")
    return src, tgt


def write_lexicon(path: Path) -> Path:
    path.write_text("#total\t1223\nتاوانبار\t1218\nتاوانبارو\t5\n", encoding="utf-8")
    return path


def write_config(directory: Path, **overrides) -> Path:
    src, tgt = write_parallel(directory, "ted", synthetic_pairs(200))
    config = {
        "corpora": [{"path": src.name, "tgt_path": tgt.name, "format": "text", "tag": "ted"}],
        "split": {"seed": 11},
        "tokenizer": {"kind": "wordpunct"},
        "output_dir": "run",
    }
    config.update(overrides)
    path = directory / "config.json"
    path.write_text(json.dumps(config, ensure_ascii=False), encoding="utf-8")
    return path
