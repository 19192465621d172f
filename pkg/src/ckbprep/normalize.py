"""Normalization of raw Sorani Kurdish (Arabic script) and English text.

Every step is a pure function of its input.  ``normalize_pipeline`` composes
them in a fixed order::

    unify_graphemes -> remove_zwnj -> strip_parentheticals
        -> normalize_initial_r -> collapse_whitespace -> truecase
"""
from __future__ import annotations

import functools
import hashlib
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

ZWNJ = "\u200c"
REH = "\u0631"
REH_WITH_V = "\u0695"

# Tah and its presentation forms; folding them to teh is lossy for Arabic quotations.
TAH_SOURCES = frozenset("\u0637\ufec1\ufec2\ufec3\ufec4")


class GraphemeMapError(ValueError):
    pass


@dataclass(frozen=True)
class GraphemeMap:
    entries: tuple[tuple[str, str], ...]
    profile_name: str = "custom"
    _table: Mapping[int, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen: set[str] = set()
        for source, _ in self.entries:
            if len(source) != 1:
                raise GraphemeMapError(f"source must be a single codepoint: {source!r}")
            if source in seen:
                raise GraphemeMapError(f"duplicate source U+{ord(source):04X}")
            seen.add(source)
        for source, target in self.entries:
            clash = seen.intersection(target)
            if clash:
                c = sorted(clash)[0]
                raise GraphemeMapError(
                    f"target of U+{ord(source):04X} contains source codepoint U+{ord(c):04X}"
                )
        object.__setattr__(self, "_table", {ord(s): t for s, t in self.entries})

    @classmethod
    def parse(cls, text: str, profile_name: str = "custom") -> "GraphemeMap":
        entries = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                parts.append("")
            if len(parts) != 2:
                raise GraphemeMapError(f"line {lineno}: expected 'U+XXXX<TAB>U+YYYY[,...]'")
            try:
                source = _codepoint(parts[0].strip())
                target = "".join(_codepoint(t.strip()) for t in parts[1].split(",") if t.strip())
            except ValueError as exc:
                raise GraphemeMapError(f"line {lineno}: {exc}") from None
            entries.append((source, target))
        try:
            return cls(tuple(entries), profile_name)
        except GraphemeMapError as exc:
            raise GraphemeMapError(f"{profile_name}: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "GraphemeMap":
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), profile_name=path.stem)

    def dumps(self) -> str:
        lines = [f"# profile: {self.profile_name}"]
        for source, target in self.entries:
            lines.append(f"U+{ord(source):04X}\t" + ",".join(f"U+{ord(c):04X}" for c in target))
        return "\n".join(lines) + "\n"

    def without(self, sources: Iterable[str]) -> "GraphemeMap":
        drop = set(sources)
        kept = tuple(e for e in self.entries if e[0] not in drop)
        return GraphemeMap(kept, self.profile_name)

    def without_tah(self) -> "GraphemeMap":
        return self.without(TAH_SOURCES)

    @property
    def table(self) -> Mapping[int, str]:
        return self._table


def _codepoint(token: str) -> str:
    if not token.upper().startswith("U+"):
        raise ValueError(f"bad codepoint {token!r}")
    return chr(int(token[2:], 16))


@functools.lru_cache(maxsize=None)
def default_profile() -> GraphemeMap:
    """The shipped default profile: kaf/yeh/tah folding plus presentation forms."""
    text = resources.files("ckbprep").joinpath("profiles/paper.map").read_text(encoding="utf-8")
    return GraphemeMap.parse(text, profile_name="paper")


def unify_graphemes(text: str, gmap: GraphemeMap | None = None) -> str:
    if gmap is None:
        gmap = default_profile()
    return text.translate(gmap.table)


def remove_zwnj(text: str) -> str:
    return text.replace(ZWNJ, "")


def _is_letter(ch: str) -> bool:
    return unicodedata.category(ch).startswith("L")


def normalize_initial_r(text: str) -> str:
    """Replace word-initial reh (U+0631) with reh-with-small-v (U+0695).

    A position is word-initial when it starts the string or follows any
    codepoint that is not a Unicode letter.
    """
    if REH not in text:
        return text
    out = []
    prev = ""
    for ch in text:
        if ch == REH and (not prev or not _is_letter(prev)):
            out.append(REH_WITH_V)
        else:
            out.append(ch)
        prev = ch
    return "".join(out)


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def strip_parentheticals(text: str, collapse: bool = True) -> tuple[str, list[str]]:
    """Remove every outermost balanced ``(...)`` span.

    Unbalanced input is returned untouched together with one warning.
    """
    if "(" not in text and ")" not in text:
        return text, []
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                break
    if depth != 0:
        return text, [f"unbalanced parentheses, text left unchanged: {text[:60]!r}"]

    out = []
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    result = "".join(out)
    if collapse:
        result = collapse_whitespace(result)
    return result, []


@dataclass(frozen=True)
class TruecaseModel:
    canonical: Mapping[str, str]
    trained_on: int = 0

    def __post_init__(self):
        for key, value in self.canonical.items():
            if key != value.lower():
                raise ValueError(f"truecase key {key!r} is not the lowercase of {value!r}")

    def lookup(self, token: str) -> str | None:
        return self.canonical.get(token.lower())

    def save(self, path: str | Path) -> None:
        doc = {"trained_on": self.trained_on, "canonical": dict(sorted(self.canonical.items()))}
        Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TruecaseModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(dict(doc["canonical"]), int(doc.get("trained_on", 0)))


def train_truecaser(sentences: Sequence[Sequence[str]]) -> TruecaseModel:
    """Learn the most frequent casing of every token seen outside sentence-initial position.

    Casings are counted over all positions; ties go to the form seen first
    in a non-initial position.
    """
    if not sentences:
        raise ValueError("empty training corpus")
    noninitial: dict[str, dict[str, int]] = {}
    everywhere: Counter = Counter()
    total = 0
    for tokens in sentences:
        total += len(tokens)
        everywhere.update(tokens)
        for tok in tokens[1:]:
            # insertion order records first-seen surface forms for tie-breaking
            noninitial.setdefault(tok.lower(), {}).setdefault(tok, 0)
    initial_only: dict[str, dict[str, int]] = {}
    for tokens in sentences:
        if tokens and tokens[0].lower() in noninitial and tokens[0] not in noninitial[tokens[0].lower()]:
            initial_only.setdefault(tokens[0].lower(), {}).setdefault(tokens[0], 0)
    canonical = {}
    for key, forms in noninitial.items():
        order = list(forms) + list(initial_only.get(key, {}))
        canonical[key] = max(order, key=lambda form: everywhere[form])
    return TruecaseModel(canonical, total)


def apply_truecase(tokens: Sequence[str], model: TruecaseModel) -> list[str]:
    out = list(tokens)
    if out:
        known = model.lookup(out[0])
        out[0] = known if known is not None else out[0].lower()
    return out


@dataclass(frozen=True)
class NormalizationConfig:
    unify: bool = True
    remove_zwnj: bool = True
    initial_r: bool = True
    strip_parens: bool = True
    collapse_whitespace: bool = True
    truecase: bool = False
    grapheme_profile: GraphemeMap | None = None

    def __post_init__(self):
        if self.truecase and self.initial_r:
            raise ValueError("truecase and initial_r belong to different language sides")

    @classmethod
    def for_lang(cls, lang: str, **overrides) -> "NormalizationConfig":
        if lang == "ckb":
            base = dict(unify=True, remove_zwnj=True, initial_r=True, strip_parens=True,
                        collapse_whitespace=True, truecase=False)
        elif lang == "en":
            base = dict(unify=False, remove_zwnj=False, initial_r=False, strip_parens=True,
                        collapse_whitespace=True, truecase=True)
        else:
            raise ValueError(f"unsupported language {lang!r}")
        base.update(overrides)
        return cls(**base)

    @property
    def profile(self) -> GraphemeMap:
        return self.grapheme_profile if self.grapheme_profile is not None else default_profile()

    def as_dict(self) -> dict:
        return {
            "unify": self.unify,
            "remove_zwnj": self.remove_zwnj,
            "initial_r": self.initial_r,
            "strip_parens": self.strip_parens,
            "collapse_whitespace": self.collapse_whitespace,
            "truecase": self.truecase,
            "grapheme_profile": [[s, t] for s, t in self.profile.entries] if self.unify else None,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.as_dict(), ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _truecase_text(text: str, model: TruecaseModel) -> str:
    from ckbprep.tokenizers.wordpunct import WORDPUNCT_RE

    m = WORDPUNCT_RE.search(text)
    if m is None:
        return text
    first = apply_truecase([m.group()], model)[0]
    return text[: m.start()] + first + text[m.end():]


def normalize_pipeline(
    text: str,
    config: NormalizationConfig,
    truecaser: TruecaseModel | None = None,
) -> tuple[str, list[str]]:
    warnings: list[str] = []
    if config.unify:
        text = unify_graphemes(text, config.profile)
    if config.remove_zwnj:
        text = remove_zwnj(text)
    if config.strip_parens:
        text, warn = strip_parentheticals(text, collapse=False)
        warnings.extend(warn)
    if config.initial_r:
        text = normalize_initial_r(text)
    if config.collapse_whitespace:
        text = collapse_whitespace(text)
    if config.truecase and truecaser is not None:
        text = _truecase_text(text, truecaser)
    return text, warnings
