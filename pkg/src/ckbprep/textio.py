"""Line handling for UTF-8 text files.

Only ``\\n`` ends a line.  ``str.splitlines`` also breaks on U+0085, U+2028
and friends, which can legitimately occur inside a segment.
"""
from __future__ import annotations

from pathlib import Path


def split_lines(text: str) -> list[str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def read_lines(path: str | Path) -> list[str]:
    return split_lines(Path(path).read_text(encoding="utf-8"))
