"""Per-site slicing rules and the CSV encoding file that stores them.

Each site gets one row describing how its comment sections are delimited
and, optionally, how individual comments inside a section are laid out.
Cells hold either a literal byte substring, a regex (prefixed ``re:``),
or the word ``False`` meaning the field is absent for that site. All
matching is case-sensitive and byte-oriented.
"""

from __future__ import annotations

import csv
import functools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Literal

from .errors import EncodingFileError

ENCODING_COLUMNS = (
    "site_id",
    "label",
    "has_comments",
    "open_pattern",
    "close_pattern",
    "empty_size",
    "comment_pattern",
    "date_pattern",
    "author_pattern",
    "depth_pattern",
    "author_url_pattern",
    "text_pattern",
)

ABSENT = "False"
REGEX_PREFIX = "re:"


@functools.lru_cache(maxsize=512)
def _compile(source: str) -> re.Pattern[bytes]:
    return re.compile(source.encode("utf-8"))


@dataclass(frozen=True)
class Pattern:
    """A literal byte substring or a byte-level regex, matched case-sensitively."""

    kind: Literal["literal", "regex"]
    source: str

    def _needle(self) -> bytes:
        return self.source.encode("utf-8")

    def search(self, data: bytes, pos: int = 0) -> tuple[int, int] | None:
        """First match at or after pos, as (start, end), or None."""
        if self.kind == "literal":
            start = data.find(self._needle(), pos)
            if start == -1:
                return None
            return start, start + len(self._needle())
        m = _compile(self.source).search(data, pos)
        if m is None:
            return None
        return m.start(), m.end()

    def finditer(self, data: bytes) -> Iterator[tuple[int, int]]:
        """All non-overlapping matches, left to right, always advancing."""
        if self.kind == "literal":
            needle = self._needle()
            pos = 0
            while True:
                start = data.find(needle, pos)
                if start == -1:
                    return
                yield start, start + len(needle)
                pos = start + max(len(needle), 1)
        else:
            for m in _compile(self.source).finditer(data):
                yield m.start(), m.end()

    def extract(self, data: bytes) -> bytes | None:
        """Pull one field value out of a comment fragment.

        Regexes return their first group when they have one, otherwise the
        whole match. Literals act as markers: the value is whatever follows
        the marker up to the next ``<``. Values are stripped of ASCII
        whitespace; an empty result counts as absent.
        """
        if self.kind == "regex":
            m = _compile(self.source).search(data)
            if m is None:
                return None
            value = m.group(1) if m.re.groups else m.group(0)
            if value is None:
                return None
        else:
            hit = self.search(data)
            if hit is None:
                return None
            end = data.find(b"<", hit[1])
            value = data[hit[1]:] if end == -1 else data[hit[1]:end]
        value = value.strip()
        return value or None


@dataclass(frozen=True)
class Rule:
    """Slicing rule for one site.

    ``has_comments`` False means the site never shows comments and every
    other field must be absent. ``open_pattern``/``close_pattern`` delimit
    comment sections (matches included in the section). ``empty_size`` is
    the exact byte length of a section holding zero comments. The six
    fragment patterns drive per-comment extraction.
    """

    site_id: str
    label: str
    has_comments: bool
    open_pattern: Pattern | None
    close_pattern: Pattern | None
    empty_size: int | None
    comment_pattern: Pattern | None
    date_pattern: Pattern | None
    author_pattern: Pattern | None
    depth_pattern: Pattern | None
    author_url_pattern: Pattern | None
    text_pattern: Pattern | None

    @property
    def is_precise(self) -> bool:
        """True when the rule can split sections into individual comments."""
        return self.comment_pattern is not None


def _parse_pattern(cell: str, where: str) -> Pattern | None:
    cell = cell.strip()
    if cell == ABSENT or cell == "":
        return None
    if cell.startswith(REGEX_PREFIX):
        source = cell[len(REGEX_PREFIX):]
        try:
            _compile(source)
        except re.error as exc:
            raise EncodingFileError(f"{where}: bad regex {source!r}: {exc}") from None
        return Pattern(kind="regex", source=source)
    return Pattern(kind="literal", source=cell)


def _parse_row(row: list[str], where: str) -> Rule:
    if len(row) != len(ENCODING_COLUMNS):
        raise EncodingFileError(
            f"{where}: expected {len(ENCODING_COLUMNS)} cells, got {len(row)}"
        )
    site_id = row[0].strip()
    if not site_id:
        raise EncodingFileError(f"{where}: empty site_id")

    flag = row[2].strip()
    if flag not in ("True", "False"):
        raise EncodingFileError(f"{where}: has_comments must be True or False, got {flag!r}")
    has_comments = flag == "True"

    size_cell = row[5].strip()
    if size_cell == ABSENT or size_cell == "":
        empty_size = None
    else:
        try:
            empty_size = int(size_cell)
        except ValueError:
            raise EncodingFileError(
                f"{where}: empty_size must be an integer or False, got {size_cell!r}"
            ) from None
        if empty_size < 0:
            raise EncodingFileError(f"{where}: empty_size must be >= 0, got {empty_size}")

    names = ENCODING_COLUMNS[3:5] + ENCODING_COLUMNS[6:]
    cells = row[3:5] + row[6:]
    patterns = {
        name: _parse_pattern(cell, f"{where} column {name}")
        for name, cell in zip(names, cells)
    }

    rule = Rule(
        site_id=site_id,
        label=row[1].strip(),
        has_comments=has_comments,
        open_pattern=patterns["open_pattern"],
        close_pattern=patterns["close_pattern"],
        empty_size=empty_size,
        comment_pattern=patterns["comment_pattern"],
        date_pattern=patterns["date_pattern"],
        author_pattern=patterns["author_pattern"],
        depth_pattern=patterns["depth_pattern"],
        author_url_pattern=patterns["author_url_pattern"],
        text_pattern=patterns["text_pattern"],
    )

    if has_comments:
        if rule.open_pattern is None:
            raise EncodingFileError(
                f"{where}: has_comments is True but open_pattern is absent"
            )
        extractors = (
            rule.date_pattern,
            rule.author_pattern,
            rule.depth_pattern,
            rule.author_url_pattern,
            rule.text_pattern,
        )
        if rule.comment_pattern is None and any(p is not None for p in extractors):
            raise EncodingFileError(
                f"{where}: extraction patterns set but comment_pattern is absent"
            )
    else:
        other = (
            rule.open_pattern,
            rule.close_pattern,
            rule.comment_pattern,
            rule.date_pattern,
            rule.author_pattern,
            rule.depth_pattern,
            rule.author_url_pattern,
            rule.text_pattern,
        )
        if empty_size is not None or any(p is not None for p in other):
            raise EncodingFileError(
                f"{where}: has_comments is False, all other fields must be False"
            )
    return rule


def parse_encoding_file(path: str | Path) -> dict[str, Rule]:
    """Parse and fully validate an encoding file; returns rules keyed by site_id.

    Every problem is fatal and reported with the file path and row number,
    so a bad rule can never silently pass through to slicing.
    """
    path = Path(path)
    if not path.is_file():
        raise EncodingFileError(f"encoding file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EncodingFileError(f"encoding file is empty: {path}") from None
        if tuple(h.strip() for h in header) != ENCODING_COLUMNS:
            raise EncodingFileError(
                f"encoding file {path} has header {header}, "
                f"expected {list(ENCODING_COLUMNS)}"
            )
        rules: dict[str, Rule] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            rule = _parse_row(row, f"encoding file {path} row {lineno}")
            if rule.site_id in rules:
                raise EncodingFileError(
                    f"encoding file {path} row {lineno}: duplicate site_id {rule.site_id}"
                )
            rules[rule.site_id] = rule
    return rules


def _format_pattern(pattern: Pattern | None) -> str:
    if pattern is None:
        return ABSENT
    if pattern.kind == "regex":
        return REGEX_PREFIX + pattern.source
    if pattern.source in ("", ABSENT) or pattern.source.startswith(REGEX_PREFIX):
        raise ValueError(f"literal pattern {pattern.source!r} cannot be written losslessly")
    return pattern.source


def write_encoding_file(rules: dict[str, Rule], path: str | Path) -> None:
    """Write rules back out in the same CSV layout parse_encoding_file reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENCODING_COLUMNS)
        for rule in rules.values():
            writer.writerow(
                [
                    rule.site_id,
                    rule.label,
                    "True" if rule.has_comments else "False",
                    _format_pattern(rule.open_pattern),
                    _format_pattern(rule.close_pattern),
                    ABSENT if rule.empty_size is None else str(rule.empty_size),
                    _format_pattern(rule.comment_pattern),
                    _format_pattern(rule.date_pattern),
                    _format_pattern(rule.author_pattern),
                    _format_pattern(rule.depth_pattern),
                    _format_pattern(rule.author_url_pattern),
                    _format_pattern(rule.text_pattern),
                ]
            )
