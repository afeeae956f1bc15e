"""Shared fixture builders: tiny corpora on disk and slicing rules in memory."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest

from comslice.corpus import Corpus, Page, load_corpus
from comslice.encoding import Pattern, Rule

# Standard delimiters used by most fixtures. Sections span from the start
# of OPEN to the end of CLOSE, so an empty section is exactly OPEN + CLOSE.
OPEN = b'<div id="comments">'
CLOSE = b'<!-- COMMENTS END -->'
COMMENT_SEP = b'<div class="comment">'
EMPTY_SIZE = len(OPEN) + len(CLOSE)


def make_rule(**overrides) -> Rule:
    """A rough-slicing rule with the standard delimiters; override freely."""
    fields = dict(
        site_id="s1",
        label="blog",
        has_comments=True,
        open_pattern=Pattern("literal", OPEN.decode()),
        close_pattern=Pattern("literal", CLOSE.decode()),
        empty_size=None,
        comment_pattern=None,
        date_pattern=None,
        author_pattern=None,
        depth_pattern=None,
        author_url_pattern=None,
        text_pattern=None,
    )
    fields.update(overrides)
    return Rule(**fields)


def make_precise_rule(**overrides) -> Rule:
    """The standard rule plus field extraction patterns for fixture comments."""
    fields = dict(
        empty_size=EMPTY_SIZE,
        comment_pattern=Pattern("literal", COMMENT_SEP.decode()),
        author_pattern=Pattern("literal", '<span class="author">'),
        date_pattern=Pattern("regex", r'<span class="date">([^<]*)</span>'),
        depth_pattern=Pattern("regex", r'class="depth-(\d+)"'),
        author_url_pattern=Pattern("regex", r'<a class="url" href="([^"]*)"'),
        text_pattern=Pattern("regex", r"<p>([^<]*)</p>"),
    )
    fields.update(overrides)
    return make_rule(**fields)


def fragment(
    author: str | None = None,
    date: str | None = None,
    depth: int | None = None,
    url: str | None = None,
    text: str | None = None,
) -> bytes:
    """One comment fragment in the layout make_precise_rule expects."""
    parts = [COMMENT_SEP]
    if author is not None:
        parts.append(f'<span class="author">{author}</span>'.encode())
    if date is not None:
        parts.append(f'<span class="date">{date}</span>'.encode())
    if depth is not None:
        parts.append(f'<i class="depth-{depth}"></i>'.encode())
    if url is not None:
        parts.append(f'<a class="url" href="{url}">profile</a>'.encode())
    if text is not None:
        parts.append(f"<p>{text}</p>".encode())
    return b"".join(parts)


def page_bytes(
    main_before: bytes = b"<html><body><p>article</p>",
    fragments: list[bytes] | None = None,
    main_after: bytes = b"<footer>fin</footer></body></html>",
) -> bytes:
    """A page holding one comment section (or none when fragments is None)."""
    if fragments is None:
        return main_before + main_after
    return main_before + OPEN + b"".join(fragments) + CLOSE + main_after


def write_corpus(
    base: Path,
    sites: dict[str, tuple[str, list[str]]],
    pages: dict[tuple[str, str], bytes],
) -> tuple[Path, Path]:
    """Write a corpus directory and manifest; returns (root, manifest path).

    sites maps site_id -> (label, url_prefixes); pages maps
    (site_id, page_path) -> raw bytes.
    """
    root = base / "corpus"
    root.mkdir(parents=True, exist_ok=True)
    manifest = base / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site_id", "label", "page_path", "url_prefixes"])
        for site_id, (label, prefixes) in sites.items():
            writer.writerow([site_id, label, "", "|".join(prefixes)])
        for (site_id, page_path), _ in pages.items():
            writer.writerow([site_id, "", page_path, ""])
    for (site_id, page_path), raw in pages.items():
        target = root / page_path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(raw)
    return root, manifest


def corpus_in_memory(
    sites: dict[str, tuple[str, list[str]]],
    pages: dict[tuple[str, str], bytes],
) -> Corpus:
    """Build a Corpus without touching disk."""
    from comslice.corpus import Site

    registry = [
        Site(site_id=sid, label=label, url_prefixes=tuple(prefixes))
        for sid, (label, prefixes) in sites.items()
    ]
    page_list = [
        Page(site_id=sid, page_path=path, raw_bytes=raw)
        for (sid, path), raw in pages.items()
    ]
    return Corpus(registry=registry, pages=page_list)


def assert_partition(sliced) -> None:
    """Spans must partition [0, len) exactly and reassemble the raw bytes."""
    spans = sorted(sliced.main_spans + sliced.section_spans)
    assert all(start < end for start, end in spans), "empty span"
    for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
        assert prev_end == next_start, "gap or overlap between spans"
    if spans:
        assert spans[0][0] == 0
        assert spans[-1][1] == len(sliced.raw_bytes)
    else:
        assert sliced.raw_bytes == b""
    assert not set(sliced.main_spans) & set(sliced.section_spans)
    assert sliced.reassembled() == sliced.raw_bytes


@pytest.fixture
def two_site_corpus(tmp_path):
    """Two sites linking to each other from main content and comments."""
    sites = {
        "alpha": ("blog", ["alpha.example.org"]),
        "beta": ("press", ["beta.example.org"]),
    }
    pages = {
        ("alpha", "alpha/a1.html"): page_bytes(
            main_before=b'<body><a href="http://beta.example.org/news">beta</a>',
            fragments=[
                fragment(author="zoe", text="lisez ceci")
                + b'<a href="https://beta.example.org/spam">spam</a>',
            ],
        ),
        ("beta", "beta/b1.html"): page_bytes(
            main_before=b'<body><a href="http://alpha.example.org/">alpha</a>'
            b'<a href="http://elsewhere.net/x">ext</a>',
            fragments=[fragment(author="ana", text="bonjour")],
        ),
    }
    root, manifest = write_corpus(tmp_path, sites, pages)
    return load_corpus(root, manifest)
