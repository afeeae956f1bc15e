"""Command line front end.

Every subcommand loads the corpus (directory + manifest) and the encoding
file, runs one processing step, and writes its results under --out.
Slicing problems on individual pages are reported, not fatal; broken
configuration (missing files, bad manifest, bad encoding file) exits
with status 1, usage mistakes with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import audit as audit_mod
from .corpus import Corpus, load_corpus
from .encoding import Rule, parse_encoding_file
from .errors import ComsliceError
from .linkgraph import (
    Link,
    components,
    crosstab,
    extract_all_links,
    iter_hrefs,
    mutual_link_graph,
    write_gexf,
)
from .slicer import (
    ErrorReport,
    SlicedPage,
    build_error_report,
    precise_slice,
    slice_corpus_parallel,
)
from .textstats import corpus_token_counts, load_stopwords, top_k


def _default_workers() -> int:
    value = os.environ.get("COMSLICE_WORKERS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="corpus root directory")
    parser.add_argument("--manifest", required=True, help="manifest CSV path")
    parser.add_argument("--encoding", required=True, help="encoding file CSV path")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument(
        "--workers",
        type=int,
        default=_default_workers(),
        help="worker processes for slicing (default: $COMSLICE_WORKERS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comslice",
        description="slice comment sections out of a crawled corpus and "
        "audit the bias they add to link and text analyses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("slice-rough", help="split pages into stripped content and comment sections")
    _add_common(p)

    p = sub.add_parser("slice-precise", help="slice-rough plus per-comment field extraction")
    _add_common(p)

    p = sub.add_parser("links", help="extract every hyperlink with its location")
    _add_common(p)

    p = sub.add_parser("crosstab", help="count links between site labels, inside vs outside comments")
    _add_common(p)

    p = sub.add_parser("graph", help="build the mutual-link site graph as GEXF")
    _add_common(p)
    p.add_argument(
        "--include-comments",
        action="store_true",
        help="keep links located in comment sections (dropped by default)",
    )

    p = sub.add_parser("tokens", help="top token counts with and without comment sections")
    _add_common(p)
    p.add_argument("--top-k", type=int, default=100, help="rows per table (default: 100)")
    p.add_argument("--stopwords", help="stopword list path (default: bundled French list)")

    p = sub.add_parser("audit", help="sample the corpus and decide whether slicing is needed")
    _add_common(p)
    p.add_argument("--sample-n", type=int, default=100, help="pages to sample (default: 100)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default: 0)")
    p.add_argument("--threshold-link", type=float, default=0.05)
    p.add_argument("--threshold-token", type=float, default=0.05)
    p.add_argument("--threshold-divergence", type=float, default=0.05)
    p.add_argument("--stopwords", help="stopword list path (default: bundled French list)")

    return parser


def _load(args: argparse.Namespace) -> tuple[Corpus, dict[str, Rule]]:
    corpus = load_corpus(args.corpus, args.manifest)
    rules = parse_encoding_file(args.encoding)
    return corpus, rules


def _slice(args: argparse.Namespace) -> tuple[Corpus, dict[str, Rule], list[SlicedPage], list]:
    corpus, rules = _load(args)
    sliced, errors = slice_corpus_parallel(corpus, rules, workers=args.workers)
    return corpus, rules, sliced, errors


def _write_page_outputs(sliced: list[SlicedPage], out: Path) -> None:
    for page in sliced:
        stripped_path = out / "stripped" / page.page_path
        stripped_path.parent.mkdir(parents=True, exist_ok=True)
        stripped_path.write_bytes(page.stripped_bytes)
        for i, section in enumerate(page.sections_bytes):
            section_path = out / "sections" / f"{page.page_path}.section-{i}.html"
            section_path.parent.mkdir(parents=True, exist_ok=True)
            section_path.write_bytes(section)


def _write_error_report(report: ErrorReport, out: Path) -> None:
    with open(out / "error_report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site_id", "page_path", "kind", "detail"])
        writer.writerows(report.detail_rows())
    with open(out / "error_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site_id", "kind", "count"])
        writer.writerows(report.summary_rows())
        for warning in report.warnings:
            writer.writerow([warning.site_id, "uniform_size_warning", warning.sections])


def _print_slice_summary(report: ErrorReport, sliced: list[SlicedPage]) -> None:
    sections = sum(len(p.section_spans) for p in sliced)
    print(f"sliced {len(sliced)} pages into {sections} comment sections")
    for site_id, kind, count in report.summary_rows():
        print(f"  {site_id}: {count} x {kind}")
    for warning in report.warnings:
        print(
            f"  warning: all {warning.sections} sections of {warning.site_id} "
            f"have the same size ({warning.size} bytes); check its delimiters"
        )


def _cmd_slice_rough(args: argparse.Namespace) -> int:
    _, rules, sliced, errors = _slice(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_page_outputs(sliced, out)
    report = build_error_report(sliced, errors, rules)
    _write_error_report(report, out)
    _print_slice_summary(report, sliced)
    return 0


def _cmd_slice_precise(args: argparse.Namespace) -> int:
    _, rules, sliced, errors = _slice(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_page_outputs(sliced, out)
    total = 0
    with open(out / "comments.jsonl", "w", encoding="utf-8") as fh:
        for page in sliced:
            rule = rules[page.site_id]
            if not rule.is_precise:
                continue
            comments, errs = precise_slice(page, rule)
            errors.extend(errs)
            for c in comments:
                record = {
                    "site_id": c.site_id,
                    "page_path": c.page_path,
                    "index": c.index,
                    "span_start": c.span_start,
                    "span_end": c.span_end,
                    "author": c.author,
                    "date": c.date,
                    "depth": c.depth,
                    "author_url": c.author_url,
                    "text": c.text,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                total += 1
    report = build_error_report(sliced, errors, rules)
    _write_error_report(report, out)
    _print_slice_summary(report, sliced)
    print(f"extracted {total} comments")
    return 0


def _links_of(args: argparse.Namespace) -> tuple[Corpus, dict[str, Rule], list[SlicedPage], list[Link]]:
    corpus, rules, sliced, _ = _slice(args)
    return corpus, rules, sliced, extract_all_links(sliced, corpus.registry)


def _cmd_links(args: argparse.Namespace) -> int:
    _, _, sliced, links = _links_of(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src_site", "dst_site", "location", "src_page", "url"])
        for link in links:
            writer.writerow(
                [
                    link.src_site_id,
                    link.dst_site_id,
                    "comment" if link.in_comment else "main",
                    link.page_path,
                    link.href,
                ]
            )
    anchors = sum(1 for page in sliced for _ in iter_hrefs(page.raw_bytes))
    print(
        f"found {anchors} anchors; {len(links)} resolved to registered sites, "
        f"{anchors - len(links)} external"
    )
    return 0


def _cmd_crosstab(args: argparse.Namespace) -> int:
    corpus, _, _, links = _links_of(args)
    labels = {site.site_id: site.label for site in corpus.registry}
    rows = crosstab(links, labels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "crosstab.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src_label", "dst_label", "outside", "inside", "proportion"])
        for row in rows:
            writer.writerow(
                [row.src_label, row.dst_label, row.outside, row.inside, f"{row.proportion:.2f}"]
            )
    print(f"crosstab: {len(rows)} label pairs")
    return 0


def _cmd_graph(args: argparse.Namespace) -> int:
    corpus, _, _, links = _links_of(args)
    graph = mutual_link_graph(
        links, corpus.registry, include_comments=args.include_comments
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels = {site.site_id: site.label for site in corpus.registry}
    write_gexf(graph, labels, out / "graph.gexf")
    parts = components(graph)
    print(
        f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} mutual edges, "
        f"{len(parts)} components (largest: {len(parts[0]) if parts else 0})"
    )
    return 0


def _write_token_table(path: Path, rows: list[tuple[str, int]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["token", "count"])
        writer.writerows(rows)


def _cmd_tokens(args: argparse.Namespace) -> int:
    _, _, sliced, _ = _slice(args)
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    with_comments = corpus_token_counts(sliced, include_comments=True, stopwords=stopwords)
    without = corpus_token_counts(sliced, include_comments=False, stopwords=stopwords)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_token_table(out / "tokens_with_comments.csv", top_k(with_comments, args.top_k))
    _write_token_table(out / "tokens_without_comments.csv", top_k(without, args.top_k))
    print(
        f"tokens: {sum(with_comments.values())} with comments, "
        f"{sum(without.values())} without"
    )
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    corpus, rules = _load(args)
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    thresholds = audit_mod.Thresholds(
        link=args.threshold_link,
        token=args.threshold_token,
        divergence=args.threshold_divergence,
    )
    result = audit_mod.run_audit(
        corpus,
        rules,
        sample_n=args.sample_n,
        seed=args.seed,
        thresholds=thresholds,
        stopwords=stopwords,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = audit_mod.format_report(result)
    (out / "audit.txt").write_text(report, encoding="utf-8")
    m, t = result.measurement, result.thresholds
    with open(out / "audit.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value", "threshold", "exceeded"])
        for name, value, cutoff in (
            ("link_noise", m.link_noise, t.link),
            ("token_noise", m.token_noise, t.token),
            ("text_divergence", m.text_divergence, t.divergence),
        ):
            exceeded = "true" if name in result.decision.exceeded else "false"
            writer.writerow([name, repr(value), repr(cutoff), exceeded])
    with open(out / "audit_sites.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "site_id",
                "label",
                "pages",
                "sections",
                "comment_bytes",
                "total_bytes",
                "comments",
                "commenter_urls",
            ]
        )
        for site in result.sites:
            writer.writerow(
                [
                    site.site_id,
                    site.label,
                    site.pages,
                    site.sections,
                    site.comment_bytes,
                    site.total_bytes,
                    "" if site.comments is None else site.comments,
                    "" if site.commenter_urls is None else site.commenter_urls,
                ]
            )
    print(report, end="")
    return 0


_HANDLERS = {
    "slice-rough": _cmd_slice_rough,
    "slice-precise": _cmd_slice_precise,
    "links": _cmd_links,
    "crosstab": _cmd_crosstab,
    "graph": _cmd_graph,
    "tokens": _cmd_tokens,
    "audit": _cmd_audit,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments and run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ComsliceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
