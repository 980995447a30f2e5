"""Command line interface.

``kcn run`` executes the full pipeline from a config file, ``kcn inspect``
looks one keyword up across a finished bundle, and ``kcn export`` writes a
slice graph as GraphML, DOT, or CSV. Errors print a stage-tagged
diagnostic to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import KcnError, NormalizationError
from .graph import build_kcn, to_dot, to_edge_csv, to_graphml
from .normalize import (
    fold_case_hyphens,
    load_lexicon,
    normalize_corpus,
    similarity,
)
from .corpus import concat_corpora, filter_eligible, load_corpus
from .pipeline import STAGES, run_pipeline


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except KcnError as exc:
        print(f"kcn: error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kcn",
        description="Keyword co-occurrence network analysis for "
        "bibliographic corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline from a config file")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument(
        "--out", type=Path, default=None,
        help="output directory (overrides output_dir from the config)",
    )
    run.add_argument(
        "--only", action="append", choices=STAGES, default=None,
        help="emit only this analysis stage (repeatable)",
    )
    run.add_argument(
        "--force", action="store_true",
        help="replace a non-empty output directory",
    )
    run.set_defaults(handler=_cmd_run)

    inspect = sub.add_parser(
        "inspect", help="look a keyword up across a finished bundle"
    )
    inspect.add_argument("keyword")
    inspect.add_argument("--bundle", required=True, type=Path)
    inspect.set_defaults(handler=_cmd_inspect)

    export = sub.add_parser("export", help="export one slice graph")
    export.add_argument("--config", required=True, type=Path)
    export.add_argument("--slice", default="all", dest="slice_label")
    export.add_argument(
        "--format", required=True, choices=("graphml", "dot", "csv")
    )
    export.add_argument("--out", type=Path, default=None)
    export.set_defaults(handler=_cmd_export)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    only = None if args.only is None else set(args.only)
    result = run_pipeline(config, out_dir=args.out, only=only, force=args.force)
    print(f"bundle written to {result['output_dir']}")
    print(f"slices: {', '.join(result['slices'])}")
    if result["emerging"]:
        print(f"emerging keywords: {', '.join(result['emerging'])}")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    corpus = concat_corpora(
        load_corpus(spec.path, spec.format) for spec in config.inputs
    )
    filtered, _ = filter_eligible(corpus, config.max_keywords)
    lexicon = load_lexicon(
        protected_path=config.protected_path,
        abbrev_path=config.abbrev_path,
        merges_path=config.merges_path,
        synonym_threshold=config.synonym_threshold,
        exhaustive_pairing=config.exhaustive_pairing,
    )
    normalized, _ = normalize_corpus(filtered, lexicon)
    from .pipeline import _default_slices, _safe_name

    slices = config.slices or _default_slices(normalized)
    by_label = {s.label: s for s in slices}
    if args.slice_label not in by_label:
        raise KcnError(
            f"unknown slice {args.slice_label!r}; defined: {sorted(by_label)}"
        )
    g = build_kcn(normalized, by_label[args.slice_label])
    ext = {"graphml": "graphml", "dot": "dot", "csv": "csv"}[args.format]
    out = args.out or Path(f"kcn_{_safe_name(args.slice_label)}.{ext}")
    text = {
        "graphml": to_graphml,
        "dot": to_dot,
        "csv": to_edge_csv,
    }[args.format](g)
    out.write_text(text, "utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    bundle: Path = args.bundle
    manifest_path = bundle / "manifest.json"
    if not manifest_path.is_file():
        raise KcnError(f"{bundle} is not a finished bundle (no manifest.json)")
    manifest = json.loads(manifest_path.read_text("utf-8"))
    slices = manifest.get("slices", [])

    chain = _audit_chain(bundle, args.keyword)
    canonical = chain[-1][1] if chain else args.keyword

    vocabulary = _bundle_vocabulary(bundle, slices)
    if vocabulary and canonical not in vocabulary:
        nearest = sorted(
            vocabulary, key=lambda kw: (-similarity(canonical, kw), kw)
        )[:5]
        print(
            f"kcn: error: keyword {args.keyword!r} not found; "
            f"nearest canonical keywords: {', '.join(nearest)}",
            file=sys.stderr,
        )
        return 1

    print(f"keyword: {args.keyword}")
    if chain:
        for raw, out, rule in chain:
            print(f"  {rule}: {raw} -> {out}")
    print(f"canonical: {canonical}")

    count = _frequency_of(bundle, canonical)
    if count is not None:
        print(f"articles: {count}")

    for label in slices:
        parts = []
        membership = _membership_of(bundle, label, canonical)
        if membership is not None:
            cid, cname = membership
            parts.append(f"cluster {cid} ({cname})")
        rank = _betweenness_of(bundle, label, canonical)
        if rank is not None:
            parts.append(f"betweenness rank {rank[0]} ({rank[1]})")
        print(f"  [{label}] " + ("; ".join(parts) if parts else "-"))

    ego = bundle / f"ego_{_safe(canonical)}.graphml"
    if ego.is_file():
        print(f"ego network: {ego.name}")
    return 0


def _safe(text: str) -> str:
    from .pipeline import _safe_name

    return _safe_name(text)


def _audit_chain(bundle: Path, keyword: str) -> list[tuple[str, str, str]]:
    path = bundle / "audit.jsonl"
    if not path.is_file():
        return []
    by_rule: dict[str, dict[str, str]] = {}
    for line in path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        by_rule.setdefault(entry["rule"], {})[entry["raw"]] = entry["canonical"]
    chain = []
    current = keyword
    # fold live so case and hyphen variants resolve even when the exact
    # raw string never occurred in the corpus
    try:
        folded = fold_case_hyphens(current)
    except NormalizationError:
        folded = current
    if folded != current:
        chain.append((current, folded, "fold"))
        current = folded
    for rule in ("paren", "abbrev", "singular", "merge"):
        nxt = by_rule.get(rule, {}).get(current)
        if nxt is not None and nxt != current:
            chain.append((current, nxt, rule))
            current = nxt
    return chain


def _bundle_vocabulary(bundle: Path, slices: list[str]) -> set[str]:
    vocab: set[str] = set()
    freq = bundle / "frequency.csv"
    if freq.is_file():
        vocab.update(row[0] for row in _csv_rows(freq))
    for label in slices:
        from .pipeline import _safe_name

        safe = _safe_name(label)
        member = bundle / "slices" / safe / f"membership_{safe}.csv"
        if member.is_file():
            vocab.update(row[0] for row in _csv_rows(member))
        edges = bundle / "slices" / safe / "edges.csv"
        if edges.is_file():
            for row in _csv_rows(edges):
                vocab.add(row[0])
                vocab.add(row[1])
    return vocab


def _frequency_of(bundle: Path, keyword: str) -> str | None:
    path = bundle / "frequency.csv"
    if not path.is_file():
        return None
    for row in _csv_rows(path):
        if row[0] == keyword:
            return row[1]
    return None


def _membership_of(bundle: Path, label: str, keyword: str):
    from .pipeline import _safe_name

    safe = _safe_name(label)
    path = bundle / "slices" / safe / f"membership_{safe}.csv"
    if not path.is_file():
        return None
    for row in _csv_rows(path):
        if row[0] == keyword:
            return row[1], row[2]
    return None


def _betweenness_of(bundle: Path, label: str, keyword: str):
    from .pipeline import _safe_name

    safe = _safe_name(label)
    path = bundle / "slices" / safe / f"betweenness_{safe}.csv"
    if not path.is_file():
        return None
    for row in _csv_rows(path):
        if row[0] == keyword:
            return row[2], row[1]
    return None


def _csv_rows(path: Path) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)  # header
        return [row for row in reader if row]
