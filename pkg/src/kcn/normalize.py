"""Keyword normalization pipeline.

Raw bibliographic keywords are rewritten into canonical forms through five
ordered stages: case/hyphen folding, parenthetical abbreviation extraction,
whole-keyword abbreviation expansion, final-token singularization, and
similarity-based synonym merging. Every rewrite is recorded as a
``(raw, canonical, rule)`` triple in an audit trail, so a run can be
replayed and checked after the fact.

The merge stage scores keyword pairs with a normalized indel similarity
(100 at identity, 0 at total dissimilarity) and unions pairs at or above
the lexicon threshold into groups; each group collapses onto its most
frequent member.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import ArticleRecord, Corpus
from .errors import LexiconError, NormalizationError

RULE_FOLD = "fold"
RULE_PAREN = "paren"
RULE_ABBREV = "abbrev"
RULE_SINGULAR = "singular"
RULE_MERGE = "merge"

DEFAULT_SYNONYM_THRESHOLD = 90.0

# ASCII hyphen-minus plus the Unicode hyphen/dash family
_HYPHENS = "-‐‑‒–—―"
_WS_RE = re.compile(r"\s+")
# trailing parenthetical over a paren-free full form, e.g. "explainable ai (xai)"
_PAREN_RE = re.compile(r"^(?P<full>[^()]*\S)\s*\((?P<short>[^()]*)\)$")

_IRREGULAR_SINGULARS = {
    "children": "child",
    "data": "data",
    "analyses": "analysis",
    "criteria": "criterion",
    "media": "media",
}


@dataclass
class NormalizationLexicon:
    """Mutable state threaded through a normalization run.

    ``protected_tokens`` are exempt from singularization, ``abbrev_map``
    rewrites whole keywords (short form to expansion), and ``merge_map``
    holds the variant-to-canonical rewrites produced by synonym merging.
    ``allow_pairs`` force a merge regardless of score; ``deny_pairs``
    suppress the direct pairing (groups may still join through a third
    form, since merging is transitively closed).
    """

    protected_tokens: set[str] = field(default_factory=set)
    abbrev_map: dict[str, str] = field(default_factory=dict)
    synonym_threshold: float = DEFAULT_SYNONYM_THRESHOLD
    merge_map: dict[str, str] = field(default_factory=dict)
    audit: list[tuple[str, str, str]] = field(default_factory=list)
    allow_pairs: set[frozenset[str]] = field(default_factory=set)
    deny_pairs: set[frozenset[str]] = field(default_factory=set)
    exhaustive_pairing: bool = False
    _seen: set[tuple[str, str, str]] = field(
        default_factory=set, repr=False, compare=False
    )

    def record(self, raw: str, canonical: str, rule: str) -> None:
        """Append an audit entry, once per distinct rewrite."""
        entry = (raw, canonical, rule)
        if entry not in self._seen:
            self._seen.add(entry)
            self.audit.append(entry)

    def register_abbrev(self, short: str, full: str) -> None:
        """Add ``short -> full``, flattening so values never become keys."""
        if short == full:
            return
        full = self.abbrev_map.get(full, full)
        if short == full:
            return
        if short in self.abbrev_map:
            return  # first registration wins
        self.abbrev_map[short] = full
        # re-point entries whose value is the new key
        for key, value in self.abbrev_map.items():
            if value == short:
                self.abbrev_map[key] = full

    def canonical(self, keyword: str) -> str:
        return self.merge_map.get(keyword, keyword)

    def write_audit_jsonl(self, path: str | Path) -> None:
        lines = [
            json.dumps({"raw": raw, "canonical": canonical, "rule": rule})
            for raw, canonical, rule in self.audit
        ]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")


def fold_case_hyphens(raw: str) -> str:
    """Lowercase, replace hyphens with spaces, and collapse whitespace."""
    folded = raw.lower()
    for ch in _HYPHENS:
        if ch in folded:
            folded = folded.replace(ch, " ")
    folded = _WS_RE.sub(" ", folded).strip()
    if not folded:
        raise NormalizationError(f"keyword is empty after folding: {raw!r}")
    return folded


def singularize(keyword: str, protected: set[str] | frozenset[str]) -> str:
    """Singularize the final whitespace token of ``keyword``.

    Ordered rules, first match wins: protected tokens stay unchanged; a
    small irregular table; ``-ies`` -> ``-y`` (token longer than 4);
    ``-ses`` -> ``-sis`` (token longer than 4); a trailing ``-s`` is
    stripped unless the token ends in ``ss``, ``us``, or ``is``. Earlier
    tokens are never touched.
    """
    head, sep, last = keyword.rpartition(" ")
    if last in protected:
        return keyword
    if last in _IRREGULAR_SINGULARS:
        new = _IRREGULAR_SINGULARS[last]
    elif last.endswith("ies") and len(last) > 4:
        new = last[:-3] + "y"
    elif last.endswith("ses") and len(last) > 4:
        new = last[:-3] + "sis"
    elif last.endswith("s") and not last.endswith(("ss", "us", "is")):
        new = last[:-1]
    else:
        return keyword
    if not new:
        return keyword  # never erase a bare "s" token
    return head + sep + new


def expand_parenthetical(keyword: str, lexicon: NormalizationLexicon) -> str:
    """Strip a trailing ``(short)`` group and register ``short -> full``.

    Only matches a paren-free full form followed by one trailing
    parenthetical, so the output is stable under re-application.
    Unbalanced parentheses leave the keyword unchanged and drop a
    warning breadcrumb into the audit trail.
    """
    if "(" not in keyword and ")" not in keyword:
        return keyword
    if not _balanced(keyword):
        lexicon.record(keyword, keyword, RULE_PAREN)
        return keyword
    match = _PAREN_RE.match(keyword)
    if match is None:
        return keyword
    full = match.group("full").strip()
    short = match.group("short").strip()
    if not short:
        return keyword
    lexicon.register_abbrev(short, full)
    return full


def apply_abbrev_map(keyword: str, lexicon: NormalizationLexicon) -> str:
    """Expand ``keyword`` when it is, in its entirety, a known short form."""
    return lexicon.abbrev_map.get(keyword, keyword)


def similarity(a: str, b: str) -> float:
    """Normalized indel similarity on a 0..100 scale.

    Defined as ``100 * (1 - D / (len(a) + len(b)))`` where ``D`` is the
    insert/delete edit distance, computed from the longest common
    subsequence. Symmetric; 100 on identical strings (including two empty
    strings); 0 when the strings share no characters.
    """
    if a == b:
        return 100.0
    total = len(a) + len(b)
    dist = total - 2 * _lcs_len(a, b)
    return 100.0 * (1.0 - dist / total)


def merge_synonyms(
    keywords: Mapping[str, int] | Iterable[str], lexicon: NormalizationLexicon
) -> NormalizationLexicon:
    """Group near-identical keywords and fill ``lexicon.merge_map``.

    Pairs scoring at or above the lexicon threshold are unioned
    (transitively closed); allow-listed pairs are unioned regardless of
    score and deny-listed pairs are never paired directly. Each group's
    canonical form is its most frequent member, ties broken by shorter
    string, then lexicographic order. Grouping depends only on the keyword
    multiset, not on input order.

    Candidate pairs share a first character or differ in length by at most
    3, unless ``lexicon.exhaustive_pairing`` forces all pairs.
    """
    counts = Counter(dict(keywords)) if isinstance(keywords, Mapping) else Counter(keywords)
    keys = sorted(counts)
    index = {k: i for i, k in enumerate(keys)}
    parent = list(range(len(keys)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for pair in sorted(lexicon.allow_pairs, key=sorted):
        members = sorted(pair)
        if len(members) == 2 and all(m in index for m in members):
            union(index[members[0]], index[members[1]])

    threshold = lexicon.synonym_threshold
    lengths = [len(k) for k in keys]
    signatures = [Counter(k) for k in keys]
    for i in range(len(keys)):
        ki, li, si = keys[i], lengths[i], signatures[i]
        for j in range(i + 1, len(keys)):
            kj, lj = keys[j], lengths[j]
            if not lexicon.exhaustive_pairing:
                if ki[0] != kj[0] and abs(li - lj) > 3:
                    continue
            if frozenset((ki, kj)) in lexicon.deny_pairs:
                continue
            total = li + lj
            # cheap upper bounds on the score before running the full DP
            if 200.0 * min(li, lj) / total < threshold:
                continue
            common = sum((si & signatures[j]).values())
            if 200.0 * common / total < threshold:
                continue
            if similarity(ki, kj) >= threshold:
                union(i, j)

    groups: dict[int, list[str]] = {}
    for i, key in enumerate(keys):
        groups.setdefault(find(i), []).append(key)
    for members in groups.values():
        if len(members) < 2:
            continue
        canonical = min(members, key=lambda k: (-counts[k], len(k), k))
        for member in members:
            if member != canonical:
                lexicon.merge_map[member] = canonical
                lexicon.record(member, canonical, RULE_MERGE)
    return lexicon


def normalize_corpus(
    corpus: Corpus, lexicon: NormalizationLexicon
) -> tuple[Corpus, NormalizationLexicon]:
    """Run the full pipeline over every keyword of every record.

    Stages apply per keyword in order fold, parenthetical, abbreviation,
    singularization; synonym merging then runs once over the resulting
    keyword multiset (one count per record containing the form). All
    parenthetical registrations complete before any abbreviation lookup,
    so the result does not depend on record order. Within-record
    duplicates produced by any stage are collapsed, keeping first
    occurrence order. The pipeline is idempotent: normalizing an already
    normalized corpus changes nothing.
    """
    first_seen: dict[str, str] = {}
    for record in corpus.records:
        for raw in record.keywords:
            first_seen.setdefault(raw, record.id)

    folded: dict[str, str] = {}
    for raw, rec_id in first_seen.items():
        try:
            folded[raw] = fold_case_hyphens(raw)
        except NormalizationError as exc:
            raise NormalizationError(f"record {rec_id!r}: {exc}") from exc
        if folded[raw] != raw:
            lexicon.record(raw, folded[raw], RULE_FOLD)

    # complete all abbreviation registrations before any lookup
    expanded: dict[str, str] = {}
    for form in dict.fromkeys(folded.values()):
        expanded[form] = expand_parenthetical(form, lexicon)
        if expanded[form] != form:
            lexicon.record(form, expanded[form], RULE_PAREN)

    unabbreviated: dict[str, str] = {}
    for form in dict.fromkeys(expanded.values()):
        unabbreviated[form] = apply_abbrev_map(form, lexicon)
        if unabbreviated[form] != form:
            lexicon.record(form, unabbreviated[form], RULE_ABBREV)

    singular: dict[str, str] = {}
    for form in dict.fromkeys(unabbreviated.values()):
        singular[form] = singularize(form, lexicon.protected_tokens)
        if singular[form] != form:
            lexicon.record(form, singular[form], RULE_SINGULAR)

    def premerge(raw: str) -> str:
        return singular[unabbreviated[expanded[folded[raw]]]]

    counts: Counter[str] = Counter()
    for record in corpus.records:
        counts.update({premerge(raw) for raw in record.keywords})
    merge_synonyms(counts, lexicon)

    new_records = []
    for record in corpus.records:
        out: list[str] = []
        seen: set[str] = set()
        for raw in record.keywords:
            canonical = lexicon.canonical(premerge(raw))
            if canonical not in seen:
                seen.add(canonical)
                out.append(canonical)
        new_records.append(
            ArticleRecord(record.id, record.venue, record.year, tuple(out))
        )
    normalized = Corpus(
        records=tuple(new_records), sources=corpus.sources, loaded_at=corpus.loaded_at
    )
    return normalized, lexicon


def load_lexicon(
    protected_path: str | Path | None = None,
    abbrev_path: str | Path | None = None,
    merges_path: str | Path | None = None,
    synonym_threshold: float = DEFAULT_SYNONYM_THRESHOLD,
    exhaustive_pairing: bool = False,
) -> NormalizationLexicon:
    """Build a lexicon from up to three TSV files.

    ``protected_path`` holds one token per line; ``abbrev_path`` holds
    ``short<TAB>full`` rows; ``merges_path`` holds
    ``variant<TAB>canonical<TAB>allow|deny`` rows. Blank lines and ``#``
    comments are skipped everywhere. Entries are folded (and, for merge
    rows, singularized) on load so they compare against pipeline forms.
    """
    if not 0.0 <= float(synonym_threshold) <= 100.0:
        raise LexiconError(
            f"synonym threshold must be within 0..100, got {synonym_threshold}"
        )
    lexicon = NormalizationLexicon(
        synonym_threshold=float(synonym_threshold),
        exhaustive_pairing=exhaustive_pairing,
    )
    if protected_path is not None:
        for lineno, fields in _tsv_rows(protected_path):
            if len(fields) != 1:
                raise LexiconError(
                    f"{protected_path}:{lineno}: expected one token per line"
                )
            lexicon.protected_tokens.add(fold_case_hyphens(fields[0]))
    if abbrev_path is not None:
        for lineno, fields in _tsv_rows(abbrev_path):
            if len(fields) != 2:
                raise LexiconError(
                    f"{abbrev_path}:{lineno}: expected short<TAB>full"
                )
            lexicon.register_abbrev(
                fold_case_hyphens(fields[0]), fold_case_hyphens(fields[1])
            )
    if merges_path is not None:
        for lineno, fields in _tsv_rows(merges_path):
            if len(fields) != 3 or fields[2] not in ("allow", "deny"):
                raise LexiconError(
                    f"{merges_path}:{lineno}: expected variant<TAB>canonical"
                    f"<TAB>allow|deny"
                )
            pair = frozenset(_merge_stage_form(text, lexicon) for text in fields[:2])
            if len(pair) != 2:
                raise LexiconError(
                    f"{merges_path}:{lineno}: pair normalizes to a single form"
                )
            if fields[2] == "allow":
                lexicon.allow_pairs.add(pair)
            else:
                lexicon.deny_pairs.add(pair)
    conflict = lexicon.allow_pairs & lexicon.deny_pairs
    if conflict:
        listed = sorted(tuple(sorted(p)) for p in conflict)
        raise LexiconError(f"pairs listed as both allow and deny: {listed}")
    return lexicon


def default_lexicon_dir() -> Path:
    """Directory holding the lexicon files shipped with the package."""
    return Path(__file__).resolve().parent / "data"


def _merge_stage_form(text: str, lexicon: NormalizationLexicon) -> str:
    # merge runs after folding, abbreviation expansion, and singularization
    form = apply_abbrev_map(fold_case_hyphens(text), lexicon)
    return singularize(form, lexicon.protected_tokens)


def _tsv_rows(path: str | Path) -> list[tuple[int, list[str]]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon file {path}: {exc}") from exc
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append((lineno, [f.strip() for f in line.split("\t")]))
    return rows


def _balanced(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _lcs_len(a: str, b: str) -> int:
    # two-row dynamic program for the longest common subsequence length
    if not a or not b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    prev = [0] * (len(a) + 1)
    for cb in b:
        curr = [0]
        append = curr.append
        for i, ca in enumerate(a, 1):
            if ca == cb:
                append(prev[i - 1] + 1)
            else:
                x = prev[i]
                y = curr[i - 1]
                append(x if x >= y else y)
        prev = curr
    return prev[-1]
