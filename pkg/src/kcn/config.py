"""Run configuration loading.

A run is configured by a JSON file. Relative paths are resolved against
the config file's directory. Missing lexicon keys fall back to the files
shipped with the package; an explicit ``null`` disables that lexicon file.

Recognized keys::

    inputs      list of "path" or {"path": ..., "format": "jsonl"|"csv"}
    lexicon     {"protected": path|null, "abbrev": path|null,
                 "merges": path|null}            (optional)
    slices      list of {"label": ..., "years": [first, last]|"all"}
                or bare years                     (optional; default is one
                slice per corpus year plus "all")
    thresholds  {"max_keywords": 10, "synonym_threshold": 90,
                 "top_k": 20, "profile_k": 10}    (optional)
    output_dir  path (optional; the CLI --out flag overrides it)
    seed        integer echoed into the manifest  (optional, default 0)
    flags       {"exhaustive_pairing": false, "power_law_on": "strength",
                 "discrete_power_law": false, "ego_degree_scope": "ego"}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .graph import SliceSpec
from .normalize import DEFAULT_SYNONYM_THRESHOLD, default_lexicon_dir

_TOP_KEYS = {"inputs", "lexicon", "slices", "thresholds", "output_dir", "seed", "flags"}
_LEXICON_KEYS = {"protected", "abbrev", "merges"}
_THRESHOLD_KEYS = {"max_keywords", "synonym_threshold", "top_k", "profile_k"}
_FLAG_KEYS = {
    "exhaustive_pairing",
    "power_law_on",
    "discrete_power_law",
    "ego_degree_scope",
}


@dataclass(frozen=True)
class InputSpec:
    path: Path
    format: str


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings plus the raw config for manifest echoing."""

    inputs: tuple[InputSpec, ...]
    protected_path: Path | None
    abbrev_path: Path | None
    merges_path: Path | None
    slices: tuple[SliceSpec, ...] | None
    max_keywords: int = 10
    synonym_threshold: float = DEFAULT_SYNONYM_THRESHOLD
    top_k: int = 20
    profile_k: int = 10
    output_dir: Path | None = None
    seed: int = 0
    exhaustive_pairing: bool = False
    power_law_on: str = "strength"
    discrete_power_law: bool = False
    ego_degree_scope: str = "ego"
    raw: dict = field(default_factory=dict)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
    base = path.parent

    inputs = _parse_inputs(raw.get("inputs"), base, path)
    protected, abbrev, merges = _parse_lexicon(raw.get("lexicon"), base, path)
    slices = _parse_slices(raw.get("slices"), path)

    thresholds = raw.get("thresholds", {})
    if not isinstance(thresholds, dict) or set(thresholds) - _THRESHOLD_KEYS:
        raise ConfigError(f"{path}: thresholds must be an object with "
                          f"keys {sorted(_THRESHOLD_KEYS)}")
    flags = raw.get("flags", {})
    if not isinstance(flags, dict) or set(flags) - _FLAG_KEYS:
        raise ConfigError(
            f"{path}: flags must be an object with keys {sorted(_FLAG_KEYS)}"
        )
    power_law_on = flags.get("power_law_on", "strength")
    if power_law_on not in ("strength", "degree"):
        raise ConfigError(f"{path}: power_law_on must be 'strength' or 'degree'")
    ego_scope = flags.get("ego_degree_scope", "ego")
    if ego_scope not in ("ego", "full"):
        raise ConfigError(f"{path}: ego_degree_scope must be 'ego' or 'full'")

    output_dir = raw.get("output_dir")
    return RunConfig(
        inputs=inputs,
        protected_path=protected,
        abbrev_path=abbrev,
        merges_path=merges,
        slices=slices,
        max_keywords=int(thresholds.get("max_keywords", 10)),
        synonym_threshold=float(
            thresholds.get("synonym_threshold", DEFAULT_SYNONYM_THRESHOLD)
        ),
        top_k=int(thresholds.get("top_k", 20)),
        profile_k=int(thresholds.get("profile_k", 10)),
        output_dir=_resolve(base, output_dir) if output_dir else None,
        seed=int(raw.get("seed", 0)),
        exhaustive_pairing=bool(flags.get("exhaustive_pairing", False)),
        power_law_on=power_law_on,
        discrete_power_law=bool(flags.get("discrete_power_law", False)),
        ego_degree_scope=ego_scope,
        raw=raw,
    )


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _parse_inputs(value: object, base: Path, where: Path) -> tuple[InputSpec, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: inputs must be a non-empty list")
    specs: list[InputSpec] = []
    for entry in value:
        if isinstance(entry, str):
            entry = {"path": entry}
        if not isinstance(entry, dict) or "path" not in entry:
            raise ConfigError(f"{where}: each input needs a path")
        p = _resolve(base, entry["path"])
        fmt = entry.get("format") or _infer_format(p, where)
        if fmt not in ("jsonl", "csv"):
            raise ConfigError(f"{where}: unknown input format {fmt!r}")
        specs.append(InputSpec(path=p, format=fmt))
    return tuple(specs)


def _infer_format(p: Path, where: Path) -> str:
    suffix = p.suffix.lower().lstrip(".")
    if suffix in ("jsonl", "csv"):
        return suffix
    raise ConfigError(
        f"{where}: cannot infer format of {p.name!r}; use a format key"
    )


def _parse_lexicon(
    value: object, base: Path, where: Path
) -> tuple[Path | None, Path | None, Path | None]:
    defaults = default_lexicon_dir()
    names = {"protected": "protected.tsv", "abbrev": "abbrev.tsv",
             "merges": "merges.tsv"}
    if value is None:
        value = {}
    if not isinstance(value, dict) or set(value) - _LEXICON_KEYS:
        raise ConfigError(
            f"{where}: lexicon must be an object with keys {sorted(_LEXICON_KEYS)}"
        )
    out: list[Path | None] = []
    for key in ("protected", "abbrev", "merges"):
        if key not in value:
            out.append(defaults / names[key])  # packaged default
        elif value[key] is None:
            out.append(None)
        else:
            out.append(_resolve(base, value[key]))
    return out[0], out[1], out[2]


def _parse_slices(value: object, where: Path) -> tuple[SliceSpec, ...] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: slices must be a non-empty list")
    specs: list[SliceSpec] = []
    for entry in value:
        if isinstance(entry, int):
            specs.append(SliceSpec.year(entry))
            continue
        if not isinstance(entry, dict) or "label" not in entry:
            raise ConfigError(f"{where}: each slice needs a label")
        years = entry.get("years", "all")
        if years == "all":
            specs.append(SliceSpec(label=str(entry["label"]), years=None))
        elif (
            isinstance(years, list)
            and len(years) == 2
            and all(isinstance(y, int) for y in years)
        ):
            specs.append(
                SliceSpec(label=str(entry["label"]), years=(years[0], years[1]))
            )
        else:
            raise ConfigError(
                f"{where}: slice years must be [first, last] or \"all\""
            )
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{where}: slice labels must be unique")
    return tuple(specs)
