"""Instruction universe: canonical names, arities and source-token aliases."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

FORMAT_VERSION = 1

EXCLUDED = "excluded"
UNKNOWN = "unknown"


class CatalogError(ValueError):
    """Malformed catalog source; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CatalogConflict(CatalogError):
    pass


@dataclass(frozen=True)
class InstructionDef:
    name: str
    arity: int
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class InstructionCatalog:
    language: str
    defs: tuple[InstructionDef, ...]
    excluded_tokens: frozenset[str] = frozenset()
    _lookup: dict[str, str] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.defs:
            raise CatalogError("catalog has no instructions")
        owner: dict[str, str] = {}
        for d in self.defs:
            if not d.name:
                raise CatalogError("instruction with empty name")
            if d.arity < 0:
                raise CatalogError(f"instruction {d.name!r} has negative arity")
            for tok in dict.fromkeys((d.name, *d.aliases)):
                prev = owner.get(tok)
                if prev is not None:
                    raise CatalogConflict(
                        f"token {tok!r} claimed by both {prev!r} and {d.name!r}"
                    )
                owner[tok] = d.name
        clash = sorted(self.excluded_tokens & owner.keys())
        if clash:
            raise CatalogConflict(f"excluded tokens also mapped to instructions: {clash}")
        self._lookup.update(owner)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.defs]

    def __len__(self) -> int:
        return len(self.defs)

    def __contains__(self, name: str) -> bool:
        return name in self._lookup and self._lookup[name] == name

    def get(self, name: str) -> InstructionDef:
        for d in self.defs:
            if d.name == name:
                return d
        raise KeyError(name)

    def lookup(self, token: str) -> str | None:
        """Canonical name for ``token``, or None if it maps to nothing."""
        return self._lookup.get(token)

    def resolve(self, token: str) -> str:
        return resolve_token(self, token)

    def arity_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for d in self.defs:
            counts[d.arity] = counts.get(d.arity, 0) + 1
        return dict(sorted(counts.items()))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "language": self.language,
            "excluded_tokens": sorted(self.excluded_tokens),
            "instructions": [
                {"name": d.name, "arity": d.arity, "aliases": list(d.aliases)}
                for d in self.defs
            ],
        }


def resolve_token(catalog: InstructionCatalog, token: str) -> str:
    """Map a source token to its canonical instruction, ``EXCLUDED`` or ``UNKNOWN``.

    A catalog instruction literally named "excluded" or "unknown" would be
    ambiguous with the sentinels; use :meth:`InstructionCatalog.lookup` there.
    """
    name = catalog.lookup(token)
    if name is not None:
        return name
    if token in catalog.excluded_tokens:
        return EXCLUDED
    return UNKNOWN


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _find_entry_line(text: str, name: str) -> int | None:
    needle = json.dumps(name)
    idx = text.find(f'"name": {needle}')
    if idx < 0:
        idx = text.find(f'"name":{needle}')
    return _line_of(text, idx) if idx >= 0 else None


def load_catalog(source: str) -> InstructionCatalog:
    """Parse catalog JSON text."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CatalogError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise CatalogError("top level must be an object", 1)
    entries = doc.get("instructions")
    if not isinstance(entries, list):
        raise CatalogError("missing 'instructions' list", 1)
    excluded = doc.get("excluded_tokens", [])
    if not isinstance(excluded, list) or not all(isinstance(t, str) for t in excluded):
        raise CatalogError("'excluded_tokens' must be a list of strings", 1)

    defs = []
    owner: dict[str, str] = {}
    for i, entry in enumerate(entries):
        where = None
        if isinstance(entry, dict) and isinstance(entry.get("name"), str):
            where = _find_entry_line(source, entry["name"])
        if not isinstance(entry, dict):
            raise CatalogError(f"instruction #{i} is not an object", where)
        name = entry.get("name")
        arity = entry.get("arity")
        aliases = entry.get("aliases", [])
        if not isinstance(name, str) or not name:
            raise CatalogError(f"instruction #{i} has no name", where)
        if isinstance(arity, bool) or not isinstance(arity, int) or arity < 0:
            raise CatalogError(f"instruction {name!r}: arity must be a non-negative integer", where)
        if not isinstance(aliases, list) or not all(isinstance(a, str) and a for a in aliases):
            raise CatalogError(f"instruction {name!r}: aliases must be non-empty strings", where)
        for tok in dict.fromkeys((name, *aliases)):
            if tok in owner:
                raise CatalogConflict(
                    f"token {tok!r} claimed by both {owner[tok]!r} and {name!r}", where
                )
            owner[tok] = name
        defs.append(InstructionDef(name, arity, tuple(aliases)))

    clash = sorted(set(excluded) & owner.keys())
    if clash:
        raise CatalogConflict(f"excluded tokens also mapped to instructions: {clash}")
    return InstructionCatalog(
        language=str(doc.get("language", "")),
        defs=tuple(defs),
        excluded_tokens=frozenset(excluded),
    )


def dump_catalog(catalog: InstructionCatalog) -> str:
    return json.dumps(catalog.to_dict(), indent=1) + "\n"


def default_catalog() -> InstructionCatalog:
    text = resources.files("subsetminer").joinpath("data/python.json").read_text("utf-8")
    return load_catalog(text)


def read_catalog(path: str | Path | None) -> InstructionCatalog:
    if path is None:
        return default_catalog()
    return load_catalog(Path(path).read_text(encoding="utf-8"))


def make_catalog(
    entries: Iterable[tuple[str, int] | tuple[str, int, Iterable[str]]],
    excluded: Iterable[str] = (),
    language: str = "",
) -> InstructionCatalog:
    """Build a catalog from ``(name, arity[, aliases])`` tuples."""
    defs = []
    for e in entries:
        aliases = tuple(e[2]) if len(e) > 2 else ()
        defs.append(InstructionDef(e[0], e[1], aliases))
    return InstructionCatalog(language, tuple(defs), frozenset(excluded))
