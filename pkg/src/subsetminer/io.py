"""File formats, atomic writes and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .corpus import UnitRecord
from .subsetcore import SubsetFamily

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def write_text(path: str | Path, text: str) -> None:
    """Write ``text`` atomically (temp file + rename); ``-`` means stdout."""
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_cell(v) for v in row])
    return buf.getvalue()


def fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


# units JSONL


def dumps_units(records: Iterable[UnitRecord]) -> str:
    return "".join(
        json.dumps(r.to_dict(), separators=(",", ":"), ensure_ascii=False) + "\n" for r in records
    )


def loads_units(text: str) -> list[UnitRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            rec = UnitRecord.from_dict(d)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"units line {lineno}: {exc}") from None
        records.append(rec)
    return records


def read_units(path: str | Path) -> list[UnitRecord]:
    return loads_units(read_input(path))


def read_input(path: str | Path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def read_family(path: str | Path) -> SubsetFamily:
    try:
        return SubsetFamily.loads(read_input(path))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}: not a family file ({exc})") from None


def read_units_or_family(path: str | Path) -> SubsetFamily | list[UnitRecord]:
    """Family JSON if the file is one JSON object with ``subsets``, else units JSONL."""
    text = read_input(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, dict) and "subsets" in doc:
            return SubsetFamily.from_dict(doc)
    return loads_units(text)


# manifests


def digest_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def digest_tree(root: str | Path, extensions: Sequence[str]) -> str:
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(q for q in root.rglob("*") if q.is_file() and q.suffix in extensions):
        h.update(p.relative_to(root).as_posix().encode())
        h.update(b"\0")
        h.update(digest_file(p).encode())
        h.update(b"\n")
    return h.hexdigest()


def digest_input(path: str | Path, extensions: Sequence[str] = (".py",)) -> str:
    if str(path) == "-":
        return "stdin"
    p = Path(path)
    if p.is_dir():
        return digest_tree(p, extensions)
    return digest_file(p)


def manifest(command: str, config: dict, inputs: dict[str, str], outputs: Sequence[str]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "input_digests": inputs,
        "outputs": list(outputs),
    }


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    if out.is_dir():
        return out / "manifest.json"
    return out.with_name(out.name + ".manifest.json")
