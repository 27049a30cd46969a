"""Program-unit extraction from Python source.

Splitting is lexical: a regular-expression tokenizer produces logical
lines, and ``def``/``class`` headers plus indentation decide which unit
owns each line.  No parser is involved, so partially valid or Python 2
sources are still processed.
"""

from __future__ import annotations

import re
import zipfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Iterator

from .catalog import InstructionCatalog

UNIT_KINDS = ("class", "method", "function", "main")
MAIN_NAME = "<main>"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f]+)
  | (?P<comment>\#[^\r\n]*)
  | (?P<cont>\\\r?\n)
  | (?P<newline>\r?\n|\r)
  | (?P<string>
        (?:[rRbBuUfF]{1,2})?
        (?: '''(?:\\.|[^\\])*?'''
          | \"\"\"(?:\\.|[^\\])*?\"\"\"
          | '(?:\\.|[^\\'\r\n])*'
          | "(?:\\.|[^\\"\r\n])*"
        )
    )
  | (?P<number>
        0[xX][0-9a-fA-F_]+[lL]?
      | 0[oObB][0-7_]+
      | (?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][-+]?\d+)?[jJlL]?
    )
  | (?P<name>[^\W\d]\w*)
  | (?P<op>
        \*\*=|//=|>>=|<<=|\.\.\.|->|:=|<>
      | [-+*/%&|^@<>=!]=
      | \*\*|//|<<|>>
      | [-+*/%&|^~<>=@.,:;()\[\]{}`]
    )
  | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)

_NEWLINE_RE = re.compile(r"\r\n|\r|\n")
_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {")", "]", "}"}


class SourceError(ValueError):
    """Source text that cannot be split (unterminated string, broken nesting)."""


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "op"
    text: str
    line: int


@dataclass
class LogicalLine:
    indent: int
    tokens: list[Token]
    first: int  # 1-based physical line numbers, inclusive
    last: int


def tokenize(text: str) -> list[Token]:
    """Significant tokens of ``text``.

    Strings, comments and numbers are dropped, as is the ``@`` that opens a
    decorator line (it is not the matrix-multiply operator).
    """
    out: list[Token] = []
    for line in logical_lines(text, strict=False):
        toks = line.tokens
        if toks[0].text == "@":
            toks = toks[1:]
        out.extend(toks)
    return out


def logical_lines(text: str, strict: bool = True) -> list[LogicalLine]:
    """Group tokens into logical lines, tracking bracket nesting and continuations.

    With ``strict`` unbalanced brackets and unterminated strings raise
    :class:`SourceError`; otherwise they are tolerated.  Lines holding no
    name or operator token (blank, comment-only, bare docstrings) are omitted.
    """
    lines: list[LogicalLine] = []
    tokens: list[Token] = []
    stack: list[str] = []
    lineno = 1
    first = 1
    indent = 0
    at_line_start = True
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        pos = m.end()
        kind = m.lastgroup
        value = m.group()
        if kind == "ws" or kind == "comment":
            if at_line_start and kind == "ws":
                indent = _indent_width(value)
            continue
        if kind == "newline":
            lineno += 1
            if not stack:
                if tokens:
                    lines.append(LogicalLine(indent, tokens, first, lineno - 1))
                    tokens = []
                at_line_start = True
                indent = 0
            continue
        if kind == "cont":
            lineno += 1
            continue
        if at_line_start:
            at_line_start = False
            first = lineno
        if kind == "string":
            lineno += len(_NEWLINE_RE.findall(value))
        elif kind == "name":
            tokens.append(Token("name", value, lineno))
        elif kind == "op":
            if value in _OPEN:
                stack.append(_OPEN[value])
            elif value in _CLOSE:
                if stack and stack[-1] == value:
                    stack.pop()
                elif strict:
                    raise SourceError(f"line {lineno}: unbalanced {value!r}")
                else:
                    stack.clear()
            tokens.append(Token("op", value, lineno))
        elif kind == "other" and value in "'\"" and strict:
            raise SourceError(f"line {lineno}: unterminated string")
    if stack and strict:
        raise SourceError(f"line {lineno}: {len(stack)} bracket(s) still open at end of file")
    if tokens:
        lines.append(LogicalLine(indent, tokens, first, lineno))
    return lines


def _indent_width(ws: str) -> int:
    width = 0
    for ch in ws:
        if ch == "\t":
            width = (width // 8 + 1) * 8
        elif ch == "\f":
            width = 0
        else:
            width += 1
    return width


@dataclass
class ProgramUnit:
    kind: str
    name: str
    body: str
    line: int  # first source line of the unit


@dataclass
class _Scope:
    kind: str
    name: str
    header_indent: int
    line: int
    lines: list[LogicalLine] = field(default_factory=list)


def _header(line: LogicalLine) -> tuple[str, str] | None:
    """(``def``|``class``, name) if the logical line opens a definition."""
    toks = line.tokens
    i = 0
    if toks[0].text == "async" and len(toks) > 1 and toks[1].text == "def":
        i = 1
    if toks[i].kind == "name" and toks[i].text in ("def", "class"):
        if len(toks) > i + 1 and toks[i + 1].kind == "name":
            return toks[i].text, toks[i + 1].text
    return None


def split_units(text: str, nested_units: bool = True) -> list[ProgramUnit]:
    """Split module source into class, method, function and main units.

    Every line is owned by exactly one unit: the innermost definition whose
    body it sits in.  A class unit therefore keeps only class-level
    statements, and the main unit keeps the module-level residue.  With
    ``nested_units`` off, definitions inside functions stay in the
    enclosing function.  Units appear in order of their first line.
    """
    lines = logical_lines(text, strict=True)
    if not lines:
        return []
    main = _Scope("main", MAIN_NAME, -1, 1)
    stack = [main]
    done: list[_Scope] = []
    pending: list[LogicalLine] = []
    for line in lines:
        while len(stack) > 1 and line.indent <= stack[-1].header_indent:
            done.append(stack.pop())
        owner = stack[-1]
        if line.tokens[0].text == "@" and line.tokens[0].kind == "op":
            pending.append(line)
            continue
        head = _header(line)
        if head is not None and (nested_units or owner.kind in ("main", "class")):
            keyword, name = head
            if keyword == "class":
                kind = "class"
            elif owner.kind == "class":
                kind = "method"
            else:
                kind = "function"
            start = pending[0].first if pending else line.first
            scope = _Scope(kind, name, line.indent, start, pending + [line])
            pending = []
            stack.append(scope)
            continue
        owner.lines.extend(pending)
        owner.lines.append(line)
        pending = []
    stack[-1].lines.extend(pending)
    while len(stack) > 1:
        done.append(stack.pop())

    if main.lines:
        main.line = main.lines[0].first
        done.append(main)
    physical = text.splitlines()
    return [_to_unit(s, physical) for s in sorted(done, key=lambda s: s.line)]


def _to_unit(scope: _Scope, physical: list[str]) -> ProgramUnit:
    chunks = []
    for ln in scope.lines:
        chunks.extend(physical[ln.first - 1 : ln.last])
    return ProgramUnit(scope.kind, scope.name, "\n".join(chunks) + "\n", scope.line)


def extract_tokens(catalog: InstructionCatalog, tokens: list[Token]) -> tuple[str, ...]:
    found: set[str] = set()
    n = len(tokens)
    i = 0
    while i < n:
        tok = tokens[i]
        if tok.kind == "op":
            name = catalog.lookup(tok.text)
            if name is not None:
                found.add(name)
            i += 1
            continue
        prev = tokens[i - 1].text if i else ""
        if prev in ("def", "class"):
            i += 1
            continue
        if prev == ".":
            if i + 1 < n and tokens[i + 1].text == "(":
                name = catalog.lookup("." + tok.text)
                if name is not None:
                    found.add(name)
            i += 1
            continue
        # bare name, possibly heading a dotted chain; longest catalog match wins
        parts = [tok.text]
        j = i
        while j + 2 < n and tokens[j + 1].text == "." and tokens[j + 2].kind == "name":
            parts.append(tokens[j + 2].text)
            j += 2
        matched = False
        for k in range(len(parts), 1, -1):
            name = catalog.lookup(".".join(parts[:k]))
            if name is not None:
                found.add(name)
                i += 2 * (k - 1) + 1
                matched = True
                break
        if matched:
            continue
        name = catalog.lookup(tok.text)
        if name is not None:
            found.add(name)
        i += 1
    return tuple(sorted(found))


def extract_subset(catalog: InstructionCatalog, body: str) -> tuple[str, ...]:
    """Sorted unique canonical instructions used in ``body``.

    Tokens inside strings and comments never count; excluded and unknown
    tokens contribute nothing.
    """
    return extract_tokens(catalog, tokenize(body))


@dataclass(frozen=True)
class UnitRecord:
    path: str
    kind: str
    name: str
    instructions: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "name": self.name,
            "instructions": list(self.instructions),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnitRecord":
        return cls(d["path"], d["kind"], d["name"], tuple(sorted(set(d["instructions"]))))


@dataclass
class CorpusStats:
    files: int = 0
    lines: int = 0
    units: int = 0
    dropped_empty: int = 0
    parse_failures: int = 0
    failed_paths: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "files": self.files,
            "lines": self.lines,
            "units": self.units,
            "dropped_empty": self.dropped_empty,
            "parse_failures": self.parse_failures,
            "failed_paths": list(self.failed_paths),
        }


class CorpusError(OSError):
    pass


@dataclass
class _FileResult:
    path: str
    records: list[UnitRecord]
    units: int = 0
    dropped: int = 0
    lines: int = 0
    failed: bool = False


def process_file(
    path: str, data: bytes | None, catalog: InstructionCatalog, nested_units: bool = True
) -> _FileResult:
    if data is None:
        return _FileResult(path, [], failed=True)
    try:
        text = data.decode("utf-8-sig")
        units = split_units(text, nested_units=nested_units)
    except (UnicodeDecodeError, SourceError):
        return _FileResult(path, [], failed=True)
    result = _FileResult(path, [], units=len(units), lines=len(text.splitlines()))
    for u in units:
        subset = extract_subset(catalog, u.body)
        if subset:
            result.records.append(UnitRecord(path, u.kind, u.name, subset))
        else:
            result.dropped += 1
    return result


def _iter_sources(
    root: Path, extensions: tuple[str, ...]
) -> Iterator[tuple[str, bytes | None]]:
    if root.is_dir():
        paths = [
            p for p in root.rglob("*")
            if p.suffix in extensions and p.is_file()
        ]
        for rel, p in sorted((p.relative_to(root).as_posix(), p) for p in paths):
            try:
                yield rel, p.read_bytes()
            except OSError:
                yield rel, None
    elif zipfile.is_zipfile(root):
        with zipfile.ZipFile(root) as zf:
            names = sorted(
                n for n in zf.namelist()
                if not n.endswith("/") and PurePosixPath(n).suffix in extensions
            )
            for name in names:
                yield name, zf.read(name)
    else:
        raise CorpusError(f"not a directory or zip archive: {root}")


_worker_state: dict = {}


def _init_worker(catalog: InstructionCatalog, nested_units: bool) -> None:
    _worker_state["catalog"] = catalog
    _worker_state["nested"] = nested_units


def _work(item: tuple[str, bytes]) -> _FileResult:
    return process_file(item[0], item[1], _worker_state["catalog"], _worker_state["nested"])


def scan_corpus(
    root: str | Path,
    catalog: InstructionCatalog,
    extensions: tuple[str, ...] = (".py",),
    nested_units: bool = True,
    jobs: int = 1,
) -> tuple[list[UnitRecord], CorpusStats]:
    """Extract unit records from every matching file under ``root``.

    ``root`` is a directory or a .zip archive.  Files are visited in
    lexicographic path order and results are merged in that order whatever
    ``jobs`` is, so the record stream is reproducible.
    """
    root = Path(root)
    if not root.exists():
        raise CorpusError(f"corpus root does not exist: {root}")
    sources = _iter_sources(root, tuple(extensions))
    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=(catalog, nested_units)
        ) as pool:
            results = list(pool.map(_work, sources, chunksize=16))
    else:
        results = [process_file(p, d, catalog, nested_units) for p, d in sources]

    records: list[UnitRecord] = []
    stats = CorpusStats()
    for r in results:
        stats.files += 1
        if r.failed:
            stats.parse_failures += 1
            stats.failed_paths.append(r.path)
            continue
        stats.lines += r.lines
        stats.units += r.units
        stats.dropped_empty += r.dropped
        records.extend(r.records)
    return records, stats
