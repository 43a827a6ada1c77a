"""Reading and writing matrices and row-choice families.

Text format (UTF-8)::

    matrix N
    <N lines of N decimals>

    family N
    row 1: m
    <m lines of N decimals>
    row 2: m
    ...

Rows in the text format are numbered from 1 and must appear in order; blank
lines are ignored.  Files ending in ``.json`` use the mirror schema
``{"kind": "family", "n": N, "rows": [[[...], ...], ...]}`` or
``{"kind": "matrix", "n": N, "entries": [[...], ...]}``.
"""
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .family import RowChoiceFamily, single

_DECIMAL = re.compile(r"[+]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_HEADER = re.compile(r"(matrix|family)\s+(\d+)")
_ROW = re.compile(r"row\s+(\d+)\s*:\s*(\d+)")


@dataclass(frozen=True, eq=False)
class ParsedInput:
    kind: str  # "matrix" or "family"
    n: int
    family: RowChoiceFamily
    digest: str

    @property
    def matrix(self):
        if self.kind != "matrix":
            raise ValueError("input is a family, not a single matrix")
        return self.family.matrix((0,) * self.n)


def _lines(text):
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped:
            yield number, line


def _numbers(line, number, n):
    out = []
    for match in re.finditer(r"\S+", line):
        token = match.group()
        if not _DECIMAL.fullmatch(token):
            raise ParseError(f"not a nonnegative decimal: {token!r}", number, match.start() + 1)
        out.append(float(token))
    if len(out) != n:
        raise ParseError(f"expected {n} numbers, found {len(out)}", number)
    return out


def parse_text(text):
    """Parse the text format; returns ``(kind, n, rows)`` with per-row choice lists."""
    lines = _lines(text)
    try:
        number, line = next(lines)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    header = _HEADER.fullmatch(line.strip())
    if not header:
        raise ParseError("expected 'matrix N' or 'family N'", number, 1)
    kind, n = header.group(1), int(header.group(2))
    if n < 1:
        raise ParseError("dimension must be >= 1", number)

    def take(what):
        try:
            return next(lines)
        except StopIteration:
            raise ParseError(f"unexpected end of input, expected {what}") from None

    rows = []
    if kind == "matrix":
        for _ in range(n):
            number, line = take("a matrix row")
            rows.append([_numbers(line, number, n)])
    else:
        for i in range(1, n + 1):
            number, line = take(f"'row {i}: m'")
            m = _ROW.fullmatch(line.strip())
            if not m:
                raise ParseError(f"expected 'row {i}: m'", number, 1)
            if int(m.group(1)) != i:
                raise ParseError(f"expected row {i}, found row {m.group(1)}", number)
            count = int(m.group(2))
            if count < 1:
                raise ParseError("a row needs at least one choice", number)
            choices = []
            for _ in range(count):
                number, line = take(f"a choice of row {i}")
                choices.append(_numbers(line, number, n))
            rows.append(choices)
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("trailing content after the last row", extra[0])
    return kind, n, rows


def parse_json(text):
    """Parse the JSON mirror; returns ``(kind, n, rows)`` like :func:`parse_text`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or doc.get("kind") not in ("matrix", "family"):
        raise ParseError('expected an object with "kind": "matrix" or "family"')
    kind = doc["kind"]
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError('"n" must be a positive integer')
    key = "entries" if kind == "matrix" else "rows"
    data = doc.get(key)
    if not isinstance(data, list) or len(data) != n:
        raise ParseError(f'"{key}" must be a list of length {n}')

    def vector(x, where):
        ok = isinstance(x, list) and len(x) == n and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0 and np.isfinite(v)
            for v in x
        )
        if not ok:
            raise ParseError(f"{where}: expected {n} nonnegative numbers")
        return [float(v) for v in x]

    if kind == "matrix":
        rows = [[vector(r, f"entries[{i}]")] for i, r in enumerate(data)]
    else:
        rows = []
        for i, choices in enumerate(data):
            if not isinstance(choices, list) or not choices:
                raise ParseError(f"rows[{i}]: expected a nonempty list of choices")
            rows.append([vector(c, f"rows[{i}][{k}]") for k, c in enumerate(choices)])
    return kind, n, rows


def loads(text, fmt="text"):
    """Parse ``text`` (``fmt`` is ``"text"`` or ``"json"``) into a :class:`ParsedInput`."""
    kind, n, rows = (parse_json if fmt == "json" else parse_text)(text)
    if kind == "matrix":
        family = single(np.array([r[0] for r in rows]))
    else:
        family = RowChoiceFamily.from_rows(rows)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return ParsedInput(kind, n, family, digest)


def load(path):
    """Read a matrix or family file; ``.json`` selects the JSON mirror."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not UTF-8 ({exc.reason})") from None
    return loads(text, "json" if path.suffix.lower() == ".json" else "text")


def _fmt(x):
    return repr(float(x)) if x != int(x) else str(int(x))


def format_matrix(A):
    A = np.asarray(A, dtype=float)
    lines = [f"matrix {A.shape[0]}"]
    lines += [" ".join(_fmt(x) for x in row) for row in A]
    return "\n".join(lines) + "\n"


def format_family(F):
    lines = [f"family {F.n}"]
    for i, choices in enumerate(F.rows, start=1):
        lines.append(f"row {i}: {choices.shape[0]}")
        lines += [" ".join(_fmt(x) for x in c) for c in choices]
    return "\n".join(lines) + "\n"


def family_to_json(F):
    return json.dumps({"kind": "family", "n": F.n, "rows": [r.tolist() for r in F.rows]})
