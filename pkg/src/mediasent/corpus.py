"""Batch-file parsing, Boolean retrieval queries and the corpus CSV.

Batch file layout (UTF-8, LF)::

    ==== ITEM ====
    Id: <optional opaque id>
    Media: <outlet>
    Datum: YYYY-MM-DD[, HH:MM:SS]
    Publiceringsställe: webb|print
    Rubrik: <optional headline>
    ----
    body text ...

Records are separated by the ``==== ITEM ====`` line; a leading separator is
optional. When ``Id:`` is absent the id is ``<source>#<record number>``.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import BatchFormatError, DataError, QuerySyntaxError
from .text import tokenize

log = logging.getLogger(__name__)

SEPARATOR = "==== ITEM ===="
BODY_MARK = "----"
MAX_RECORDS = 500
CHANNELS = {"webb": "online", "print": "print"}
_CHANNEL_OUT = {"online": "webb", "print": "print"}


@dataclass(frozen=True)
class MediaItem:
    id: str
    outlet: str
    date: dt.date
    time: dt.time | None
    channel: str
    headline: str
    body: str
    word_count: int = -1

    def __post_init__(self):
        if self.channel not in ("print", "online"):
            raise DataError(f"item {self.id}: channel must be print or online, got {self.channel!r}")
        if self.word_count < 0:
            object.__setattr__(self, "word_count", len(self.tokens()))

    @property
    def text(self) -> str:
        return f"{self.headline}\n{self.body}" if self.headline else self.body

    def tokens(self) -> list[str]:
        return tokenize(self.text)

    @property
    def sort_key(self):
        return (self.date, self.time or dt.time(0), self.id)


@dataclass
class RecordError:
    record: int
    offset: int
    message: str

    def __str__(self):
        return f"record {self.record} (byte offset {self.offset}): {self.message}"


@dataclass
class BatchResult:
    items: list[MediaItem] = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)


def _parse_datum(value: str) -> tuple[dt.date, dt.time | None]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) > 2 or not parts[0]:
        raise ValueError(f"bad Datum {value!r}")
    date = dt.date.fromisoformat(parts[0])
    if len(parts[0]) != 10:
        raise ValueError(f"bad Datum {value!r}")
    time = None
    if len(parts) == 2:
        time = dt.time.fromisoformat(parts[1])
    return date, time


def parse_batch(data: bytes | str, source: str = "batch") -> BatchResult:
    """Parse one batch file.

    Record-level problems (missing date or body, invalid date, unknown
    channel) are collected in ``errors`` and the record is skipped.
    Structural problems raise :class:`BatchFormatError`.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BatchFormatError("file is not valid UTF-8", exc.start) from exc
    else:
        text = data

    records: list[tuple[int, list[str]]] = []
    current: list[str] | None = None
    start = 0
    offset = 0
    preamble: list[str] = []
    for line in text.split("\n"):
        line_len = len(line.encode("utf-8")) + 1
        if line == SEPARATOR:
            if current is not None:
                records.append((start, current))
            current = []
            start = offset
        elif line.startswith("===="):
            raise BatchFormatError(f"malformed record delimiter {line!r}", offset)
        elif current is None:
            preamble.append(line)
        else:
            current.append(line)
        offset += line_len
    if current is not None:
        records.append((start, current))
    if any(l.strip() for l in preamble):
        if records:
            raise BatchFormatError("content before first record delimiter", 0)
        # a single record without any leading separator
        records.append((0, preamble))

    if len(records) > MAX_RECORDS:
        raise BatchFormatError(f"{len(records)} records exceed the limit of {MAX_RECORDS}")

    result = BatchResult()
    for n, (rec_offset, lines) in enumerate(records, start=1):
        try:
            result.items.append(_parse_record(lines, f"{source}#{n}"))
        except ValueError as exc:
            result.errors.append(RecordError(n, rec_offset, str(exc)))
    return result


def _parse_record(lines: list[str], default_id: str) -> MediaItem:
    try:
        mark = lines.index(BODY_MARK)
    except ValueError:
        raise ValueError("missing '----' body marker") from None
    header: dict[str, str] = {}
    for line in lines[:mark]:
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"bad header line {line!r}")
        header[key.strip()] = value.strip()
    body = "\n".join(lines[mark + 1:]).strip()

    if "Datum" not in header:
        raise ValueError("missing Datum")
    if not body:
        raise ValueError("missing body")
    if "Media" not in header or not header["Media"]:
        raise ValueError("missing Media")
    date, time = _parse_datum(header["Datum"])
    place = header.get("Publiceringsställe", "").lower()
    if place not in CHANNELS:
        raise ValueError(f"unknown Publiceringsställe {place!r}")
    return MediaItem(
        id=header.get("Id") or default_id,
        outlet=header["Media"],
        date=date,
        time=time,
        channel=CHANNELS[place],
        headline=header.get("Rubrik", ""),
        body=body,
    )


def serialize_batch(items: Sequence[MediaItem]) -> bytes:
    if len(items) > MAX_RECORDS:
        raise BatchFormatError(f"{len(items)} records exceed the limit of {MAX_RECORDS}")
    out = io.StringIO()
    for item in items:
        out.write(SEPARATOR + "\n")
        out.write(f"Id: {item.id}\n")
        out.write(f"Media: {item.outlet}\n")
        datum = item.date.isoformat()
        if item.time is not None:
            datum += ", " + item.time.isoformat()
        out.write(f"Datum: {datum}\n")
        out.write(f"Publiceringsställe: {_CHANNEL_OUT[item.channel]}\n")
        if item.headline:
            out.write(f"Rubrik: {item.headline}\n")
        out.write(BODY_MARK + "\n")
        out.write(item.body + "\n")
    return out.getvalue().encode("utf-8")


def sort_corpus(items: Iterable[MediaItem]) -> list[MediaItem]:
    items = sorted(items, key=lambda it: it.sort_key)
    seen = set()
    for it in items:
        if it.id in seen:
            raise DataError(f"duplicate item id {it.id!r}")
        seen.add(it.id)
    return items


def ingest_directory(path: str | os.PathLike) -> tuple[list[MediaItem], list[str]]:
    """Parse every ``*.txt`` batch file under ``path`` into one sorted corpus."""
    items: list[MediaItem] = []
    problems: list[str] = []
    files = sorted(Path(path).glob("*.txt"))
    for f in files:
        try:
            res = parse_batch(f.read_bytes(), source=f.stem)
        except BatchFormatError as exc:
            raise BatchFormatError(f"{f.name}: {exc}") from exc
        items.extend(res.items)
        problems.extend(f"{f.name}: {e}" for e in res.errors)
    for p in problems:
        log.warning("skipped %s", p)
    return sort_corpus(items), problems


# ---------------------------------------------------------------- queries

@dataclass(frozen=True)
class Term:
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("empty term")


@dataclass(frozen=True)
class Not:
    child: "Query"


@dataclass(frozen=True)
class And:
    children: tuple["Query", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Query", ...]


Query = Term | Not | And | Or
_KEYWORDS = ("AND", "OR", "NOT")
_QUOTES = {'"': '"', "“": "”", "”": "”"}


def _lex(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append((c, c, i))
            i += 1
        elif c in _QUOTES:
            close = text.find(_QUOTES[c], i + 1)
            if close < 0:
                raise QuerySyntaxError("unterminated quoted term", i)
            term = text[i + 1:close]
            if not term.strip():
                raise QuerySyntaxError("empty term", i)
            toks.append(("TERM", term, i))
            i = close + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()\"“”":
                j += 1
            word = text[i:j]
            toks.append((word, word, i) if word in _KEYWORDS else ("TERM", word, i))
            i = j
    return toks


class _Parser:
    # or_expr  := and_expr ("OR" and_expr)*
    # and_expr := not_expr ("AND" not_expr)*
    # not_expr := "NOT" not_expr | atom
    # atom     := TERM | "(" or_expr ")"

    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def where(self):
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def take(self, kind):
        tok = self.peek()
        if tok is None or tok[0] != kind:
            return None
        self.pos += 1
        return tok

    def parse(self) -> Query:
        if not self.toks:
            raise QuerySyntaxError("empty query", 0)
        node = self.or_expr()
        if self.peek() is not None:
            tok = self.peek()
            msg = "unbalanced ')'" if tok[0] == ")" else f"unexpected {tok[1]!r}"
            raise QuerySyntaxError(msg, tok[2])
        return node

    def or_expr(self):
        parts = [self.and_expr()]
        while self.take("OR"):
            parts.append(self.and_expr())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def and_expr(self):
        parts = [self.not_expr()]
        while self.take("AND"):
            parts.append(self.not_expr())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def not_expr(self):
        if self.take("NOT"):
            return Not(self.not_expr())
        return self.atom()

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("dangling operator", len(self.text))
        if tok[0] == "TERM":
            self.pos += 1
            return Term(tok[1].lower())
        if tok[0] == "(":
            self.pos += 1
            node = self.or_expr()
            if not self.take(")"):
                raise QuerySyntaxError("unbalanced '('", tok[2])
            return node
        raise QuerySyntaxError(f"unexpected {tok[1]!r}", tok[2])


def parse_query(text: str) -> Query:
    """Parse a Boolean query; precedence is NOT > AND > OR."""
    return _Parser(text).parse()


def format_query(q: Query) -> str:
    if isinstance(q, Term):
        return f'"{q.text}"'
    if isinstance(q, Not):
        return f"NOT {format_query(q.child)}"
    op = " AND " if isinstance(q, And) else " OR "
    return "(" + op.join(format_query(c) for c in q.children) + ")"


class _TokenIndex:
    __slots__ = ("tokens", "positions")

    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.positions: dict[str, list[int]] = {}
        for i, t in enumerate(tokens):
            self.positions.setdefault(t, []).append(i)

    def contains(self, phrase: tuple[str, ...]) -> bool:
        if not phrase:
            return False
        starts = self.positions.get(phrase[0])
        if not starts:
            return False
        if len(phrase) == 1:
            return True
        k = len(phrase)
        return any(tuple(self.tokens[s:s + k]) == phrase for s in starts)


_TERM_CACHE: dict[str, tuple[str, ...]] = {}


def _term_tokens(term: str) -> tuple[str, ...]:
    toks = _TERM_CACHE.get(term)
    if toks is None:
        toks = _TERM_CACHE[term] = tuple(tokenize(term))
    return toks


def _eval(q: Query, idx: _TokenIndex) -> bool:
    if isinstance(q, Term):
        return idx.contains(_term_tokens(q.text))
    if isinstance(q, Not):
        return not _eval(q.child, idx)
    if isinstance(q, And):
        return all(_eval(c, idx) for c in q.children)
    return any(_eval(c, idx) for c in q.children)


def matches(query: Query, item: MediaItem | str | Sequence[str]) -> bool:
    """Whole-token, case-insensitive evaluation over headline and body.

    Multi-word terms match contiguous token runs.
    """
    if isinstance(item, MediaItem):
        tokens = item.tokens()
    elif isinstance(item, str):
        tokens = tokenize(item)
    else:
        tokens = list(item)
    return _eval(query, _TokenIndex(tokens))


def filter_corpus(corpus: Sequence[MediaItem], query: Query) -> list[MediaItem]:
    return [it for it in corpus if matches(query, it)]


# ------------------------------------------------------------- corpus CSV

CORPUS_COLUMNS = ["id", "outlet", "date", "time", "channel", "word_count", "headline", "body"]


def write_corpus_csv(items: Sequence[MediaItem], fh, header_lines: Sequence[str] = ()) -> None:
    for line in header_lines:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CORPUS_COLUMNS)
    for it in items:
        writer.writerow([it.id, it.outlet, it.date.isoformat(),
                         it.time.isoformat() if it.time else "", it.channel,
                         it.word_count, it.headline, it.body])


def iter_csv_rows(fh) -> Iterator[dict[str, str]]:
    """DictReader over a CSV whose leading ``#`` lines are metadata."""
    lines = iter(fh)
    buffered = []
    for line in lines:
        if line.startswith("#"):
            continue
        buffered.append(line)
        break

    def chained():
        yield from buffered
        yield from lines

    yield from csv.DictReader(chained())


def read_corpus_csv(fh) -> list[MediaItem]:
    items = []
    for row in iter_csv_rows(fh):
        try:
            items.append(MediaItem(
                id=row["id"], outlet=row["outlet"],
                date=dt.date.fromisoformat(row["date"]),
                time=dt.time.fromisoformat(row["time"]) if row["time"] else None,
                channel=row["channel"], headline=row["headline"], body=row["body"],
                word_count=int(row["word_count"]),
            ))
        except (KeyError, ValueError) as exc:
            raise DataError(f"bad corpus row {row.get('id', '?')}: {exc}") from exc
    return items
