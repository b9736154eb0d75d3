"""The notations CSV: the interchange format for results and reviews.

One row per pair in ascending-distance order, columns
name1,name2,Distance,note,comment. Distances carry six decimals, notes
use the on-screen English labels verbatim, comments round-trip exactly.
A file exported, read back and written again is byte-identical.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

from .errors import NotationsFormatError

HEADER = ("name1", "name2", "Distance", "note", "comment")


class Note(enum.Enum):
    """The six review categories; every pair starts as NOT_EVALUATED."""

    NOT_EVALUATED = "Not evaluated"
    LINKED = "Linked"
    PROBABLY_LINKED = "Probably linked"
    DONT_KNOW = "Don't know"
    PROBABLY_NOT_LINKED = "Probably not linked"
    NOT_LINKED = "Not linked"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "Note":
        for note in cls:
            if note.value == label:
                return note
        raise ValueError(f"unknown note label: {label!r}")


NOTE_LABELS = tuple(note.value for note in Note)


@dataclass(frozen=True)
class NotationRow:
    name1: str
    name2: str
    distance: float
    note: Note
    comment: str


def export_filename(dataset_name: str) -> str:
    return f"notations_{dataset_name}.csv"


def write_rows(rows) -> bytes:
    """Serialize rows (already in ranked order) to CSV bytes."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow(
            (row.name1, row.name2, f"{row.distance:.6f}", row.note.label, row.comment)
        )
    return buf.getvalue().encode("utf-8")


def read_rows(data: bytes) -> list[NotationRow]:
    """Parse CSV bytes in the export schema, preserving row order.

    Raises NotationsFormatError with the offending 1-based line number on
    any deviation from the schema.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NotationsFormatError(1, f"not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise NotationsFormatError(1, "file is empty") from None
    if tuple(header) != HEADER:
        raise NotationsFormatError(1, f"expected header {','.join(HEADER)}")

    rows = []
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != len(HEADER):
            raise NotationsFormatError(line, f"expected {len(HEADER)} fields, got {len(record)}")
        name1, name2, distance_text, note_label, comment = record
        try:
            distance = float(distance_text)
        except ValueError:
            raise NotationsFormatError(line, f"bad distance: {distance_text!r}") from None
        if not 0.0 <= distance <= 1.0:
            raise NotationsFormatError(line, f"distance out of [0, 1]: {distance_text}")
        try:
            note = Note.from_label(note_label)
        except ValueError:
            raise NotationsFormatError(line, f"unknown note: {note_label!r}") from None
        rows.append(NotationRow(name1, name2, distance, note, comment))
    return rows
