"""Persistence for datasets, scores, evaluations and the CSV export.

Backed by an embedded SQLite file: transactional, single-node, no
external database. Writes are serialized through one lock; readers see
committed state only. Pairs are always stored canonically
(name1 < name2), so an evaluation reaches the same record no matter the
order a caller names the two coins in.
"""

from __future__ import annotations

import io
import sqlite3
import threading
import uuid
import zipfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import cv2
import numpy as np

from . import notations
from .errors import (
    ArchiveTooLarge,
    CorruptArchive,
    DatasetNotComputed,
    DecodeError,
    DuplicateFileNames,
    DuplicateName,
    InvalidState,
    NonImageEntry,
    TooManyFiles,
    UnknownDataset,
    UnknownPair,
)
from .imaging import GrayImage, NormalizedImage, load_image, load_normalized
from .notations import Note
from .registration import SimilarityTransform
from .scoring import DistanceMatrix

# Upload rules: total uncompressed payload and entry count.
MAX_UPLOAD_BYTES = 500 * 1024 * 1024
MAX_UPLOAD_FILES = 500

_SCHEMA = """
CREATE TABLE IF NOT EXISTS datasets (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL UNIQUE,
    kind TEXT NOT NULL,
    state TEXT NOT NULL,
    error TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS images (
    dataset_id TEXT NOT NULL REFERENCES datasets(id),
    name TEXT NOT NULL,
    png16 BLOB NOT NULL,
    scale_applied REAL NOT NULL,
    extent INTEGER NOT NULL,
    warning TEXT,
    PRIMARY KEY (dataset_id, name)
);
CREATE TABLE IF NOT EXISTS pairs (
    dataset_id TEXT NOT NULL REFERENCES datasets(id),
    name1 TEXT NOT NULL,
    name2 TEXT NOT NULL,
    distance REAL NOT NULL,
    alignable INTEGER NOT NULL,
    rotation REAL,
    scale REAL,
    dx REAL,
    dy REAL,
    note TEXT NOT NULL DEFAULT 'Not evaluated',
    comment TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (dataset_id, name1, name2)
);
"""


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    name: str
    kind: str
    state: str
    coin_names: tuple[str, ...]
    created_at: str
    error: str | None = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class Evaluation:
    pair: tuple[str, str]
    note: Note
    comment: str


@dataclass(frozen=True)
class DatasetSummary:
    coins: int
    potential_links: int
    category_counts: dict[Note, int]


@dataclass(frozen=True)
class PairRecord:
    """One ranked pair with its review state, as served to clients."""

    name1: str
    name2: str
    distance: float
    alignable: bool
    transform: SimilarityTransform | None
    note: Note
    comment: str


def validate_upload(
    archive: bytes,
    *,
    max_total_bytes: int = MAX_UPLOAD_BYTES,
    max_files: int = MAX_UPLOAD_FILES,
) -> list[tuple[str, bytes]]:
    """Check an uploaded zip against the ingestion rules.

    Rules: readable zip, at most `max_files` entries, total uncompressed
    size at most `max_total_bytes`, and every entry decodes as an image.
    Any violation rejects the whole upload with the offending rule.
    """
    try:
        zf = zipfile.ZipFile(io.BytesIO(archive))
        infos = [i for i in zf.infolist() if not i.is_dir()]
    except zipfile.BadZipFile as exc:
        raise CorruptArchive(f"not a readable zip archive: {exc}") from exc

    if len(infos) > max_files:
        raise TooManyFiles(f"{len(infos)} files exceed the limit of {max_files}")
    declared = sum(i.file_size for i in infos)
    if declared > max_total_bytes:
        raise ArchiveTooLarge(f"{declared} uncompressed bytes exceed the limit of {max_total_bytes}")

    entries = []
    total = 0
    for info in infos:
        try:
            data = zf.read(info)
        except Exception as exc:
            raise CorruptArchive(f"cannot read entry {info.filename}: {exc}") from exc
        total += len(data)
        if total > max_total_bytes:
            raise ArchiveTooLarge(f"uncompressed payload exceeds the limit of {max_total_bytes}")
        try:
            load_image(data)
        except DecodeError:
            raise NonImageEntry(info.filename) from None
        entries.append((info.filename, data))
    return entries


def _encode_png16(pixels: np.ndarray) -> bytes:
    u16 = np.rint(pixels * 65535.0).astype(np.uint16)
    ok, buf = cv2.imencode(".png", u16)
    if not ok:
        raise RuntimeError("PNG encoding failed")
    return buf.tobytes()


def _decode_png16(blob: bytes) -> np.ndarray:
    arr = cv2.imdecode(np.frombuffer(blob, np.uint8), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise RuntimeError("stored image blob is unreadable")
    return arr.astype(np.float64) / 65535.0


class Store:
    """SQLite-backed store for datasets, scores and evaluations."""

    def __init__(self, path: str | Path):
        self._lock = threading.RLock()
        self._db = sqlite3.connect(str(path), check_same_thread=False)
        self._db.execute("PRAGMA foreign_keys = ON")
        with self._db:
            self._db.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._db.close()

    # --- dataset lifecycle ---

    def create_dataset(
        self, name: str, entries: list[tuple[str, bytes]], kind: str = "single-type"
    ) -> DatasetRecord:
        """Persist a validated upload in `computing` state.

        Images are normalized here so scoring and display work from one
        canonical raster. The caller is responsible for enqueueing the
        scoring job.
        """
        names = [n for n, _ in entries]
        if len(names) != len(set(names)):
            raise DuplicateFileNames("upload contains entries with identical file names")

        normalized = []
        for entry_name, data in entries:
            norm, warning = load_normalized(data, entry_name)
            normalized.append((norm, warning))

        dataset_id = uuid.uuid4().hex[:16]
        created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with self._lock:
            try:
                with self._db:
                    self._db.execute(
                        "INSERT INTO datasets (id, name, kind, state, created_at) VALUES (?, ?, ?, 'computing', ?)",
                        (dataset_id, name, kind, created_at),
                    )
                    self._db.executemany(
                        "INSERT INTO images (dataset_id, name, png16, scale_applied, extent, warning)"
                        " VALUES (?, ?, ?, ?, ?, ?)",
                        [
                            (
                                dataset_id,
                                norm.source_name,
                                _encode_png16(norm.image.pixels),
                                norm.scale_applied,
                                norm.extent,
                                warning,
                            )
                            for norm, warning in normalized
                        ],
                    )
            except sqlite3.IntegrityError as exc:
                raise DuplicateName(f"a dataset named {name!r} already exists") from exc
        return self.get_dataset(dataset_id)

    def complete_dataset(self, dataset_id: str, matrix: DistanceMatrix) -> DatasetRecord:
        """Transition computing -> computed and persist the score matrix.

        Every pair starts as Not evaluated with an empty comment.
        """
        with self._lock:
            record = self.get_dataset(dataset_id)
            if record.state != "computing":
                raise InvalidState(f"dataset is {record.state}, expected computing")
            if tuple(sorted(matrix.coin_names)) != record.coin_names:
                raise ValueError("matrix coins do not match the dataset's images")
            with self._db:
                self._db.executemany(
                    "INSERT INTO pairs (dataset_id, name1, name2, distance, alignable,"
                    " rotation, scale, dx, dy) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    [
                        (
                            dataset_id,
                            s.name1,
                            s.name2,
                            s.distance,
                            int(s.alignable),
                            s.transform.rotation if s.transform else None,
                            s.transform.scale if s.transform else None,
                            s.transform.translation[0] if s.transform else None,
                            s.transform.translation[1] if s.transform else None,
                        )
                        for s in matrix.scores
                    ],
                )
                self._db.execute(
                    "UPDATE datasets SET state = 'computed' WHERE id = ?", (dataset_id,)
                )
        return self.get_dataset(dataset_id)

    def fail_dataset(self, dataset_id: str, message: str) -> DatasetRecord:
        with self._lock:
            record = self.get_dataset(dataset_id)
            if record.state != "computing":
                raise InvalidState(f"dataset is {record.state}, expected computing")
            with self._db:
                self._db.execute(
                    "UPDATE datasets SET state = 'failed', error = ? WHERE id = ?",
                    (message, dataset_id),
                )
        return self.get_dataset(dataset_id)

    # --- reads ---

    def get_dataset(self, dataset_id: str) -> DatasetRecord:
        with self._lock:
            row = self._db.execute(
                "SELECT id, name, kind, state, error, created_at FROM datasets WHERE id = ?",
                (dataset_id,),
            ).fetchone()
            if row is None:
                raise UnknownDataset(f"no dataset with id {dataset_id!r}")
            images = self._db.execute(
                "SELECT name, warning FROM images WHERE dataset_id = ? ORDER BY name",
                (dataset_id,),
            ).fetchall()
        warnings = tuple(w for _, w in images if w)
        return DatasetRecord(
            id=row[0],
            name=row[1],
            kind=row[2],
            state=row[3],
            coin_names=tuple(n for n, _ in images),
            created_at=row[5],
            error=row[4],
            warnings=warnings,
        )

    def get_dataset_by_name(self, name: str) -> DatasetRecord:
        with self._lock:
            row = self._db.execute("SELECT id FROM datasets WHERE name = ?", (name,)).fetchone()
        if row is None:
            raise UnknownDataset(f"no dataset named {name!r}")
        return self.get_dataset(row[0])

    def list_datasets(self) -> list[DatasetRecord]:
        with self._lock:
            rows = self._db.execute("SELECT id FROM datasets ORDER BY name").fetchall()
        return [self.get_dataset(r[0]) for r in rows]

    def images(self, dataset_id: str) -> list[NormalizedImage]:
        """Reload the dataset's normalized images (for scoring or display)."""
        self.get_dataset(dataset_id)
        with self._lock:
            rows = self._db.execute(
                "SELECT name, png16, scale_applied, extent FROM images"
                " WHERE dataset_id = ? ORDER BY name",
                (dataset_id,),
            ).fetchall()
        return [
            NormalizedImage(GrayImage(_decode_png16(blob)), scale, name, extent)
            for name, blob, scale, extent in rows
        ]

    def image_display_png(self, dataset_id: str, name: str) -> bytes:
        """8-bit PNG of one normalized image, for browsers."""
        self.get_dataset(dataset_id)
        with self._lock:
            row = self._db.execute(
                "SELECT png16 FROM images WHERE dataset_id = ? AND name = ?",
                (dataset_id, name),
            ).fetchone()
        if row is None:
            raise UnknownPair(f"no image named {name!r}")
        pixels = _decode_png16(row[0])
        ok, buf = cv2.imencode(".png", np.rint(pixels * 255.0).astype(np.uint8))
        if not ok:
            raise RuntimeError("PNG encoding failed")
        return buf.tobytes()

    def _require_computed(self, dataset_id: str) -> DatasetRecord:
        record = self.get_dataset(dataset_id)
        if record.state != "computed":
            raise DatasetNotComputed(record.state)
        return record

    def ranked_pairs(self, dataset_id: str) -> list[PairRecord]:
        """All pairs by ascending distance, name pair as tie-break."""
        self._require_computed(dataset_id)
        with self._lock:
            rows = self._db.execute(
                "SELECT name1, name2, distance, alignable, rotation, scale, dx, dy,"
                " note, comment FROM pairs WHERE dataset_id = ?"
                " ORDER BY distance, name1, name2",
                (dataset_id,),
            ).fetchall()
        records = []
        for name1, name2, distance, alignable, rotation, scale, dx, dy, note, comment in rows:
            transform = None
            if rotation is not None:
                transform = SimilarityTransform(rotation, scale, (dx, dy))
            records.append(
                PairRecord(
                    name1, name2, distance, bool(alignable), transform,
                    Note.from_label(note), comment,
                )
            )
        return records

    def search_pairs(self, dataset_id: str, query: str) -> list[PairRecord]:
        """Ranked pairs whose file names contain `query` (case-insensitive)."""
        needle = query.lower()
        return [
            p
            for p in self.ranked_pairs(dataset_id)
            if needle in p.name1.lower() or needle in p.name2.lower()
        ]

    # --- evaluations ---

    def set_evaluation(
        self, dataset_id: str, pair: tuple[str, str], note: Note, comment: str = ""
    ) -> Evaluation:
        """Upsert the review of one pair; note and comment land atomically."""
        self._require_computed(dataset_id)
        name1, name2 = sorted(pair)
        with self._lock, self._db:
            cur = self._db.execute(
                "UPDATE pairs SET note = ?, comment = ?"
                " WHERE dataset_id = ? AND name1 = ? AND name2 = ?",
                (note.label, comment, dataset_id, name1, name2),
            )
            if cur.rowcount == 0:
                raise UnknownPair(f"no pair ({name1}, {name2}) in this dataset")
        return Evaluation((name1, name2), note, comment)

    def get_evaluation(self, dataset_id: str, pair: tuple[str, str]) -> Evaluation:
        self._require_computed(dataset_id)
        name1, name2 = sorted(pair)
        with self._lock:
            row = self._db.execute(
                "SELECT note, comment FROM pairs WHERE dataset_id = ? AND name1 = ? AND name2 = ?",
                (dataset_id, name1, name2),
            ).fetchone()
        if row is None:
            raise UnknownPair(f"no pair ({name1}, {name2}) in this dataset")
        return Evaluation((name1, name2), Note.from_label(row[0]), row[1])

    def summarize(self, dataset_id: str) -> DatasetSummary:
        """Coins, potential links and the per-category review counts."""
        record = self._require_computed(dataset_id)
        with self._lock:
            counted = dict(
                self._db.execute(
                    "SELECT note, COUNT(*) FROM pairs WHERE dataset_id = ? GROUP BY note",
                    (dataset_id,),
                ).fetchall()
            )
        n = len(record.coin_names)
        counts = {note: counted.get(note.label, 0) for note in Note}
        summary = DatasetSummary(n, n * (n - 1) // 2, counts)
        assert sum(counts.values()) == summary.potential_links
        return summary

    # --- export ---

    def export_csv(self, dataset_id: str) -> tuple[str, bytes]:
        """The notations file: (file name, CSV bytes) in ranked order."""
        record = self._require_computed(dataset_id)
        rows = [
            notations.NotationRow(p.name1, p.name2, p.distance, p.note, p.comment)
            for p in self.ranked_pairs(dataset_id)
        ]
        return notations.export_filename(record.name), notations.write_rows(rows)
