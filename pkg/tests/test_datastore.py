import io
import zipfile

import numpy as np
import pytest

from dielink.datastore import Store, validate_upload
from dielink.errors import (
    ArchiveTooLarge,
    CorruptArchive,
    DatasetNotComputed,
    DuplicateFileNames,
    DuplicateName,
    InvalidState,
    NonImageEntry,
    TooManyFiles,
    UnknownDataset,
    UnknownPair,
)
from dielink.notations import Note, read_rows
from dielink.scoring import DistanceMatrix, PairScore

from conftest import build_zip, png_bytes


def tiny_png(value: int) -> bytes:
    rng = np.random.default_rng(value)
    return png_bytes((rng.random((12, 12)) * 255).astype(np.uint8))


def tiny_entries(n: int) -> list[tuple[str, bytes]]:
    return [(f"coin{i:03d}.png", tiny_png(i)) for i in range(n)]


def fabricated_matrix(names: list[str], seed: int = 0) -> DistanceMatrix:
    rng = np.random.default_rng(seed)
    ordered = sorted(names)
    scores = tuple(
        PairScore(ordered[i], ordered[j], float(rng.uniform(0.05, 0.95)), True)
        for i in range(len(ordered))
        for j in range(i + 1, len(ordered))
    )
    return DistanceMatrix(tuple(ordered), scores)


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "test.sqlite3")
    yield s
    s.close()


def computed_dataset(store, n=5, name="hoard_a"):
    record = store.create_dataset(name, tiny_entries(n))
    matrix = fabricated_matrix(list(record.coin_names))
    return store.complete_dataset(record.id, matrix), matrix


class TestValidateUpload:
    def test_accepts_17_valid_jpegs(self):
        from PIL import Image

        entries = []
        for i in range(17):
            buf = io.BytesIO()
            rng = np.random.default_rng(i)
            Image.fromarray((rng.random((16, 16)) * 255).astype(np.uint8)).save(buf, format="JPEG")
            entries.append((f"r{i:02d}.jpg", buf.getvalue()))
        result = validate_upload(build_zip(entries))
        assert len(result) == 17
        assert result[0][0] == "r00.jpg"

    def test_501_files_is_too_many(self):
        data = tiny_png(0)
        archive = build_zip([(f"c{i:03d}.png", data) for i in range(501)])
        with pytest.raises(TooManyFiles):
            validate_upload(archive)

    def test_500_files_is_allowed(self):
        data = tiny_png(0)
        archive = build_zip([(f"c{i:03d}.png", data) for i in range(500)])
        assert len(validate_upload(archive)) == 500

    def test_text_entry_is_rejected_by_name(self):
        archive = build_zip([("ok.png", tiny_png(1)), ("notes.txt", b"field notes")])
        with pytest.raises(NonImageEntry) as err:
            validate_upload(archive)
        assert err.value.name == "notes.txt"

    def test_oversize_payload_rejected(self):
        archive = build_zip([("a.png", tiny_png(2)), ("b.png", tiny_png(3))])
        with pytest.raises(ArchiveTooLarge):
            validate_upload(archive, max_total_bytes=100)

    def test_corrupt_archive(self):
        with pytest.raises(CorruptArchive):
            validate_upload(b"definitely not a zip")

    def test_directory_entries_are_ignored(self):
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            zf.writestr("photos/", "")
            zf.writestr("photos/a.png", tiny_png(4))
        assert [n for n, _ in validate_upload(buf.getvalue())] == ["photos/a.png"]


class TestDatasetLifecycle:
    def test_create_starts_computing(self, store):
        record = store.create_dataset("R_1205", tiny_entries(3))
        assert record.state == "computing"
        assert record.coin_names == ("coin000.png", "coin001.png", "coin002.png")
        assert store.get_dataset_by_name("R_1205").id == record.id

    def test_duplicate_dataset_name(self, store):
        store.create_dataset("R_1205", tiny_entries(2))
        with pytest.raises(DuplicateName):
            store.create_dataset("R_1205", tiny_entries(2))

    def test_duplicate_file_names(self, store):
        entries = [("a.jpg", tiny_png(0)), ("a.jpg", tiny_png(1))]
        with pytest.raises(DuplicateFileNames):
            store.create_dataset("dup", entries)

    def test_complete_persists_pairs(self, store):
        record, matrix = computed_dataset(store, n=17)
        assert record.state == "computed"
        assert len(store.ranked_pairs(record.id)) == 136

    def test_complete_twice_is_invalid(self, store):
        record, matrix = computed_dataset(store)
        with pytest.raises(InvalidState):
            store.complete_dataset(record.id, matrix)

    def test_failure_path_stores_message(self, store):
        record = store.create_dataset("bad", tiny_entries(2))
        failed = store.fail_dataset(record.id, "scoring exploded")
        assert failed.state == "failed"
        assert failed.error == "scoring exploded"
        with pytest.raises(DatasetNotComputed):
            store.ranked_pairs(record.id)

    def test_unknown_dataset(self, store):
        with pytest.raises(UnknownDataset):
            store.get_dataset("nope")

    def test_images_round_trip(self, store):
        record = store.create_dataset("imgs", tiny_entries(2))
        images = store.images(record.id)
        assert [im.source_name for im in images] == ["coin000.png", "coin001.png"]
        assert images[0].image.pixels.shape == (12, 12)

    def test_mismatched_matrix_is_rejected(self, store):
        record = store.create_dataset("strict", tiny_entries(3))
        with pytest.raises(ValueError):
            store.complete_dataset(record.id, fabricated_matrix(["x.png", "y.png"]))


class TestEvaluations:
    def test_set_updates_counts(self, store):
        record, _ = computed_dataset(store)
        pair = ("coin000.png", "coin001.png")
        before = store.summarize(record.id)
        store.set_evaluation(record.id, pair, Note.LINKED, "die match")
        after = store.summarize(record.id)
        assert after.category_counts[Note.LINKED] == before.category_counts[Note.LINKED] + 1
        assert (
            after.category_counts[Note.NOT_EVALUATED]
            == before.category_counts[Note.NOT_EVALUATED] - 1
        )

    def test_reversed_pair_hits_same_record(self, store):
        record, _ = computed_dataset(store)
        store.set_evaluation(record.id, ("coin001.png", "coin000.png"), Note.PROBABLY_LINKED)
        ev = store.get_evaluation(record.id, ("coin000.png", "coin001.png"))
        assert ev.note is Note.PROBABLY_LINKED

    def test_unknown_pair(self, store):
        record, _ = computed_dataset(store)
        with pytest.raises(UnknownPair):
            store.set_evaluation(record.id, ("coin000.png", "ghost.png"), Note.LINKED)

    def test_not_computed_dataset_rejects_evaluation(self, store):
        record = store.create_dataset("pending", tiny_entries(2))
        with pytest.raises(DatasetNotComputed):
            store.set_evaluation(record.id, ("coin000.png", "coin001.png"), Note.LINKED)

    def test_upsert_keeps_one_evaluation_per_pair(self, store):
        record, _ = computed_dataset(store)
        pair = ("coin000.png", "coin001.png")
        store.set_evaluation(record.id, pair, Note.LINKED, "first")
        store.set_evaluation(record.id, pair, Note.NOT_LINKED, "second")
        ev = store.get_evaluation(record.id, pair)
        assert ev.note is Note.NOT_LINKED
        assert ev.comment == "second"
        assert store.summarize(record.id).category_counts[Note.LINKED] == 0

    def test_failed_update_leaves_state_unchanged(self, store):
        record, _ = computed_dataset(store)
        store.set_evaluation(record.id, ("coin000.png", "coin001.png"), Note.LINKED, "keep me")
        before = store.summarize(record.id)
        with pytest.raises(UnknownPair):
            store.set_evaluation(record.id, ("coin000.png", "ghost.png"), Note.NOT_LINKED, "boom")
        assert store.summarize(record.id) == before
        assert store.get_evaluation(record.id, ("coin000.png", "coin001.png")).comment == "keep me"

    def test_conservation_over_random_sequences(self, store):
        record, matrix = computed_dataset(store, n=6)
        rng = np.random.default_rng(42)
        pairs = [(s.name1, s.name2) for s in matrix.scores]
        notes = list(Note)
        for _ in range(40):
            pair = pairs[rng.integers(0, len(pairs))]
            store.set_evaluation(record.id, pair, notes[rng.integers(0, 6)])
            summary = store.summarize(record.id)
            assert sum(summary.category_counts.values()) == summary.potential_links


class TestSummary:
    def test_fresh_17_coin_dataset(self, store):
        record, _ = computed_dataset(store, n=17, name="seventeen")
        summary = store.summarize(record.id)
        assert summary.coins == 17
        assert summary.potential_links == 136
        assert summary.category_counts[Note.NOT_EVALUATED] == 136

    def test_two_coins_have_one_link(self, store):
        record, _ = computed_dataset(store, n=2, name="two")
        assert store.summarize(record.id).potential_links == 1

    def test_sum_is_invariant_after_notes(self, store):
        record, matrix = computed_dataset(store)
        for s in list(matrix.scores)[:3]:
            store.set_evaluation(record.id, (s.name1, s.name2), Note.DONT_KNOW)
        summary = store.summarize(record.id)
        assert sum(summary.category_counts.values()) == summary.potential_links


class TestRankingAndSearch:
    def test_ranked_pairs_ascend(self, store):
        record, _ = computed_dataset(store, n=7)
        ranked = store.ranked_pairs(record.id)
        distances = [p.distance for p in ranked]
        assert distances == sorted(distances)

    def test_all_pairs_canonical(self, store):
        record, _ = computed_dataset(store, n=7)
        assert all(p.name1 < p.name2 for p in store.ranked_pairs(record.id))

    def test_empty_query_returns_all(self, store):
        record, _ = computed_dataset(store)
        assert len(store.search_pairs(record.id, "")) == len(store.ranked_pairs(record.id))

    def test_query_filters_by_either_name(self, store):
        record, _ = computed_dataset(store)
        hits = store.search_pairs(record.id, "coin002")
        assert hits
        assert all("coin002" in p.name1 or "coin002" in p.name2 for p in hits)

    def test_query_is_case_insensitive(self, store):
        record, _ = computed_dataset(store)
        assert store.search_pairs(record.id, "COIN002") == store.search_pairs(record.id, "coin002")

    def test_no_match_is_empty(self, store):
        record, _ = computed_dataset(store)
        assert store.search_pairs(record.id, "zzz") == []

    def test_search_preserves_rank_order(self, store):
        record, _ = computed_dataset(store)
        sub = store.search_pairs(record.id, "coin000")
        distances = [p.distance for p in sub]
        assert distances == sorted(distances)


class TestExport:
    def test_export_name_follows_dataset_name(self, store):
        record, _ = computed_dataset(store, name="R_1205")
        filename, _ = store.export_csv(record.id)
        assert filename == "notations_R_1205.csv"

    def test_rows_are_ranked_and_complete(self, store):
        record, matrix = computed_dataset(store, n=6)
        _, payload = store.export_csv(record.id)
        rows = read_rows(payload)
        assert len(rows) == 15
        assert [r.distance for r in rows] == sorted(r.distance for r in rows)

    def test_comments_and_notes_round_trip(self, store):
        record, matrix = computed_dataset(store)
        tricky = 'contains,a comma and "quotes"'
        s = matrix.scores[0]
        store.set_evaluation(record.id, (s.name1, s.name2), Note.PROBABLY_NOT_LINKED, tricky)
        _, payload = store.export_csv(record.id)
        rows = {(r.name1, r.name2): r for r in read_rows(payload)}
        row = rows[(s.name1, s.name2)]
        assert row.comment == tricky
        assert row.note is Note.PROBABLY_NOT_LINKED

    def test_export_import_export_is_byte_identical(self, store):
        from dielink.notations import write_rows

        record, _ = computed_dataset(store)
        _, first = store.export_csv(record.id)
        assert write_rows(read_rows(first)) == first

    def test_not_computed_rejects_export(self, store):
        record = store.create_dataset("early", tiny_entries(2))
        with pytest.raises(DatasetNotComputed):
            store.export_csv(record.id)
