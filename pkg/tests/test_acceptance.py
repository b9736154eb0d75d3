"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. The synthetic die-link benchmark and the 60-image runtime
check are the slow parts (a few minutes together on a desktop CPU).
"""

import subprocess
import sys
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from dielink.analytics import build_curve, cluster, embed_2d, rank_pairs
from dielink.imaging import load_normalized
from dielink.notations import Note, read_rows, write_rows
from dielink.registration import SimilarityTransform, estimate_transform
from dielink.scoring import pair_distance, score_dataset, ssim, uniform_window
from dielink.service import ServiceConfig, create_app
from dielink.synthetic import encode_png, make_die_set, same_die

from conftest import build_zip, normalized_coins, png_bytes
from test_analytics import matrix_from_values, procrustes_residual
from test_registration import make_correspondences
from test_scoring import brute_force_block_ssim


def report(line: str) -> None:
    print(f"\nACCEPTANCE PASS: {line}")


# --- criterion: pair cardinality and runtime -------------------------------

class TestPairCardinality:
    @pytest.mark.parametrize("n_dies,coins_per_die,n", [(1, 2, 2), (5, 1, 5), (17, 1, 17)])
    def test_small_sets_emit_all_pairs(self, n_dies, coins_per_die, n):
        images = normalized_coins(
            100 + n, n_dies=n_dies, coins_per_die=coins_per_die,
            canvas=200, radius_range=(60, 75),
        )
        assert len(images) == n
        matrix = score_dataset(images, seed=0)
        assert len(matrix.scores) == n * (n - 1) // 2
        if n == 17:
            assert len(matrix.scores) == 136
        report(f"cardinality N={n} -> {len(matrix.scores)} pairs")

    def test_sixty_images_at_400px_within_five_minutes(self):
        coins = make_die_set(7, n_dies=15, coins_per_die=4)
        images = [load_normalized(encode_png(img), name)[0] for name, img in sorted(coins.items())]
        assert len(images) == 60
        started = time.monotonic()
        matrix = score_dataset(images, seed=0)
        elapsed = time.monotonic() - started
        assert len(matrix.scores) == 1770
        assert elapsed < 300.0, f"scoring took {elapsed:.0f}s"
        report(f"cardinality N=60 -> 1770 pairs in {elapsed:.0f}s (< 300s)")


# --- criterion: self-distance ----------------------------------------------

class TestSelfDistance:
    def test_twenty_varied_images(self):
        import skimage.data

        images = []
        for name in ("camera", "coins", "moon", "text", "page", "brick", "grass", "gravel"):
            photo = getattr(skimage.data, name)()
            norm, _ = load_normalized(png_bytes(photo), f"{name}.png")
            images.append(norm)
        synthetic = make_die_set(55, n_dies=6, coins_per_die=2, radius_range=(120, 200))
        for coin_name, img in sorted(synthetic.items()):
            norm, _ = load_normalized(encode_png(img), coin_name)
            images.append(norm)
        assert len(images) == 20

        worst = 0.0
        for img in images:
            score = pair_distance(img, img, seed=0)
            assert score.alignable, img.source_name
            assert score.distance <= 0.01, f"{img.source_name}: {score.distance}"
            worst = max(worst, score.distance)
        report(f"self-distance <= 0.01 on 20 images (worst {worst:.5f})")


# --- criterion: registration recovery --------------------------------------

class TestRegistrationRecovery:
    def test_recovery_in_99_of_100_trials(self):
        successes = 0
        for trial in range(100):
            rng = np.random.default_rng(5000 + trial)
            true = SimilarityTransform(
                float(rng.uniform(np.deg2rad(-15), np.deg2rad(15))),
                float(rng.uniform(0.9, 1.1)),
                (float(rng.uniform(-20, 20)), float(rng.uniform(-20, 20))),
            )
            a, b, matches = make_correspondences(rng, 40, true, outlier_fraction=0.30)
            try:
                fit = estimate_transform(matches, a, b, seed=trial)
            except Exception:
                continue
            ok = (
                abs(np.rad2deg(fit.transform.rotation - true.rotation)) <= 1.0
                and abs(fit.transform.scale / true.scale - 1.0) <= 0.02
                and abs(fit.transform.translation[0] - true.translation[0]) <= 2.0
                and abs(fit.transform.translation[1] - true.translation[1]) <= 2.0
            )
            successes += ok
        assert successes >= 99, f"only {successes}/100 trials recovered"
        report(f"registration recovery {successes}/100 within +-1deg, +-2%, +-2px")


# --- criterion: SSIM oracle -------------------------------------------------

class TestSsimOracle:
    def test_brute_force_8x8_within_1e9(self):
        rng = np.random.default_rng(77)
        worst = 0.0
        for _ in range(50):
            a = rng.random((8, 8))
            b = rng.random((8, 8))
            mine = ssim(a, b, window=uniform_window(8), min_valid_frac=1.0)
            worst = max(worst, abs(mine - brute_force_block_ssim(a, b)))
        assert worst < 1e-9
        report(f"SSIM matches 8x8 brute force (worst diff {worst:.2e})")

    def test_self_ssim_is_exactly_one(self):
        rng = np.random.default_rng(78)
        for shape in ((8, 8), (40, 40), (31, 59)):
            x = rng.random(shape)
            if min(shape) >= 11:
                assert ssim(x, x) == 1.0
            assert ssim(x, x, window=uniform_window(8), min_valid_frac=1.0) == 1.0
        report("SSIM(x, x) == 1.0 exactly")


# --- criterion: synthetic die-link benchmark --------------------------------

def rank_auc(positive: np.ndarray, negative: np.ndarray) -> float:
    """Probability that a same-die pair ranks before a different-die pair."""
    from scipy.stats import rankdata

    ranks = rankdata(np.concatenate([positive, negative]))
    neg_ranks = ranks[len(positive):]
    return float(
        (neg_ranks.sum() - len(negative) * (len(negative) + 1) / 2)
        / (len(positive) * len(negative))
    )


class TestSyntheticBenchmark:
    def test_auc_knee_and_determinism(self):
        coins = make_die_set(42, n_dies=5, coins_per_die=4)
        images = [load_normalized(encode_png(img), name)[0] for name, img in sorted(coins.items())]
        matrix = score_dataset(images, seed=0)
        assert len(matrix.scores) == 190

        positive = np.array([s.distance for s in matrix.scores if same_die(s.name1, s.name2)])
        negative = np.array([s.distance for s in matrix.scores if not same_die(s.name1, s.name2)])
        assert len(positive) == 30

        auc = rank_auc(positive, negative)
        assert auc >= 0.95, f"AUC {auc}"

        curve = build_curve(rank_pairs(matrix))
        assert curve.knee_index is not None
        assert abs(curve.knee_index - 30) <= 5, f"knee at {curve.knee_index}"

        again = score_dataset(images, seed=0)
        assert [s.distance for s in matrix.scores] == [s.distance for s in again.scores]
        report(f"benchmark AUC={auc:.4f} (>=0.95), knee={curve.knee_index} (30+-5), deterministic")


# --- criterion: MDS exactness and planted clustering -------------------------

class TestMdsExactness:
    def test_planar_points_reproduced(self):
        rng = np.random.default_rng(9)
        # keep every pairwise distance inside the scoring range [0, 1]
        original = rng.uniform(0, 1, size=(12, 2)) * 0.6
        names = [f"c{i:02d}" for i in range(12)]
        values = {}
        for i in range(12):
            for j in range(i + 1, 12):
                values[(names[i], names[j])] = float(
                    np.linalg.norm(original[i] - original[j])
                )
        matrix = matrix_from_values(values)
        points = np.array([[p.x, p.y] for p in embed_2d(matrix)])
        residual = procrustes_residual(original, points)
        assert residual < 1e-6
        report(f"MDS Procrustes residual {residual:.2e} (< 1e-6)")

    def test_two_planted_groups_recovered_at_half_threshold(self):
        group = {f"c{i}": i // 5 for i in range(10)}
        values = {}
        names = sorted(group)
        for i in range(10):
            for j in range(i + 1, 10):
                a, b = names[i], names[j]
                values[(a, b)] = 0.1 if group[a] == group[b] else 0.9
        matrix = matrix_from_values(values)
        labels = {l.coin_name: l.cluster_id for l in cluster(matrix, 0.5)}
        assert labels == group
        report("clustering recovers the planted two-group partition at threshold 0.5")


# --- criterion: CSV contract --------------------------------------------------

class TestCsvContract:
    def test_export_schema_and_round_trip(self, tmp_path):
        from dielink.datastore import Store
        from dielink.scoring import DistanceMatrix, PairScore

        store = Store(tmp_path / "s.sqlite3")
        rng = np.random.default_rng(3)
        entries = [
            (f"r{i:02d}.png", png_bytes((rng.random((12, 12)) * 255).astype(np.uint8)))
            for i in range(4)
        ]
        record = store.create_dataset("R_1205", entries)
        names = sorted(record.coin_names)
        scores = tuple(
            PairScore(names[i], names[j], float(rng.uniform(0.05, 0.95)), True)
            for i in range(4)
            for j in range(i + 1, 4)
        )
        store.complete_dataset(record.id, DistanceMatrix(tuple(names), scores))

        for note, (n1, n2) in zip(Note, [(s.name1, s.name2) for s in scores]):
            store.set_evaluation(record.id, (n1, n2), note, f"note {note.label}")

        filename, payload = store.export_csv(record.id)
        assert filename == "notations_R_1205.csv"
        assert payload.decode().splitlines()[0] == "name1,name2,Distance,note,comment"

        rows = read_rows(payload)
        assert write_rows(rows) == payload
        assert {r.note for r in rows} == set(Note)
        store.close()
        report("CSV contract: name, header, byte-identical round-trip, six labels")


# --- criterion: upload validation and lifecycle -------------------------------

class TestUploadValidation:
    def test_rules_and_full_lifecycle(self, tmp_path, seventeen_coin_pngs):
        token = {"Authorization": "Bearer acc"}

        small = ServiceConfig(
            data_dir=tmp_path / "limited", token="acc",
            max_upload_files=5, max_upload_bytes=2000,
        )
        with TestClient(create_app(small)) as client:
            r = client.post(
                "/api/datasets",
                files={"archive": ("z.zip", build_zip(seventeen_coin_pngs[:6]), "application/zip")},
                data={"name": "too_many"},
                headers=token,
            )
            assert (r.status_code, r.json()["rule"]) == (400, "TOO_MANY_FILES")

            r = client.post(
                "/api/datasets",
                files={"archive": ("z.zip", build_zip(seventeen_coin_pngs[:2]), "application/zip")},
                data={"name": "too_big"},
                headers=token,
            )
            assert (r.status_code, r.json()["rule"]) == (400, "ARCHIVE_TOO_LARGE")

        cfg = ServiceConfig(data_dir=tmp_path / "main", token="acc", workers=4)
        with TestClient(create_app(cfg)) as client:
            r = client.post(
                "/api/datasets",
                files={
                    "archive": (
                        "z.zip",
                        build_zip(seventeen_coin_pngs[:2] + [("readme.txt", b"hello")]),
                        "application/zip",
                    )
                },
                data={"name": "mixed"},
                headers=token,
            )
            assert (r.status_code, r.json()["rule"]) == (400, "NON_IMAGE_ENTRY")

            r = client.post(
                "/api/datasets",
                files={"archive": ("R_1205.zip", build_zip(seventeen_coin_pngs), "application/zip")},
                data={"name": "R_1205"},
                headers=token,
            )
            assert r.status_code == 202
            ticket = r.json()
            assert ticket["state"] == "computing"

            deadline = time.monotonic() + 120
            state = "computing"
            while time.monotonic() < deadline and state == "computing":
                detail = client.get(f"/api/datasets/{ticket['id']}", headers=token).json()
                state = detail["ticket"]["state"]
                if state == "computing":
                    time.sleep(0.2)
            assert state == "computed", detail.get("error")

            sizes = []
            for offset in (0, 50, 100):
                page = client.get(
                    f"/api/datasets/{ticket['id']}/pairs",
                    params={"offset": offset, "limit": 50},
                    headers=token,
                ).json()
                assert page["total"] == 136
                sizes.append(len(page["entries"]))
            assert sizes == [50, 50, 36]
        report("upload rules enforced; 17-image zip computed and paginated 50/50/36")


# --- criterion: CLI determinism ------------------------------------------------

class TestCliDeterminism:
    def test_two_runs_same_seed_byte_identical(self, tmp_path):
        coins = make_die_set(12, n_dies=2, coins_per_die=2, canvas=240, radius_range=(75, 90))
        coin_dir = tmp_path / "coins"
        coin_dir.mkdir()
        for name, img in coins.items():
            (coin_dir / name).write_bytes(encode_png(img))

        payloads = []
        for run in range(2):
            out = tmp_path / f"run{run}.csv"
            proc = subprocess.run(
                [sys.executable, "-m", "dielink", "score", str(coin_dir),
                 "--out", str(out), "--seed", "11"],
                capture_output=True,
            )
            assert proc.returncode == 0, proc.stderr.decode()
            payloads.append(out.read_bytes())
        assert payloads[0] == payloads[1]
        report("CLI score is byte-identical across runs with a fixed seed")
