import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dielink.cli import main
from dielink.notations import read_rows
from dielink.synthetic import encode_png, make_die_set

from conftest import png_bytes


@pytest.fixture(scope="module")
def coin_dir(tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("coins")
    coins = make_die_set(31, n_dies=2, coins_per_die=2, canvas=240, radius_range=(75, 90))
    for name, img in coins.items():
        (directory / name).write_bytes(encode_png(img))
    return directory


@pytest.fixture(scope="module")
def scored_csv(coin_dir, tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("out") / "scores.csv"
    assert main(["score", str(coin_dir), "--out", str(out), "--seed", "0"]) == 0
    return out


class TestScore:
    def test_writes_ranked_csv(self, scored_csv, capsys):
        rows = read_rows(scored_csv.read_bytes())
        assert len(rows) == 6
        assert [r.distance for r in rows] == sorted(r.distance for r in rows)
        assert all(r.note.label == "Not evaluated" for r in rows)

    def test_prints_pair_count_and_extremes(self, coin_dir, tmp_path, capsys):
        out = tmp_path / "x.csv"
        assert main(["score", str(coin_dir), "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "6 pairs" in printed
        assert "min=" in printed and "max=" in printed

    def test_default_output_name_uses_directory(self, coin_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["score", str(coin_dir)]) == 0
        assert (tmp_path / f"notations_{coin_dir.name}.csv").exists()

    def test_out_directory_gets_default_name(self, coin_dir, tmp_path):
        assert main(["score", str(coin_dir), "--out", str(tmp_path)]) == 0
        assert (tmp_path / f"notations_{coin_dir.name}.csv").exists()

    def test_single_image_exits_2(self, tmp_path, capsys):
        only = tmp_path / "one"
        only.mkdir()
        (only / "a.png").write_bytes(png_bytes(np.zeros((10, 10), np.uint8)))
        assert main(["score", str(only), "--out", str(tmp_path / "o.csv")]) == 2

    def test_missing_directory_exits_2(self, tmp_path):
        assert main(["score", str(tmp_path / "nowhere")]) == 2

    def test_undecodable_file_exits_3_and_lists_it(self, coin_dir, tmp_path, capsys):
        import shutil

        broken = tmp_path / "broken"
        shutil.copytree(coin_dir, broken)
        (broken / "notes.txt").write_text("not an image")
        assert main(["score", str(broken), "--out", str(tmp_path / "o.csv")]) == 3
        assert "notes.txt" in capsys.readouterr().err

    def test_same_seed_twice_is_byte_identical(self, coin_dir, tmp_path):
        outs = []
        for run in range(2):
            out = tmp_path / f"run{run}.csv"
            code = subprocess.run(
                [sys.executable, "-m", "dielink", "score", str(coin_dir),
                 "--out", str(out), "--seed", "7", "--jobs", "2"],
                capture_output=True,
            ).returncode
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_different_seeds_may_differ_but_stay_valid(self, coin_dir, tmp_path):
        out = tmp_path / "seeded.csv"
        assert main(["score", str(coin_dir), "--out", str(out), "--seed", "3"]) == 0
        rows = read_rows(out.read_bytes())
        assert all(0.0 <= r.distance <= 1.0 for r in rows)


class TestCurve:
    def test_points_file_and_knee_printed(self, scored_csv, tmp_path, capsys):
        out = tmp_path / "curve.txt"
        assert main(["curve", str(scored_csv), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "rank,distance"
        assert len(lines) == 7
        assert "knee rank:" in capsys.readouterr().out

    def test_three_pair_curve(self, tmp_path):
        csv_path = tmp_path / "three.csv"
        csv_path.write_bytes(
            b"name1,name2,Distance,note,comment\n"
            b"a,b,0.100000,Not evaluated,\n"
            b"a,c,0.500000,Not evaluated,\n"
            b"b,c,0.900000,Not evaluated,\n"
        )
        out = tmp_path / "c.txt"
        assert main(["curve", str(csv_path), "--out", str(out)]) == 0
        assert out.read_text().splitlines()[1:] == ["1,0.100000", "2,0.500000", "3,0.900000"]

    def test_malformed_csv_exits_4_with_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_bytes(b"name1,name2,Distance,note,comment\na,b,oops,Linked,\n")
        assert main(["curve", str(bad), "--out", str(tmp_path / "o.txt")]) == 4
        assert "line 2" in capsys.readouterr().err

    def test_incomplete_matrix_exits_4(self, tmp_path, capsys):
        partial = tmp_path / "partial.csv"
        partial.write_bytes(
            b"name1,name2,Distance,note,comment\n"
            b"a,b,0.100000,Not evaluated,\n"
            b"a,c,0.500000,Not evaluated,\n"
        )
        assert main(["curve", str(partial), "--out", str(tmp_path / "o.txt")]) == 4


class TestEmbed:
    def test_coordinates_written(self, scored_csv, tmp_path):
        out = tmp_path / "coords.txt"
        assert main(["embed", str(scored_csv), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "name,x,y"
        assert len(lines) == 5

    def test_empty_csv_needs_two_coins(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_bytes(b"name1,name2,Distance,note,comment\n")
        assert main(["embed", str(empty), "--out", str(tmp_path / "o.txt")]) == 2
        assert "at least 2 coins" in capsys.readouterr().err


class TestCluster:
    def test_zero_threshold_gives_singletons(self, scored_csv, capsys):
        assert main(["cluster", str(scored_csv), "--threshold", "0"]) == 0
        lines = capsys.readouterr().out.splitlines()
        ids = [line.split(",")[1] for line in lines[1:] if "," in line]
        assert len(set(ids)) == 4

    def test_high_threshold_merges_everything(self, scored_csv, tmp_path):
        out = tmp_path / "labels.txt"
        assert main(["cluster", str(scored_csv), "--threshold", "1", "--out", str(out)]) == 0
        ids = {line.split(",")[1] for line in out.read_text().splitlines()[1:]}
        assert ids == {"0"}

    def test_mid_threshold_recovers_the_two_dies(self, scored_csv, capsys):
        assert main(["cluster", str(scored_csv), "--threshold", "0.45"]) == 0
        lines = capsys.readouterr().out.splitlines()[1:]
        by_die = {}
        for line in lines:
            name, cid = line.split(",")
            by_die.setdefault(name.split("_coin")[0], set()).add(cid)
        assert all(len(ids) == 1 for ids in by_die.values())
        assert len({next(iter(v)) for v in by_die.values()}) == 2

    def test_invalid_threshold(self, scored_csv, capsys):
        assert main(["cluster", str(scored_csv), "--threshold", "1.2"]) == 4


def free_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


class TestServe:
    def test_health_answers_then_port_conflict_exits_1(self, tmp_path):
        import json
        import urllib.request

        port = free_port()
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"host": "127.0.0.1", "port": port, "data_dir": str(tmp_path / "data")})
        )
        proc = subprocess.Popen(
            [sys.executable, "-m", "dielink", "serve", "--config", str(config)],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        try:
            deadline = time.monotonic() + 30
            status = None
            while time.monotonic() < deadline:
                try:
                    with urllib.request.urlopen(
                        f"http://127.0.0.1:{port}/api/health", timeout=1
                    ) as resp:
                        status = json.loads(resp.read())
                        break
                except Exception:
                    time.sleep(0.2)
            assert status == {"status": "ok"}
            assert (tmp_path / "data").is_dir()

            conflict = subprocess.run(
                [sys.executable, "-m", "dielink", "serve", "--config", str(config)],
                capture_output=True,
                timeout=30,
            )
            assert conflict.returncode == 1
            assert b"cannot bind" in conflict.stderr
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    def test_missing_data_dir_parent_exits_1(self, tmp_path, capsys):
        import json

        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"port": free_port(), "data_dir": str(tmp_path / "no" / "such" / "dir")})
        )
        assert main(["serve", "--config", str(config)]) == 1
        assert "does not exist" in capsys.readouterr().err

    def test_bad_config_exits_1(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text("{ not json")
        assert main(["serve", "--config", str(config)]) == 1
