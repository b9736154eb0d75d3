"""Offline pipeline driver.

    dielink score <image-dir> [--out PATH] [--seed N] [--jobs N]
    dielink curve <csv> --out <points-file>
    dielink embed <csv> --out <coords-file>
    dielink cluster <csv> --threshold T [--out FILE]
    dielink serve [--config FILE]

The notations CSV is the interchange format between subcommands and
matches the service export byte for byte, so offline and online runs can
be compared directly.
"""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path

from . import analytics, notations
from .errors import DatasetTooSmall, DecodeError, NotationsFormatError
from .imaging import load_normalized
from .notations import Note
from .scoring import DistanceMatrix, PairScore, score_dataset

EXIT_TOO_FEW_IMAGES = 2
EXIT_DECODE_FAILURES = 3
EXIT_BAD_CSV = 4


def _cmd_score(args) -> int:
    directory = Path(args.image_dir)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_TOO_FEW_IMAGES

    files = sorted(p for p in directory.iterdir() if p.is_file())
    images, failures = [], []
    for path in files:
        try:
            norm, warning = load_normalized(path.read_bytes(), path.name)
        except DecodeError as exc:
            failures.append((path.name, str(exc)))
            continue
        if warning:
            print(f"warning: {warning}", file=sys.stderr)
        images.append(norm)

    if failures:
        print("error: some files could not be decoded:", file=sys.stderr)
        for name, reason in failures:
            print(f"  {name}: {reason}", file=sys.stderr)
        return EXIT_DECODE_FAILURES
    if len(images) < 2:
        print(f"error: need at least 2 images, found {len(images)}", file=sys.stderr)
        return EXIT_TOO_FEW_IMAGES

    try:
        matrix = score_dataset(images, seed=args.seed, max_workers=args.jobs)
    except DatasetTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_FEW_IMAGES

    ranked = analytics.rank_pairs(matrix)
    rows = [
        notations.NotationRow(e.name1, e.name2, e.distance, Note.NOT_EVALUATED, "")
        for e in ranked.entries
    ]
    default_name = notations.export_filename(directory.resolve().name)
    if args.out is None:
        out_path = Path.cwd() / default_name
    else:
        out_path = Path(args.out)
        if out_path.is_dir():
            out_path = out_path / default_name
    out_path.write_bytes(notations.write_rows(rows))

    distances = [e.distance for e in ranked.entries]
    print(f"{len(distances)} pairs scored")
    print(f"distance min={min(distances):.6f} max={max(distances):.6f}")
    print(f"wrote {out_path}")
    return 0


def _read_matrix(csv_path: str) -> tuple[list[notations.NotationRow], DistanceMatrix]:
    rows = notations.read_rows(Path(csv_path).read_bytes())
    names = sorted({n for r in rows for n in (r.name1, r.name2)})
    n = len(names)
    if len(rows) != n * (n - 1) // 2:
        raise NotationsFormatError(
            1, f"incomplete pair matrix: {len(rows)} rows for {n} coins"
        )
    scores = tuple(
        sorted(
            (PairScore(*sorted((r.name1, r.name2)), r.distance, r.distance < 1.0) for r in rows),
            key=lambda s: (s.name1, s.name2),
        )
    )
    return rows, DistanceMatrix(tuple(names), scores)


def _cmd_curve(args) -> int:
    try:
        _, matrix = _read_matrix(args.csv)
    except NotationsFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CSV
    curve = analytics.build_curve(analytics.rank_pairs(matrix))
    lines = ["rank,distance"]
    lines += [f"{rank},{value:.6f}" for rank, value in curve.points]
    Path(args.out).write_text("\n".join(lines) + "\n")
    if curve.knee_index is None:
        print("knee rank: none")
    else:
        print(f"knee rank: {curve.knee_index}")
    print(f"wrote {args.out}")
    return 0


def _cmd_embed(args) -> int:
    try:
        _, matrix = _read_matrix(args.csv)
    except NotationsFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CSV
    if len(matrix.coin_names) < 2:
        print("error: embedding needs at least 2 coins", file=sys.stderr)
        return EXIT_TOO_FEW_IMAGES
    points = analytics.embed_2d(matrix)
    lines = ["name,x,y"]
    lines += [f"{p.coin_name},{p.x:.6f},{p.y:.6f}" for p in points]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def _cmd_cluster(args) -> int:
    if not 0.0 <= args.threshold <= 1.0:
        print("error: --threshold must lie in [0, 1]", file=sys.stderr)
        return EXIT_BAD_CSV
    try:
        _, matrix = _read_matrix(args.csv)
    except NotationsFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CSV
    labels = analytics.cluster(matrix, args.threshold)
    lines = ["name,cluster_id"]
    lines += [f"{l.coin_name},{l.cluster_id}" for l in labels]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_serve(args) -> int:
    from .service import ServiceConfig, create_app

    try:
        if args.config:
            cfg = ServiceConfig.from_file(args.config)
        else:
            cfg = ServiceConfig.from_env()
    except Exception as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 1

    data_dir = Path(cfg.data_dir)
    if not data_dir.exists():
        if not data_dir.parent.exists():
            print(f"error: parent of data dir {data_dir} does not exist", file=sys.stderr)
            return 1
        data_dir.mkdir()

    # fail fast on an unusable bind address instead of letting the server loop die
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((cfg.host, cfg.port))
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {cfg.host}:{cfg.port}: {exc}", file=sys.stderr)
        return 1

    import uvicorn

    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dielink",
        description="Score coin photographs for die links and work with the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every pair of images in a directory")
    p.add_argument("image_dir", help="directory of same-type coin photographs")
    p.add_argument("--out", help="output CSV path (default: ./notations_<dirname>.csv)")
    p.add_argument("--seed", type=int, default=0, help="seed for reproducible scoring")
    p.add_argument("--jobs", type=int, default=None, help="worker count (default: cores)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("curve", help="ascending distance curve from a notations CSV")
    p.add_argument("csv", help="notations CSV from score or the service export")
    p.add_argument("--out", required=True, help="output points file (rank,distance)")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("embed", help="2-D embedding of the distance matrix")
    p.add_argument("csv")
    p.add_argument("--out", required=True, help="output coordinates file (name,x,y)")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("cluster", help="provisional single-linkage clusters")
    p.add_argument("csv")
    p.add_argument("--threshold", type=float, required=True, help="link threshold in [0, 1]")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--config", help="JSON config file (host, port, data_dir, token, workers)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
