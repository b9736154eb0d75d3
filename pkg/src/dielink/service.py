"""HTTP facade for the review workflow.

Exposes the dataset lifecycle (upload, background scoring, state),
paginated ranked pairs with search, evaluations, the distance curve, the
2-D cluster view and the CSV export. Authentication is one static bearer
token from configuration.

Scoring runs on an in-process queue, one job at a time; while a dataset
is computing, every result endpoint answers 409 so partial rankings never
leak.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from email.parser import BytesParser
from pathlib import Path

from fastapi import Depends, FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analytics, datastore
from .errors import (
    DatasetNotComputed,
    DuplicateFileNames,
    DuplicateName,
    StoreError,
    UnknownDataset,
    UnknownPair,
    UploadRejected,
)
from .notations import Note
from .scoring import DistanceMatrix, PairScore, score_dataset

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 200


class _Unauthorized(Exception):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8030
    data_dir: Path = Path("./dielink-data")
    token: str = ""
    workers: int | None = None
    seed: int = 0
    max_upload_bytes: int = datastore.MAX_UPLOAD_BYTES
    max_upload_files: int = datastore.MAX_UPLOAD_FILES
    frontend_dir: Path | None = None

    @classmethod
    def from_env(cls, env=os.environ) -> "ServiceConfig":
        """Read DIELINK_* environment variables over the defaults."""
        cfg = cls()
        if env.get("DIELINK_HOST"):
            cfg = replace(cfg, host=env["DIELINK_HOST"])
        if env.get("DIELINK_PORT"):
            cfg = replace(cfg, port=int(env["DIELINK_PORT"]))
        if env.get("DIELINK_DATA_DIR"):
            cfg = replace(cfg, data_dir=Path(env["DIELINK_DATA_DIR"]))
        if env.get("DIELINK_TOKEN"):
            cfg = replace(cfg, token=env["DIELINK_TOKEN"])
        if env.get("DIELINK_WORKERS"):
            cfg = replace(cfg, workers=int(env["DIELINK_WORKERS"]))
        if env.get("DIELINK_SEED"):
            cfg = replace(cfg, seed=int(env["DIELINK_SEED"]))
        if env.get("DIELINK_MAX_UPLOAD_BYTES"):
            cfg = replace(cfg, max_upload_bytes=int(env["DIELINK_MAX_UPLOAD_BYTES"]))
        if env.get("DIELINK_MAX_UPLOAD_FILES"):
            cfg = replace(cfg, max_upload_files=int(env["DIELINK_MAX_UPLOAD_FILES"]))
        if env.get("DIELINK_FRONTEND_DIR"):
            cfg = replace(cfg, frontend_dir=Path(env["DIELINK_FRONTEND_DIR"]))
        return cfg

    @classmethod
    def from_file(cls, path: str | Path, env=os.environ) -> "ServiceConfig":
        """JSON config file layered over the environment."""
        cfg = cls.from_env(env)
        data = json.loads(Path(path).read_text())
        for key in ("host", "token"):
            if key in data:
                cfg = replace(cfg, **{key: str(data[key])})
        for key in ("port", "workers", "seed", "max_upload_bytes", "max_upload_files"):
            if key in data:
                cfg = replace(cfg, **{key: int(data[key])})
        if "data_dir" in data:
            cfg = replace(cfg, data_dir=Path(data["data_dir"]))
        if "frontend_dir" in data:
            cfg = replace(cfg, frontend_dir=Path(data["frontend_dir"]))
        return cfg


@dataclass
class _JobRegistry:
    """Progress of in-flight scoring jobs, published atomically."""

    progress: dict[str, tuple[int, int]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def update(self, dataset_id: str, scored: int, total: int) -> None:
        with self.lock:
            self.progress[dataset_id] = (scored, total)

    def get(self, dataset_id: str) -> tuple[int, int] | None:
        with self.lock:
            return self.progress.get(dataset_id)

    def clear(self, dataset_id: str) -> None:
        with self.lock:
            self.progress.pop(dataset_id, None)


class ScoringJobs:
    """One scoring job at a time; pairs fan out over a bounded pool."""

    def __init__(self, store: datastore.Store, workers: int | None, seed: int):
        self._store = store
        self._workers = workers
        self._seed = seed
        self._executor = ThreadPoolExecutor(max_workers=1)
        self._registry = _JobRegistry()

    def submit(self, dataset_id: str):
        return self._executor.submit(self._run, dataset_id)

    def _run(self, dataset_id: str) -> None:
        try:
            images = self._store.images(dataset_id)
            matrix = score_dataset(
                images,
                seed=self._seed,
                max_workers=self._workers,
                progress=lambda done, total: self._registry.update(dataset_id, done, total),
            )
            self._store.complete_dataset(dataset_id, matrix)
        except Exception as exc:
            try:
                self._store.fail_dataset(dataset_id, str(exc))
            except StoreError:
                pass
        finally:
            self._registry.clear(dataset_id)

    def ticket(self, record: datastore.DatasetRecord) -> dict:
        n = len(record.coin_names)
        total = n * (n - 1) // 2
        if record.state == "computed":
            scored = total
        else:
            scored = (self._registry.get(record.id) or (0, total))[0]
        return {
            "id": record.id,
            "name": record.name,
            "state": record.state,
            "progress": {"scored": scored, "total": total},
        }

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)


def _parse_multipart(content_type: str, body: bytes) -> dict[str, tuple[str | None, bytes]]:
    """Form fields of a multipart/form-data body: name -> (filename, data)."""
    header = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n".encode()
    message = BytesParser().parsebytes(header + body)
    if not message.is_multipart():
        return {}
    fields = {}
    for part in message.get_payload():
        name = part.get_param("name", header="content-disposition")
        if name is None:
            continue
        filename = part.get_param("filename", header="content-disposition")
        payload = part.get_payload(decode=True)
        fields[str(name)] = (filename, payload if payload is not None else b"")
    return fields


def _error(status: int, code: str, message: str, rule: str | None = None) -> JSONResponse:
    body: dict = {"code": code, "message": message}
    if rule is not None:
        body["rule"] = rule
    return JSONResponse(body, status_code=status)


def _transform_payload(t) -> dict | None:
    if t is None:
        return None
    return {
        "rotation": t.rotation,
        "scale": t.scale,
        "dx": t.translation[0],
        "dy": t.translation[1],
    }


def _summary_payload(summary: datastore.DatasetSummary) -> dict:
    return {
        "coins": summary.coins,
        "potential_links": summary.potential_links,
        "categories": {note.label: count for note, count in summary.category_counts.items()},
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    cfg = config or ServiceConfig.from_env()
    cfg.data_dir.mkdir(parents=True, exist_ok=True)
    store = datastore.Store(cfg.data_dir / "dielink.sqlite3")
    jobs = ScoringJobs(store, cfg.workers, cfg.seed)

    app = FastAPI(title="dielink", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.jobs = jobs
    app.state.config = cfg

    def require_auth(request: Request) -> None:
        if not cfg.token:
            return
        if request.headers.get("authorization") != f"Bearer {cfg.token}":
            raise _Unauthorized()

    @app.exception_handler(_Unauthorized)
    async def _unauthorized(request, exc):
        return _error(401, "UNAUTHORIZED", "missing or invalid bearer token")

    @app.exception_handler(UploadRejected)
    async def _upload_rejected(request, exc: UploadRejected):
        return _error(400, exc.rule, str(exc), rule=exc.rule)

    @app.exception_handler(DuplicateName)
    async def _duplicate_name(request, exc):
        return _error(409, "DUPLICATE_NAME", str(exc))

    @app.exception_handler(DuplicateFileNames)
    async def _duplicate_files(request, exc):
        return _error(400, "DUPLICATE_FILE_NAMES", str(exc))

    @app.exception_handler(UnknownDataset)
    async def _unknown_dataset(request, exc):
        return _error(404, "UNKNOWN_DATASET", str(exc))

    @app.exception_handler(UnknownPair)
    async def _unknown_pair(request, exc):
        return _error(404, "UNKNOWN_PAIR", str(exc))

    @app.exception_handler(DatasetNotComputed)
    async def _not_computed(request, exc: DatasetNotComputed):
        code = "COMPUTING" if exc.state == "computing" else "FAILED"
        return _error(409, code, str(exc))

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.post("/api/datasets", status_code=202)
    async def upload_dataset(request: Request, _=Depends(require_auth)):
        content_type = request.headers.get("content-type", "")
        if "multipart/form-data" not in content_type:
            return _error(400, "BAD_REQUEST", "expected a multipart/form-data body")
        fields = _parse_multipart(content_type, await request.body())
        if "name" not in fields or not fields["name"][1]:
            return _error(400, "MISSING_NAME", "a dataset name is required")
        if "archive" not in fields:
            return _error(400, "MISSING_ARCHIVE", "a zip archive is required")
        name = fields["name"][1].decode("utf-8").strip()
        archive = fields["archive"][1]

        entries = datastore.validate_upload(
            archive,
            max_total_bytes=cfg.max_upload_bytes,
            max_files=cfg.max_upload_files,
        )
        record = store.create_dataset(name, entries)
        jobs.submit(record.id)
        return jobs.ticket(record)

    @app.get("/api/datasets")
    async def list_datasets(_=Depends(require_auth)):
        single, treasures = [], []
        for record in store.list_datasets():
            item = {
                "id": record.id,
                "name": record.name,
                "state": record.state,
                "computing": record.state == "computing",
            }
            (treasures if record.kind == "treasure" else single).append(item)
        return {"single_type": single, "treasures": treasures}

    @app.get("/api/datasets/{dataset_id}")
    async def dataset_detail(dataset_id: str, _=Depends(require_auth)):
        record = store.get_dataset(dataset_id)
        summary = None
        if record.state == "computed":
            summary = _summary_payload(store.summarize(dataset_id))
        return {
            "ticket": jobs.ticket(record),
            "summary": summary,
            "kind": record.kind,
            "created_at": record.created_at,
            "error": record.error,
            "warnings": list(record.warnings),
        }

    @app.get("/api/datasets/{dataset_id}/pairs")
    async def pairs_page(
        dataset_id: str,
        offset: int = 0,
        limit: int = DEFAULT_PAGE_SIZE,
        query: str = "",
        _=Depends(require_auth),
    ):
        if offset < 0 or limit < 1 or limit > MAX_PAGE_SIZE:
            return _error(400, "INVALID_PAGE", f"offset >= 0 and 1 <= limit <= {MAX_PAGE_SIZE}")
        records = store.search_pairs(dataset_id, query) if query else store.ranked_pairs(dataset_id)
        page = records[offset : offset + limit]
        return {
            "total": len(records),
            "offset": offset,
            "limit": limit,
            "entries": [
                {
                    "name1": p.name1,
                    "name2": p.name2,
                    "distance": p.distance,
                    "alignable": p.alignable,
                    "note": p.note.label,
                    "comment": p.comment,
                    "transform": _transform_payload(p.transform),
                }
                for p in page
            ],
        }

    @app.put("/api/datasets/{dataset_id}/pairs/{name1}/{name2}")
    async def put_evaluation(
        dataset_id: str, name1: str, name2: str, request: Request, _=Depends(require_auth)
    ):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return _error(400, "BAD_REQUEST", "body must be JSON")
        try:
            note = Note.from_label(body.get("note", ""))
        except ValueError:
            return _error(400, "UNKNOWN_NOTE", f"note must be one of: {', '.join(n.label for n in Note)}")
        comment = str(body.get("comment", ""))
        evaluation = store.set_evaluation(dataset_id, (name1, name2), note, comment)
        return {
            "evaluation": {
                "name1": evaluation.pair[0],
                "name2": evaluation.pair[1],
                "note": evaluation.note.label,
                "comment": evaluation.comment,
            },
            "summary": _summary_payload(store.summarize(dataset_id)),
        }

    @app.get("/api/datasets/{dataset_id}/curve")
    async def curve(dataset_id: str, _=Depends(require_auth)):
        records = store.ranked_pairs(dataset_id)
        ranked = analytics.RankedPairs(tuple(_as_pair_score(p) for p in records))
        built = analytics.build_curve(ranked)
        return {"points": [[rank, value] for rank, value in built.points], "knee_index": built.knee_index}

    @app.get("/api/datasets/{dataset_id}/embedding")
    async def embedding(dataset_id: str, _=Depends(require_auth)):
        matrix = _matrix_from_store(store, dataset_id)
        points = analytics.embed_2d(matrix)
        return {"points": [{"name": p.coin_name, "x": p.x, "y": p.y} for p in points]}

    @app.get("/api/datasets/{dataset_id}/clusters")
    async def clusters(dataset_id: str, threshold: float = 0.5, _=Depends(require_auth)):
        if not 0.0 < threshold < 1.0:
            return _error(400, "INVALID_THRESHOLD", "threshold must lie strictly between 0 and 1")
        matrix = _matrix_from_store(store, dataset_id)
        labels = analytics.cluster(matrix, threshold)
        return {
            "provisional": True,
            "threshold": threshold,
            "labels": [{"name": l.coin_name, "cluster_id": l.cluster_id} for l in labels],
        }

    @app.get("/api/datasets/{dataset_id}/export")
    async def export(dataset_id: str, _=Depends(require_auth)):
        filename, payload = store.export_csv(dataset_id)
        return Response(
            content=payload,
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    @app.get("/api/datasets/{dataset_id}/images/{name}")
    async def image(dataset_id: str, name: str, _=Depends(require_auth)):
        return Response(content=store.image_display_png(dataset_id, name), media_type="image/png")

    if cfg.frontend_dir is not None and Path(cfg.frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(cfg.frontend_dir), html=True), name="frontend")

    return app


def _as_pair_score(p: datastore.PairRecord) -> PairScore:
    return PairScore(p.name1, p.name2, p.distance, p.alignable, p.transform)


def _matrix_from_store(store: datastore.Store, dataset_id: str) -> DistanceMatrix:
    record = store.get_dataset(dataset_id)
    scores = tuple(_as_pair_score(p) for p in store.ranked_pairs(dataset_id))
    ordered = tuple(sorted(scores, key=lambda s: (s.name1, s.name2)))
    return DistanceMatrix(record.coin_names, ordered)
