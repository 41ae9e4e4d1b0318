"""Stateless HTTP JSON service for dataset management and fold analysis.

State is limited to named datasets (persisted as CSV files under the
dataset directory, so a restarted process serves the same data) and live
incremental sessions (in-memory, single-writer, expired after an idle TTL).
Analysis responses are pure functions of the request: seeds come from the
client (default 0, never the clock) and bodies are canonical JSON, so the
same request yields byte-identical bytes across restarts.

Endpoints
---------
POST /datasets                    upload CSV (text/csv body + ?name=, or JSON
                                  {"name", "csv", "schema_hint"?})
GET  /datasets                    list dataset summaries
GET  /datasets/{name}/schema      column names and kinds
POST /analyze                     AnalysisRequest -> AnalysisResponse
POST /analyze/incremental/start   open a feeding session
POST /analyze/incremental/feed    append records (or generate synth records)
POST /analyze/incremental/snapshot  analyze the folds accumulated so far
POST /analyze/incremental/close   end a session
"""

from __future__ import annotations

import re
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response

from . import __version__
from .aggregate import AggregationSpec, aggregate
from .analysis import (AnalysisRequest, AnalysisResult, build_chart,
                       canonical_json, run_analysis)
from .dataset import Dataset, ingest_csv, ingest_csv_text
from .errors import IngestError, ValidationError
from .metrics import MetricSpec, run_metrics
from .partition import IncrementalPartitioner, PartitionConfig
from .synth import GeneratorSpec, generate

_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]{1,64}$")

DEFAULT_SESSION_TTL = 3600.0


class DatasetStore:
    """Disk-backed dataset registry: one CSV per dataset name, loaded
    lazily and cached.  Ingest is single-writer per name; reads are free."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, Dataset] = {}
        self._lock = threading.Lock()

    def _csv_path(self, name: str) -> Path:
        return self.directory / f"{name}.csv"

    def names(self) -> list[str]:
        disk = {p.stem for p in self.directory.glob("*.csv")}
        return sorted(disk | set(self._cache))

    def exists(self, name: str) -> bool:
        return name in self._cache or self._csv_path(name).exists()

    def add_text(self, name: str, csv_text: str, schema_hint: Optional[dict] = None) -> Dataset:
        if not _NAME_RE.match(name or ""):
            raise ValidationError("dataset name must match [A-Za-z0-9_.-]{1,64}")
        with self._lock:
            if self.exists(name):
                raise FileExistsError(name)
            ds = ingest_csv_text(csv_text, schema_hint=schema_hint, name=name)
            self._csv_path(name).write_text(csv_text, encoding="utf-8")
            if schema_hint:
                hint_path = self.directory / f"{name}.schema.json"
                hint_path.write_text(canonical_json(schema_hint).decode(), encoding="utf-8")
            self._cache[name] = ds
            return ds

    def get(self, name: str) -> Dataset:
        with self._lock:
            if name in self._cache:
                return self._cache[name]
            path = self._csv_path(name)
            if not path.exists():
                raise KeyError(name)
            hint_path = self.directory / f"{name}.schema.json"
            hint = None
            if hint_path.exists():
                import json
                hint = json.loads(hint_path.read_text(encoding="utf-8"))
            ds = ingest_csv(path, schema_hint=hint, name=name)
            self._cache[name] = ds
            return ds


class IncrementalSession:
    """One live feeding session: a growing dataset plus its fold assigner.

    Writers are serialized by the per-session lock; snapshots copy the fold
    membership so concurrent reads stay consistent.
    """

    def __init__(self, session_id: str, schema: list, request_parts: dict,
                 synth_spec: Optional[GeneratorSpec]):
        self.id = session_id
        self.lock = threading.Lock()
        self.dataset = Dataset(name=f"session-{session_id}", schema=schema, rows=[])
        self.metric: MetricSpec = request_parts["metric"]
        self.partition_config: PartitionConfig = request_parts["partition"]
        self.aggregation: AggregationSpec = request_parts["aggregation"]
        self.chart_kind: str = request_parts["chart_kind"]
        self.statistic = request_parts.get("statistic")
        self.partitioner = IncrementalPartitioner(self.partition_config)
        self.synth_spec = synth_spec
        self.closed = False
        self.last_used = time.monotonic()

    def feed_rows(self, rows: list) -> int:
        for row in rows:
            if len(row) != len(self.dataset.schema):
                raise ValidationError(
                    f"row has {len(row)} cells, schema has {len(self.dataset.schema)}")
            rid = len(self.dataset.rows)
            self.dataset.rows.append(list(row))
            self.partitioner.add(rid)
        return len(rows)

    def feed_generated(self, count: int) -> int:
        if self.synth_spec is None:
            raise ValidationError("session was started without a synth spec; feed rows instead")
        seen = len(self.dataset.rows)
        spec = GeneratorSpec.from_dict({**self.synth_spec.to_dict(),
                                        "size": seen + count})
        rows = generate(spec).rows[seen:]
        return self.feed_rows(rows)

    def snapshot_result(self) -> AnalysisResult:
        fold_set = self.partitioner.snapshot()
        fold_stats = run_metrics(fold_set, self.metric, self.dataset)
        measure = aggregate(
            fold_stats, self.aggregation, group_key=[],
            provenance={"partition": self.partition_config.to_dict(),
                        "metric": self.metric.to_dict()})
        warnings = []
        if not self.dataset.rows:
            warnings.append({"kind": "empty_folds",
                             "message": "snapshot before any record arrived; "
                                        "all folds are empty"})
        request = AnalysisRequest(
            dataset=self.dataset.name, metric=self.metric,
            partition=self.partition_config, chart_kind=self.chart_kind,
            aggregation=self.aggregation, statistic=self.statistic)
        points = []
        if self.chart_kind == "scatter_regression":
            xs = self.dataset.values(self.metric.x, range(len(self.dataset.rows)))
            ys = self.dataset.values(self.metric.y, range(len(self.dataset.rows)))
            points = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]
        chart = build_chart(request, [measure], points)
        # session identity stays out of the body so equal feeds from equal
        # seeds compare byte-identical across sessions
        chart.provenance["dataset"] = "incremental"
        undefined = sorted(n for n, v in measure.aggregates.items()
                           if v is None and n in measure.reasons
                           and measure.reasons[n] != "not aggregated; see per-fold values")
        if undefined:
            warnings.append({"kind": "undefined_statistics", "measure": measure.label,
                             "statistics": undefined,
                             "message": f"undefined aggregates {undefined}"})
        return AnalysisResult(chart=chart, measures=[measure], warnings=warnings)


def _json_response(payload, status_code: int = 200,
                   headers: Optional[dict] = None) -> Response:
    return Response(content=canonical_json(payload), status_code=status_code,
                    media_type="application/json", headers=headers)


def _error(status: int, message: str) -> Response:
    return _json_response({"error": message}, status_code=status)


def create_app(dataset_dir, session_ttl: float = DEFAULT_SESSION_TTL) -> FastAPI:
    app = FastAPI(title="irengine", version=__version__)
    # the browser client is served from its own origin in development
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    store = DatasetStore(Path(dataset_dir))
    sessions: dict[str, IncrementalSession] = {}
    sessions_lock = threading.Lock()

    def _expire_sessions() -> None:
        now = time.monotonic()
        with sessions_lock:
            for sid in [sid for sid, s in sessions.items()
                        if now - s.last_used > session_ttl]:
                del sessions[sid]

    def _get_session(sid) -> IncrementalSession:
        _expire_sessions()
        with sessions_lock:
            if sid not in sessions:
                raise KeyError(sid)
            session = sessions[sid]
        session.last_used = time.monotonic()
        return session

    @app.exception_handler(ValidationError)
    async def _on_validation(_req, exc):
        return _error(400, str(exc))

    @app.exception_handler(IngestError)
    async def _on_ingest(_req, exc):
        return _error(400, str(exc))

    @app.post("/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("text/csv"):
            name = request.query_params.get("name")
            csv_text = (await request.body()).decode("utf-8")
            hint = None
        else:
            body = await request.json()
            if not isinstance(body, dict) or "csv" not in body:
                return _error(400, "JSON upload needs {\"name\", \"csv\"}")
            name, csv_text, hint = body.get("name"), body["csv"], body.get("schema_hint")
        if not name:
            return _error(400, "dataset name is required (?name= or \"name\")")
        try:
            ds = store.add_text(name, csv_text, schema_hint=hint)
        except FileExistsError:
            return _error(409, f"dataset {name!r} already exists")
        return _json_response({"name": ds.name, "rows": ds.row_count,
                               "schema": ds.schema_dict()}, status_code=201)

    @app.get("/datasets")
    def list_datasets():
        out = []
        for name in store.names():
            ds = store.get(name)
            out.append({"name": name, "rows": ds.row_count,
                        "columns": len(ds.schema)})
        return _json_response({"datasets": out})

    @app.get("/datasets/{name}/schema")
    def dataset_schema(name: str):
        try:
            ds = store.get(name)
        except KeyError:
            return _error(404, f"no dataset named {name!r}")
        return _json_response({"name": name, "rows": ds.row_count,
                               "schema": ds.schema_dict()})

    @app.post("/analyze")
    async def analyze(request: Request):
        body = await request.json()
        req = AnalysisRequest.from_dict(body)
        try:
            dataset = store.get(req.dataset)
        except KeyError:
            return _error(404, f"no dataset named {req.dataset!r}")
        started = time.perf_counter()
        result = run_analysis(dataset, req)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        if result.all_undefined:
            return _json_response(
                {"error": "every measure is undefined",
                 "warnings": result.warnings},
                status_code=422)
        # timing lives in a header so the body stays a pure function of the
        # request
        return _json_response(result.to_dict(),
                              headers={"x-analysis-ms": f"{elapsed_ms:.3f}"})

    @app.post("/analyze/incremental/start")
    async def incremental_start(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            return _error(400, "start body must be an object")
        synth_spec = None
        if "synth" in body:
            synth_spec = GeneratorSpec.from_dict(body["synth"])
            schema = generate(GeneratorSpec.from_dict({**body["synth"], "size": 1})).schema
        elif "schema" in body:
            schema = [(c, k) for c, k in body["schema"]]
        else:
            return _error(400, "start needs \"schema\" or \"synth\"")
        for key in ("metric", "partition", "chart_kind"):
            if key not in body:
                return _error(400, f"start is missing {key!r}")
        metric = MetricSpec.from_dict(body["metric"])
        partition_config = PartitionConfig.from_dict(body["partition"])
        if partition_config.mode != "incremental":
            return _error(400, "incremental sessions need partition mode \"incremental\"")
        parts = {
            "metric": metric,
            "partition": partition_config,
            "aggregation": AggregationSpec.from_dict(body.get("aggregation"), metric),
            "chart_kind": body["chart_kind"],
            "statistic": body.get("statistic"),
        }
        sid = body.get("session_id") or uuid.uuid4().hex
        session = IncrementalSession(sid, schema, parts, synth_spec)
        # validates columns against the session schema before any feed
        metric.validate(session.dataset)
        _expire_sessions()
        with sessions_lock:
            if sid in sessions:
                return _error(409, f"session {sid!r} already exists")
            sessions[sid] = session
        return _json_response({"session": sid}, status_code=201)

    @app.post("/analyze/incremental/feed")
    async def incremental_feed(request: Request):
        body = await request.json()
        try:
            session = _get_session(body.get("session"))
        except KeyError:
            return _error(404, f"no session {body.get('session')!r}")
        with session.lock:
            if session.closed:
                return _error(409, f"session {session.id!r} is closed")
            if "rows" in body:
                added = session.feed_rows(body["rows"])
            elif "count" in body:
                added = session.feed_generated(int(body["count"]))
            else:
                return _error(400, "feed needs \"rows\" or \"count\"")
            total = len(session.dataset.rows)
        return _json_response({"session": session.id, "added": added, "total": total})

    @app.post("/analyze/incremental/snapshot")
    async def incremental_snapshot(request: Request):
        body = await request.json()
        try:
            session = _get_session(body.get("session"))
        except KeyError:
            return _error(404, f"no session {body.get('session')!r}")
        with session.lock:
            result = session.snapshot_result()
        return _json_response(result.to_dict())

    @app.post("/analyze/incremental/close")
    async def incremental_close(request: Request):
        body = await request.json()
        try:
            session = _get_session(body.get("session"))
        except KeyError:
            return _error(404, f"no session {body.get('session')!r}")
        with session.lock:
            session.closed = True
        return _json_response({"session": session.id, "closed": True})

    @app.get("/healthz")
    def health():
        return _json_response({"status": "ok", "version": __version__})

    app.state.store = store
    return app
