"""HTTP/JSON API steering clustering sessions, versioned under /v1.

The service is a thin transport over the session module: graph in, one
synchronous step per request, metrics out.  Per-session mutations are
serialized by a lock; distinct sessions are fully concurrent.  Errors come
back as a structured {"error": {"code", "message"}} body.

Environment: LAPINC_PORT picks the serve port (CLI), LAPINC_DATA_DIR is the
directory that ``edge_list_path`` uploads are resolved against.
"""

from __future__ import annotations

import os
import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .eigensolve import ConvergenceError, SolverConfig, basis_to_json
from .graph import Graph, GraphFormatError, LaplacianKind, generate_erdos_renyi, load_edge_list
from .session import (
    SessionError,
    SessionConfig,
    SessionState,
    SessionStatus,
    create_session,
    export_labels_csv,
    export_metrics_csv,
    export_metrics_json,
    step,
    stop,
)

__all__ = ["create_app", "ApiError"]

DEFAULT_MAX_INLINE_EDGES = 200_000


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: Any = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details


class GeneratorSpec(BaseModel):
    n: int
    p: float
    seed: int = 0


class ConfigSpec(BaseModel):
    kind: str = "unnormalized"
    tol: float = 1e-10
    max_iters: int | None = None
    seed: int = 0
    method: str = "auto"
    metrics_on: str = "w"
    kmeans_seed: int = 0
    kmeans_restarts: int = 10
    normalize_rows: bool = False
    k_max: int | None = None


class SessionCreateRequest(BaseModel):
    edges: list[list[float]] | None = None
    edge_list_text: str | None = None
    edge_list_path: str | None = None
    generator: GeneratorSpec | None = None
    config: ConfigSpec = Field(default_factory=ConfigSpec)


class MetricsModel(BaseModel):
    K: int
    modularity: float
    scaled_nc: float
    scaled_median_size: float
    scaled_max_size: float
    scaled_spectrum_energy: float


class StepResponse(BaseModel):
    id: str
    k: int
    metrics: MetricsModel
    cluster_sizes: list[int]
    wall_time_ms: float


class HistoryEntry(BaseModel):
    k: int
    metrics: MetricsModel
    cluster_sizes: list[int]
    wall_time_ms: float


class SessionInfo(BaseModel):
    id: str
    status: str
    n: int
    m: int
    components: int
    k_current: int
    warnings: list[str]
    history: list[HistoryEntry]


class CreateResponse(BaseModel):
    id: str
    status: str
    n: int
    m: int
    components: int
    warnings: list[str]


class LabelsResponse(BaseModel):
    id: str
    k: int
    labels: list[list[int]]


class StopResponse(BaseModel):
    id: str
    status: str
    k: int
    metrics: MetricsModel
    history: list[HistoryEntry]


class _Store:
    """In-memory session registry with one mutation lock per session."""

    def __init__(self):
        self._sessions: dict[str, tuple[SessionState, threading.Lock]] = {}
        self._guard = threading.Lock()

    def add(self, st: SessionState) -> None:
        with self._guard:
            self._sessions[st.id] = (st, threading.Lock())

    def get(self, session_id: str) -> tuple[SessionState, threading.Lock]:
        with self._guard:
            item = self._sessions.get(session_id)
        if item is None:
            raise ApiError(404, "unknown_session", f"no session with id {session_id!r}")
        return item


def _parse_config(spec: ConfigSpec) -> SessionConfig:
    try:
        kind = LaplacianKind(spec.kind)
    except ValueError:
        raise ApiError(422, "invalid_config", f"unknown Laplacian kind {spec.kind!r}") from None
    try:
        return SessionConfig(
            kind=kind,
            solver=SolverConfig(
                tol=spec.tol, max_iters=spec.max_iters, seed=spec.seed, method=spec.method
            ),
            metrics_on=spec.metrics_on,
            kmeans_seed=spec.kmeans_seed,
            kmeans_restarts=spec.kmeans_restarts,
            normalize_rows=spec.normalize_rows,
            k_max=spec.k_max,
        )
    except ValueError as err:
        raise ApiError(422, "invalid_config", str(err)) from None


def _load_graph(req: SessionCreateRequest, data_dir: Path | None, max_inline_edges: int) -> Graph:
    provided = [
        name
        for name, value in (
            ("edges", req.edges),
            ("edge_list_text", req.edge_list_text),
            ("edge_list_path", req.edge_list_path),
            ("generator", req.generator),
        )
        if value is not None
    ]
    if len(provided) != 1:
        raise ApiError(
            422,
            "invalid_graph",
            f"provide exactly one of edges, edge_list_text, edge_list_path, generator (got {provided or 'none'})",
        )
    try:
        if req.generator is not None:
            return generate_erdos_renyi(req.generator.n, req.generator.p, req.generator.seed)
        if req.edges is not None:
            if len(req.edges) > max_inline_edges:
                raise ApiError(
                    422,
                    "graph_too_large",
                    f"inline upload capped at {max_inline_edges} edges; use edge_list_path",
                )
            lines = []
            for e in req.edges:
                if len(e) == 2:
                    lines.append(f"{int(e[0])} {int(e[1])}")
                elif len(e) == 3:
                    lines.append(f"{int(e[0])} {int(e[1])} {e[2]!r}")
                else:
                    raise ApiError(422, "invalid_graph", f"edge must be [u, v] or [u, v, w], got {e!r}")
            return load_edge_list(lines)
        if req.edge_list_text is not None:
            if req.edge_list_text.count("\n") > max_inline_edges:
                raise ApiError(
                    422,
                    "graph_too_large",
                    f"inline upload capped at {max_inline_edges} lines; use edge_list_path",
                )
            return load_edge_list(req.edge_list_text)
        if data_dir is None:
            raise ApiError(422, "invalid_graph", "edge_list_path requires the server to run with a data dir")
        target = (data_dir / req.edge_list_path).resolve()
        if not str(target).startswith(str(data_dir.resolve())):
            raise ApiError(422, "invalid_graph", "edge_list_path escapes the data dir")
        if not target.exists():
            raise ApiError(422, "invalid_graph", f"no such file under the data dir: {req.edge_list_path}")
        return load_edge_list(target.read_text(encoding="utf-8"))
    except GraphFormatError as err:
        raise ApiError(422, "invalid_graph", str(err)) from None
    except ValueError as err:
        raise ApiError(422, "invalid_graph", str(err)) from None


def _history_entry(rec) -> HistoryEntry:
    return HistoryEntry(
        k=rec.k,
        metrics=MetricsModel(**rec.metrics.to_json_dict()),
        cluster_sizes=[int(s) for s in rec.assignment.sizes()],
        wall_time_ms=rec.wall_time_ms,
    )


def create_app(
    data_dir: str | None = None,
    max_inline_edges: int = DEFAULT_MAX_INLINE_EDGES,
    frontend_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="lapinc session service", version="1.0")
    store = _Store()
    data_path = Path(data_dir) if data_dir else (
        Path(os.environ["LAPINC_DATA_DIR"]) if os.environ.get("LAPINC_DATA_DIR") else None
    )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        body = {"error": {"code": exc.code, "message": exc.message}}
        if exc.details is not None:
            body["error"]["details"] = exc.details
        return JSONResponse(status_code=exc.status, content=body)

    @app.post("/v1/sessions", response_model=CreateResponse)
    def create(req: SessionCreateRequest) -> CreateResponse:
        cfg = _parse_config(req.config)
        g = _load_graph(req, data_path, max_inline_edges)
        try:
            st = create_session(g, cfg, session_id=uuid.uuid4().hex[:12])
        except ValueError as err:
            raise ApiError(422, "invalid_graph", str(err)) from None
        store.add(st)
        return CreateResponse(
            id=st.id,
            status=st.status.value,
            n=g.n,
            m=g.m,
            components=st.labeling.count,
            warnings=list(st.warnings),
        )

    @app.post("/v1/sessions/{session_id}/step", response_model=StepResponse)
    def do_step(session_id: str) -> StepResponse:
        st, lock = store.get(session_id)
        with lock:
            if st.status is SessionStatus.STOPPED:
                raise ApiError(409, "session_stopped", f"session {session_id} is stopped")
            try:
                rec = step(st)
            except SessionError as err:
                raise ApiError(409, "step_rejected", str(err)) from None
            except ConvergenceError as err:
                raise ApiError(
                    500,
                    "solver_failure",
                    str(err),
                    details={"iterations": err.iterations, "residual": err.residual},
                ) from None
        return StepResponse(
            id=st.id,
            k=rec.k,
            metrics=MetricsModel(**rec.metrics.to_json_dict()),
            cluster_sizes=[int(s) for s in rec.assignment.sizes()],
            wall_time_ms=rec.wall_time_ms,
        )

    @app.get("/v1/sessions/{session_id}", response_model=SessionInfo)
    def info(session_id: str) -> SessionInfo:
        st, lock = store.get(session_id)
        with lock:
            return SessionInfo(
                id=st.id,
                status=st.status.value,
                n=st.graph.n,
                m=st.graph.m,
                components=st.labeling.count,
                k_current=st.k_current,
                warnings=list(st.warnings),
                history=[_history_entry(rec) for rec in st.history],
            )

    @app.get("/v1/sessions/{session_id}/clusters/{k}", response_model=LabelsResponse)
    def clusters(session_id: str, k: int) -> LabelsResponse:
        st, lock = store.get(session_id)
        with lock:
            match = [rec for rec in st.history if rec.k == k]
            if not match:
                raise ApiError(404, "unknown_clustering", f"no clustering recorded for K={k}")
            rec = match[0]
            labels = [
                [int(st.graph.node_ids[i]), int(rec.assignment.labels[i])]
                for i in range(st.graph.n)
            ]
        return LabelsResponse(id=st.id, k=k, labels=labels)

    @app.post("/v1/sessions/{session_id}/stop", response_model=StopResponse)
    def do_stop(session_id: str) -> StopResponse:
        st, lock = store.get(session_id)
        with lock:
            if st.status is SessionStatus.STOPPED:
                raise ApiError(409, "session_stopped", f"session {session_id} is already stopped")
            try:
                report = stop(st)
            except SessionError as err:
                raise ApiError(409, "stop_rejected", str(err)) from None
        return StopResponse(
            id=st.id,
            status=st.status.value,
            k=report.k,
            metrics=MetricsModel(**report.metrics.to_json_dict()),
            history=[_history_entry(rec) for rec in report.history],
        )

    @app.get("/v1/sessions/{session_id}/export")
    def export(session_id: str, format: str = "csv"):
        st, lock = store.get(session_id)
        with lock:
            if not st.history:
                raise ApiError(409, "nothing_to_export", "session has no clustering yet")
            if format == "csv":
                return PlainTextResponse(export_metrics_csv(st), media_type="text/csv")
            if format == "json":
                latest = st.history[-1].k
                return JSONResponse(
                    {
                        "id": st.id,
                        "status": st.status.value,
                        "metrics": export_metrics_json(st),
                        "labels": {
                            str(latest): [
                                [int(st.graph.node_ids[i]), int(st.history[-1].assignment.labels[i])]
                                for i in range(st.graph.n)
                            ]
                        },
                        "basis": basis_to_json(st.basis),
                    }
                )
        raise ApiError(422, "invalid_format", f"format must be csv or json, got {format!r}")

    front = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if front.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(front), html=True), name="dashboard")
    return app
