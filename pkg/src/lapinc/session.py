"""Resumable user-guided clustering sessions.

A session normalizes the input weights (W_N = S^(-1/2) W S^(-1/2)), builds
the requested Laplacian of the normalized graph, and then advances one
cluster count at a time: each step extends the eigenbasis to K columns,
runs k-means on the rows of V_K, scores the five metrics, and appends the
record to the history.  The caller (a human, via CLI or HTTP) decides when
to stop.

Steps are deterministic: solver and k-means seeds for step K are derived
from the config seeds and K, so replays and resumed checkpoints produce
identical histories.  Modularity and normalized cut are evaluated on the
original weights by default; set ``metrics_on="wn"`` to score the
normalized graph that was actually decomposed.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

from .clustering import (
    METRICS_CSV_HEADER,
    ClusterAssignment,
    MetricsRecord,
    kmeans,
    metrics_bundle,
)
from .eigensolve import (
    ConvergenceError,
    EigenBasis,
    SolverConfig,
    _derive_seed,
    basis_from_json,
    basis_to_json,
    kernel_basis,
    next_eigenpair,
)
from .graph import (
    ComponentLabeling,
    Graph,
    LaplacianKind,
    _graph_from_pairs,
    build_laplacian,
    connected_components,
    normalize_weights,
)
from .ioutil import array_from_json, array_to_json

__all__ = [
    "SessionStatus",
    "SessionConfig",
    "StepRecord",
    "FinalReport",
    "SessionState",
    "SessionError",
    "create_session",
    "step",
    "stop",
    "export_labels_csv",
    "export_metrics_csv",
    "export_metrics_json",
    "checkpoint",
    "restore",
    "save_checkpoint",
    "load_checkpoint",
]


class SessionError(RuntimeError):
    pass


class SessionStatus(Enum):
    RUNNING = "running"
    STOPPED = "stopped"
    FAILED = "failed"


@dataclass(frozen=True)
class SessionConfig:
    kind: LaplacianKind = LaplacianKind.UNNORMALIZED
    solver: SolverConfig = field(default_factory=SolverConfig)
    metrics_on: str = "w"
    kmeans_seed: int = 0
    kmeans_restarts: int = 10
    normalize_rows: bool = False
    k_max: int | None = None

    def __post_init__(self):
        if self.metrics_on not in ("w", "wn"):
            raise ValueError(f"metrics_on must be 'w' or 'wn', got {self.metrics_on!r}")
        if self.k_max is not None and self.k_max < 2:
            raise ValueError("k_max must be at least 2")


@dataclass(frozen=True)
class StepRecord:
    k: int
    assignment: ClusterAssignment
    metrics: MetricsRecord
    wall_time_ms: float


@dataclass(frozen=True)
class FinalReport:
    k: int
    assignment: ClusterAssignment
    metrics: MetricsRecord
    history: tuple[StepRecord, ...]


@dataclass
class SessionState:
    """One in-flight clustering loop; mutate only through step()/stop()."""

    id: str
    config: SessionConfig
    graph: Graph
    normalized_graph: Graph
    laplacian: Any
    labeling: ComponentLabeling
    basis: EigenBasis
    history: list[StepRecord] = field(default_factory=list)
    status: SessionStatus = SessionStatus.RUNNING
    warnings: list[str] = field(default_factory=list)
    failure: str | None = None

    @property
    def k_current(self) -> int:
        return self.history[-1].k if self.history else 1

    @property
    def next_k(self) -> int:
        return 2 + len(self.history)


def create_session(g: Graph, cfg: SessionConfig | None = None, session_id: str | None = None) -> SessionState:
    """Initialize the loop state: W_N, its Laplacian, and the kernel basis.

    The loop is specified for connected graphs; a disconnected input is
    accepted in deflated-kernel mode (all component indicators deflated at
    once) with a warning recorded on the session.
    """
    cfg = cfg or SessionConfig()
    warnings: list[str] = []
    labeling = connected_components(g)
    if labeling.count > 1:
        warnings.append(
            f"graph has {labeling.count} connected components; proceeding with the "
            f"multi-component kernel (results per component)"
        )
    normalized = normalize_weights(g)
    laplacian = build_laplacian(normalized, cfg.kind)
    basis = kernel_basis(laplacian, labeling)
    return SessionState(
        id=session_id or uuid.uuid4().hex[:12],
        config=cfg,
        graph=g,
        normalized_graph=normalized,
        laplacian=laplacian,
        labeling=labeling,
        basis=basis,
        warnings=warnings,
    )


def _metric_graph(st: SessionState) -> Graph:
    return st.graph if st.config.metrics_on == "w" else st.normalized_graph


def step(st: SessionState) -> StepRecord:
    """Advance to the next cluster count: extend the basis, cluster, score.

    Raises SessionError on exhausted spectra or non-running sessions; a
    solver failure marks the session failed (history preserved) and
    re-raises the ConvergenceError.
    """
    if st.status is not SessionStatus.RUNNING:
        raise SessionError(f"session {st.id} is {st.status.value}; step is not allowed")
    k = st.next_k
    if k > st.graph.n:
        raise SessionError("spectrum exhausted: K would exceed the node count")
    if st.config.k_max is not None and k > st.config.k_max:
        raise SessionError(f"configured k_max={st.config.k_max} reached")
    t0 = time.perf_counter()
    solver = st.config.solver
    while st.basis.k < k:
        step_cfg = replace(solver, seed=_derive_seed(solver.seed, st.basis.k + 1))
        try:
            pair = next_eigenpair(st.laplacian, st.basis, step_cfg)
        except ConvergenceError as err:
            st.status = SessionStatus.FAILED
            st.failure = (
                f"solver failed at K={st.basis.k + 1}: {err} "
                f"(iterations={err.iterations}, residual={err.residual:.3e})"
            )
            raise
        residual = float(
            np.linalg.norm(st.laplacian.matrix @ pair.vector - pair.value * pair.vector)
        )
        st.basis = st.basis.extended(pair.value, pair.vector, residual)
    rows = st.basis.vectors[:, :k]
    assignment = kmeans(
        rows,
        k,
        seed=_derive_seed(st.config.kmeans_seed, k),
        restarts=st.config.kmeans_restarts,
        normalize_rows=st.config.normalize_rows,
    )
    metrics = metrics_bundle(_metric_graph(st), st.basis, st.laplacian, assignment)
    record = StepRecord(
        k=k,
        assignment=assignment,
        metrics=metrics,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
    st.history.append(record)
    return record


def stop(st: SessionState) -> FinalReport:
    """Freeze the session and return the latest clustering plus the full history."""
    if st.status is SessionStatus.STOPPED:
        raise SessionError(f"session {st.id} is already stopped")
    if st.status is not SessionStatus.RUNNING:
        raise SessionError(f"session {st.id} is {st.status.value}")
    if not st.history:
        raise SessionError("nothing to report: no step has run yet")
    st.status = SessionStatus.STOPPED
    last = st.history[-1]
    return FinalReport(
        k=last.k,
        assignment=last.assignment,
        metrics=last.metrics,
        history=tuple(st.history),
    )


def _record_for_k(st: SessionState, k: int | None) -> StepRecord:
    if not st.history:
        raise SessionError("session has no clustering yet")
    if k is None:
        return st.history[-1]
    for rec in st.history:
        if rec.k == k:
            return rec
    raise SessionError(f"no clustering recorded for K={k}")


def export_labels_csv(st: SessionState, k: int | None = None) -> str:
    """Two-column CSV (original node id, cluster id) for the chosen K."""
    rec = _record_for_k(st, k)
    lines = ["node_id,cluster"]
    for idx in range(st.graph.n):
        lines.append(f"{int(st.graph.node_ids[idx])},{int(rec.assignment.labels[idx])}")
    return "\n".join(lines) + "\n"


def export_metrics_csv(st: SessionState) -> str:
    if not st.history:
        raise SessionError("session has no clustering yet")
    lines = [METRICS_CSV_HEADER]
    for rec in st.history:
        lines.append(rec.metrics.to_csv_row())
    return "\n".join(lines) + "\n"


def export_metrics_json(st: SessionState) -> list[dict]:
    if not st.history:
        raise SessionError("session has no clustering yet")
    return [rec.metrics.to_json_dict() for rec in st.history]


def _graph_to_json(g: Graph) -> dict:
    import scipy.sparse as sp

    coo = sp.triu(g.weights, k=1).tocoo()
    return {
        "n": g.n,
        "row": array_to_json(coo.row.astype(np.int64)),
        "col": array_to_json(coo.col.astype(np.int64)),
        "weight": array_to_json(coo.data),
        "node_ids": array_to_json(g.node_ids),
        "meta": dict(g.meta),
    }


def _graph_from_json(obj: dict) -> Graph:
    return _graph_from_pairs(
        array_from_json(obj["row"]),
        array_from_json(obj["col"]),
        array_from_json(obj["weight"]),
        int(obj["n"]),
        array_from_json(obj["node_ids"]),
        meta=dict(obj.get("meta", {})),
    )


def _config_to_json(cfg: SessionConfig) -> dict:
    out = asdict(cfg)
    out["kind"] = cfg.kind.value
    return out


def _config_from_json(obj: dict) -> SessionConfig:
    solver = SolverConfig(**obj["solver"])
    return SessionConfig(
        kind=LaplacianKind(obj["kind"]),
        solver=solver,
        metrics_on=obj["metrics_on"],
        kmeans_seed=obj["kmeans_seed"],
        kmeans_restarts=obj["kmeans_restarts"],
        normalize_rows=obj["normalize_rows"],
        k_max=obj["k_max"],
    )


def save_checkpoint(st: SessionState, path) -> None:
    import json
    from pathlib import Path

    Path(path).write_text(json.dumps(checkpoint(st)), encoding="utf-8")


def load_checkpoint(path) -> SessionState:
    import json
    from pathlib import Path

    return restore(json.loads(Path(path).read_text(encoding="utf-8")))


def checkpoint(st: SessionState) -> dict:
    """Single JSON-safe container from which the session resumes bit-exactly."""
    return {
        "format": "lapinc-session/1",
        "id": st.id,
        "status": st.status.value,
        "warnings": list(st.warnings),
        "failure": st.failure,
        "config": _config_to_json(st.config),
        "graph": _graph_to_json(st.graph),
        "basis": basis_to_json(st.basis),
        "history": [
            {
                "k": rec.k,
                "labels": array_to_json(rec.assignment.labels),
                "inertia": rec.assignment.inertia,
                "metrics": rec.metrics.to_json_dict(),
                "wall_time_ms": rec.wall_time_ms,
            }
            for rec in st.history
        ],
    }


def restore(obj: dict) -> SessionState:
    if obj.get("format") != "lapinc-session/1":
        raise ValueError("not a serialized session")
    cfg = _config_from_json(obj["config"])
    g = _graph_from_json(obj["graph"])
    labeling = connected_components(g)
    normalized = normalize_weights(g)
    laplacian = build_laplacian(normalized, cfg.kind)
    st = SessionState(
        id=obj["id"],
        config=cfg,
        graph=g,
        normalized_graph=normalized,
        laplacian=laplacian,
        labeling=labeling,
        basis=basis_from_json(obj["basis"]),
        status=SessionStatus(obj["status"]),
        warnings=list(obj.get("warnings", [])),
        failure=obj.get("failure"),
    )
    for item in obj["history"]:
        labels = array_from_json(item["labels"])
        st.history.append(
            StepRecord(
                k=int(item["k"]),
                assignment=ClusterAssignment(
                    labels=labels, k=int(item["k"]), inertia=float(item["inertia"])
                ),
                metrics=MetricsRecord.from_json_dict(item["metrics"]),
                wall_time_ms=float(item["wall_time_ms"]),
            )
        )
    return st
