"""Sparse undirected weighted graphs, their Laplacians, and generators.

A graph is held as a symmetric CSR weight matrix with both orientations of
every edge stored, zero diagonal, and nonnegative weights.  Node ids from
input files are relabeled to a contiguous 0-based range; the original ids
are kept for export.

Edge-list grammar (UTF-8 text):
    line        := comment | edge | blank
    comment     := '#' .*
    edge        := u WS v [WS w]
    u, v        := nonnegative integers, u != v
    w           := finite float >= 0 (default 1.0)
Repeated (u, v) records have their weights summed.  Self-loops are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "StrengthVector",
    "LaplacianKind",
    "LaplacianMatrix",
    "ComponentLabeling",
    "GraphFormatError",
    "load_edge_list",
    "load_matrix_market",
    "dumps_edge_list",
    "generate_erdos_renyi",
    "strengths",
    "build_laplacian",
    "normalize_weights",
    "connected_components",
]


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent graph input, with line context."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LaplacianKind(Enum):
    UNNORMALIZED = "unnormalized"
    NORMALIZED = "normalized"


@dataclass(frozen=True)
class Graph:
    """Immutable undirected weighted simple graph.

    ``weights`` is an n x n CSR matrix with W[i, j] = W[j, i] > 0 for every
    edge and zero diagonal.  ``m`` counts unordered pairs with positive
    weight.  ``node_ids[i]`` is the original id of internal node i.
    """

    n: int
    weights: sp.csr_matrix
    m: int
    node_ids: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.weights.data.flags.writeable = False
        self.node_ids.flags.writeable = False


@dataclass(frozen=True)
class StrengthVector:
    """Per-node strengths s_i = sum_j W_ij and their total."""

    per_node: np.ndarray
    total: float


@dataclass(frozen=True)
class LaplacianMatrix:
    """Symmetric sparse Laplacian of a graph, plus the strengths it was built from."""

    kind: LaplacianKind
    matrix: sp.csr_matrix
    n: int
    nnz: int
    node_strengths: np.ndarray
    strength_total: float

    @property
    def sigma(self) -> float:
        """Deflation shift: total strength for the plain Laplacian, 2 for the normalized one."""
        if self.kind is LaplacianKind.UNNORMALIZED:
            return self.strength_total
        return 2.0


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected-component labels in 0..count-1, ordered by smallest member node."""

    labels: np.ndarray
    count: int
    sizes: np.ndarray


def _graph_from_pairs(
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    n: int,
    node_ids: np.ndarray,
    meta: dict[str, Any] | None = None,
) -> Graph:
    """Assemble a Graph from undirected edge records (duplicates summed)."""
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([w, w]).astype(np.float64)
    weights = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    weights.eliminate_zeros()
    weights.sum_duplicates()
    m = weights.nnz // 2
    return Graph(n=n, weights=weights, m=m, node_ids=node_ids, meta=meta or {})


def _as_lines(source: str | Iterable[str]) -> Iterable[str]:
    if isinstance(source, str):
        return source.splitlines()
    return source


def load_edge_list(source: str | Iterable[str], default_weight: float = 1.0) -> Graph:
    """Parse whitespace-separated "u v [w]" records into a Graph.

    Node ids may be any nonnegative integers; they are relabeled to 0..n-1
    in ascending order of the original id, which is preserved in
    ``node_ids``.  Duplicate records sum, self-loops and bad weights raise
    GraphFormatError with the offending line number.
    """
    us: list[int] = []
    vs: list[int] = []
    ws: list[float] = []
    for lineno, raw in enumerate(_as_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise GraphFormatError(f"expected 'u v [w]', got {line!r}", lineno)
        try:
            u = int(tokens[0])
            v = int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"negative node id in {line!r}", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on node {u}", lineno)
        if len(tokens) == 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise GraphFormatError(f"non-numeric weight in {line!r}", lineno) from None
        else:
            w = default_weight
        if not math.isfinite(w) or w < 0:
            raise GraphFormatError(f"weight must be finite and >= 0, got {w}", lineno)
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise GraphFormatError("no edges found in input")
    ids = np.unique(np.concatenate([np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)]))
    index = {int(orig): i for i, orig in enumerate(ids)}
    u_arr = np.fromiter((index[x] for x in us), dtype=np.int64, count=len(us))
    v_arr = np.fromiter((index[x] for x in vs), dtype=np.int64, count=len(vs))
    return _graph_from_pairs(u_arr, v_arr, np.asarray(ws), len(ids), ids)


def load_matrix_market(source: str | Iterable[str]) -> Graph:
    """Parse a MatrixMarket coordinate file into a Graph.

    Accepts ``symmetric`` storage or ``general`` storage whose content is
    exactly symmetric; entry fields may be real, integer, or pattern.
    Diagonal entries are rejected as self-loops.
    """
    lines = list(_as_lines(source))
    if not lines:
        raise GraphFormatError("empty MatrixMarket input")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise GraphFormatError(f"bad MatrixMarket header: {lines[0]!r}", 1)
    obj, fmt, fieldkind, symmetry = (t.lower() for t in header[1:5])
    if obj != "matrix" or fmt != "coordinate":
        raise GraphFormatError(f"unsupported MatrixMarket type {obj!r} {fmt!r}", 1)
    if fieldkind not in ("real", "integer", "pattern"):
        raise GraphFormatError(f"unsupported field {fieldkind!r}", 1)
    if symmetry not in ("symmetric", "general"):
        raise GraphFormatError(f"unsupported symmetry {symmetry!r}", 1)

    entries: list[tuple[int, int, float]] = []
    dims: tuple[int, int, int] | None = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        tokens = line.split()
        if dims is None:
            if len(tokens) != 3:
                raise GraphFormatError("expected 'rows cols nnz' size line", lineno)
            nrows, ncols, nnz = (int(t) for t in tokens)
            if nrows != ncols:
                raise GraphFormatError(f"matrix must be square, got {nrows}x{ncols}", lineno)
            dims = (nrows, ncols, nnz)
            continue
        expected = 2 if fieldkind == "pattern" else 3
        if len(tokens) != expected:
            raise GraphFormatError(f"expected {expected} tokens, got {line!r}", lineno)
        i = int(tokens[0])
        j = int(tokens[1])
        w = 1.0 if fieldkind == "pattern" else float(tokens[2])
        n = dims[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphFormatError(f"index ({i},{j}) out of range for n={n}", lineno)
        if i == j:
            raise GraphFormatError(f"self-loop on node {i}", lineno)
        if not math.isfinite(w) or w < 0:
            raise GraphFormatError(f"weight must be finite and >= 0, got {w}", lineno)
        entries.append((i - 1, j - 1, w))
    if dims is None:
        raise GraphFormatError("missing size line")
    n = dims[0]
    if not entries:
        raise GraphFormatError("no off-diagonal entries in MatrixMarket input")

    rows = np.array([e[0] for e in entries], dtype=np.int64)
    cols = np.array([e[1] for e in entries], dtype=np.int64)
    vals = np.array([e[2] for e in entries], dtype=np.float64)
    if symmetry == "general":
        # Duplicate coordinates sum first, then content must be exactly symmetric.
        acc = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        acc.sum_duplicates()
        diff = (acc - acc.T).tocoo()
        if diff.nnz and np.max(np.abs(diff.data)) != 0.0:
            k = int(np.argmax(np.abs(diff.data)))
            raise GraphFormatError(
                f"general matrix content is asymmetric at ({diff.row[k] + 1},{diff.col[k] + 1})"
            )
        weights = acc
        weights.eliminate_zeros()
        m = weights.nnz // 2
        return Graph(n=n, weights=weights, m=m, node_ids=np.arange(n, dtype=np.int64), meta={})
    return _graph_from_pairs(rows, cols, vals, n, np.arange(n, dtype=np.int64))


def dumps_edge_list(g: Graph) -> str:
    """Serialize a graph in the edge-list format, ascending (i, j) with i < j.

    Original node ids are restored.  Weights are written with repr-level
    precision so a load round-trips exactly.
    """
    coo = sp.triu(g.weights, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    out = []
    for k in order:
        i, j, w = int(coo.row[k]), int(coo.col[k]), float(coo.data[k])
        out.append(f"{g.node_ids[i]} {g.node_ids[j]} {w!r}")
    return "\n".join(out) + "\n"


def generate_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Sample G(n, p) with unit weights, deterministic in the seed.

    Each unordered pair is present independently with probability p.  If the
    sample is disconnected it is redrawn up to 100 times; after that the
    largest component is returned with ``meta["largest_component_fallback"]``
    set.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"need 0 < p <= 1, got {p}")
    rng = np.random.default_rng(seed)
    g = None
    labeling = None
    for attempt in range(101):
        us = []
        vs = []
        for i in range(n - 1):
            mask = rng.random(n - 1 - i) < p
            hits = np.flatnonzero(mask)
            if hits.size:
                us.append(np.full(hits.size, i, dtype=np.int64))
                vs.append(hits.astype(np.int64) + i + 1)
        if us:
            u = np.concatenate(us)
            v = np.concatenate(vs)
        else:
            u = np.empty(0, dtype=np.int64)
            v = np.empty(0, dtype=np.int64)
        g = _graph_from_pairs(u, v, np.ones(u.size), n, np.arange(n, dtype=np.int64))
        labeling = connected_components(g)
        if labeling.count == 1:
            return g
    # Fall back to the largest component of the final sample.
    biggest = int(np.argmax(labeling.sizes))
    keep = np.flatnonzero(labeling.labels == biggest)
    sub = g.weights[keep][:, keep].tocoo()
    mask = sub.row < sub.col
    return _graph_from_pairs(
        sub.row[mask],
        sub.col[mask],
        sub.data[mask],
        keep.size,
        keep.astype(np.int64),
        meta={"largest_component_fallback": True, "requested_n": n},
    )


def strengths(g: Graph) -> StrengthVector:
    per_node = np.asarray(g.weights.sum(axis=1)).ravel()
    return StrengthVector(per_node=per_node, total=float(np.sum(per_node)))


def build_laplacian(g: Graph, kind: LaplacianKind) -> LaplacianMatrix:
    """Build L = S - W or its normalized variant I - S^(-1/2) W S^(-1/2).

    The sparse pattern is W's pattern plus the full diagonal.  The
    normalized kind requires every node to have positive strength.
    """
    sv = strengths(g)
    if kind is LaplacianKind.NORMALIZED:
        isolated = np.flatnonzero(sv.per_node <= 0.0)
        if isolated.size:
            raise ValueError(
                f"normalized Laplacian undefined: node {int(g.node_ids[isolated[0]])} is isolated"
            )
        inv_sqrt = 1.0 / np.sqrt(sv.per_node)
        scaled = sp.diags(inv_sqrt) @ g.weights @ sp.diags(inv_sqrt)
        mat = (sp.identity(g.n, format="csr") - scaled).tocsr()
    else:
        mat = (sp.diags(sv.per_node) - g.weights).tocsr()
    mat.sum_duplicates()
    return LaplacianMatrix(
        kind=kind,
        matrix=mat,
        n=g.n,
        nnz=mat.nnz,
        node_strengths=sv.per_node,
        strength_total=sv.total,
    )


def normalize_weights(g: Graph) -> Graph:
    """Rescale weights to W_ij / sqrt(s_i s_j); the sparsity pattern is unchanged."""
    sv = strengths(g)
    isolated = np.flatnonzero(sv.per_node <= 0.0)
    if isolated.size:
        raise ValueError(
            f"weight normalization undefined: node {int(g.node_ids[isolated[0]])} is isolated"
        )
    inv_sqrt = 1.0 / np.sqrt(sv.per_node)
    scaled = (sp.diags(inv_sqrt) @ g.weights @ sp.diags(inv_sqrt)).tocsr()
    return Graph(n=g.n, weights=scaled, m=g.m, node_ids=g.node_ids, meta=dict(g.meta))


def connected_components(g: Graph) -> ComponentLabeling:
    """Label components by traversal over positive-weight edges.

    Labels are assigned in order of each component's smallest node id, so
    node 0 always carries label 0.
    """
    return _components_from_csr(g.weights)


def _components_from_csr(mat: sp.csr_matrix) -> ComponentLabeling:
    count, raw = sp.csgraph.connected_components(mat, directed=False)
    # Relabel so components are numbered by their smallest member node.
    uniq, first_idx = np.unique(raw, return_index=True)
    remap = np.empty(count, dtype=np.int64)
    remap[uniq[np.argsort(first_idx)]] = np.arange(count)
    labels = remap[raw].astype(np.int64)
    sizes = np.bincount(labels, minlength=count)
    return ComponentLabeling(labels=labels, count=count, sizes=sizes)
