from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from lapinc.graph import Graph, LaplacianKind, build_laplacian, generate_erdos_renyi, load_edge_list

P3_TEXT = "0 1\n1 2\n"
TWO_TRIANGLES_TEXT = "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n"
TWO_EDGES_TEXT = "0 1\n2 3\n"


@pytest.fixture
def p3() -> Graph:
    return load_edge_list(P3_TEXT)


@pytest.fixture
def k3() -> Graph:
    return load_edge_list("0 1\n1 2\n0 2\n")


@pytest.fixture
def single_edge_w4() -> Graph:
    return load_edge_list("0 1 4.0\n")


@pytest.fixture
def two_edges() -> Graph:
    return load_edge_list(TWO_EDGES_TEXT)


@pytest.fixture
def two_triangles() -> Graph:
    return load_edge_list(TWO_TRIANGLES_TEXT)


def edgeless_graph(n: int) -> Graph:
    return Graph(
        n=n,
        weights=sp.csr_matrix((n, n)),
        m=0,
        node_ids=np.arange(n, dtype=np.int64),
        meta={},
    )


def random_weighted_connected(n: int, p: float, seed: int) -> Graph:
    """Connected ER topology with uniform(0.5, 1.5) weights, deterministic."""
    g = generate_erdos_renyi(n, p, seed)
    assert not g.meta.get("largest_component_fallback"), "fixture graph must be connected"
    rng = np.random.default_rng(seed + 10_000)
    coo = g.weights.tocoo()
    mask = coo.row < coo.col
    u, v = coo.row[mask], coo.col[mask]
    w = rng.uniform(0.5, 1.5, size=u.size)
    weights = sp.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
        shape=(n, n),
    ).tocsr()
    return Graph(n=n, weights=weights, m=int(u.size), node_ids=np.arange(n, dtype=np.int64), meta={})


# (n, p) pairs for the oracle-equivalence sweep: four seeds per size.
ORACLE_SWEEP = {20: 0.30, 50: 0.15, 100: 0.08, 200: 0.05, 500: 0.025}


def oracle_sweep_graphs():
    for n, p in ORACLE_SWEEP.items():
        for i in range(4):
            yield n, random_weighted_connected(n, p, seed=1000 * n + i)


def small_graph_zoo() -> list[Graph]:
    zoo = [
        load_edge_list(P3_TEXT),
        load_edge_list(TWO_TRIANGLES_TEXT),
        load_edge_list(TWO_EDGES_TEXT),
        load_edge_list("0 1 4.0\n"),
        load_edge_list("0 1\n1 2\n0 2\n"),
        random_weighted_connected(20, 0.3, seed=7),
        random_weighted_connected(40, 0.2, seed=8),
    ]
    return zoo


def both_kinds(g: Graph):
    yield build_laplacian(g, LaplacianKind.UNNORMALIZED)
    yield build_laplacian(g, LaplacianKind.NORMALIZED)
