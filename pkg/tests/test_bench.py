from __future__ import annotations

import numpy as np
import pytest

from lapinc.bench import (
    BENCH_CSV_HEADER,
    BenchAuditError,
    _audit,
    incremental_run,
    records_to_csv,
    run_bench,
    summarize,
)
from lapinc.eigensolve import SolverConfig
from lapinc.graph import LaplacianKind, build_laplacian, connected_components

from conftest import random_weighted_connected


def test_incremental_run_reports_per_k_work():
    g = random_weighted_connected(40, 0.2, seed=90)
    laplacian = build_laplacian(g, LaplacianKind.UNNORMALIZED)
    basis, times, iters = incremental_run(laplacian, connected_components(g), 6, SolverConfig(seed=1))
    assert basis.k == 6
    assert len(times) == len(iters) == 5
    assert all(t >= 0 for t in times)
    assert all(i >= 1 for i in iters)


def test_run_bench_shapes_and_audit():
    records, audits = run_bench(ns=[24], p=0.3, k_max=4, trials=2, seed=5)
    assert len(records) == 3 * 3 * 2  # methods x Ks x trials
    assert len(audits) == 1
    assert audits[0].max_relative_diff <= 1e-7
    csv_text = records_to_csv(records)
    assert csv_text.splitlines()[0] == BENCH_CSV_HEADER
    assert len(summarize(records)) == 1 + 3 * 3


def test_run_bench_validates_inputs():
    with pytest.raises(ValueError, match="unknown method"):
        run_bench(ns=[20], p=0.3, k_max=3, trials=1, methods=("teleport",))
    with pytest.raises(ValueError, match="k_max"):
        run_bench(ns=[20], p=0.3, k_max=1, trials=1)
    with pytest.raises(ValueError, match="exceeds"):
        run_bench(ns=[4], p=0.9, k_max=10, trials=1)


def test_audit_disagreement_carries_forensics():
    g = random_weighted_connected(20, 0.3, seed=91)
    laplacian = build_laplacian(g, LaplacianKind.UNNORMALIZED)
    good = np.zeros(4)
    bad = good + 0.5 * laplacian.strength_total
    with pytest.raises(BenchAuditError) as err:
        _audit(g, laplacian, seed=91, values={"incremental_io": good, "batch": bad})
    forensics = err.value.forensics
    assert forensics["n"] == 20
    assert forensics["max_relative_diff"] > 1e-7
    assert set(forensics["values"]) == {"incremental_io", "batch"}
