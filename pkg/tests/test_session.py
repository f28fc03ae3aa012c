from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapinc.eigensolve import ConvergenceError, SolverConfig, dense_oracle
from lapinc.graph import LaplacianKind, load_edge_list
from lapinc.lanczos import batch_smallest
from lapinc.session import (
    SessionConfig,
    SessionError,
    SessionStatus,
    checkpoint,
    create_session,
    export_labels_csv,
    export_metrics_csv,
    export_metrics_json,
    restore,
    step,
    stop,
)

from conftest import random_weighted_connected


class TestCreate:
    def test_weighted_edge_initialization(self, single_edge_w4):
        st = create_session(single_edge_w4)
        assert st.normalized_graph.weights[0, 1] == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(st.laplacian.matrix.toarray(), [[1, -1], [-1, 1]])
        assert st.laplacian.strength_total == pytest.approx(2.0, abs=1e-14)

    def test_p3_normalized_strength_sum(self, p3):
        st = create_session(p3)
        assert st.laplacian.strength_total == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    def test_disconnected_warns_and_runs(self, two_edges):
        st = create_session(two_edges)
        assert st.status is SessionStatus.RUNNING
        assert st.basis.delta == 2
        assert any("components" in w for w in st.warnings)

    def test_fresh_session_has_no_history(self, p3):
        st = create_session(p3)
        assert st.history == [] and st.k_current == 1


class TestStep:
    def test_two_triangles_first_step(self, two_triangles):
        st = create_session(two_triangles)
        rec = step(st)
        assert rec.k == 2
        assert rec.metrics.modularity == pytest.approx(0.5)
        assert rec.metrics.scaled_nc == 0.0
        assert rec.metrics.scaled_max_size == 0.5
        assert rec.metrics.scaled_spectrum_energy == 0.0

    def test_p3_stepped_to_three_matches_oracle(self, p3):
        st = create_session(p3)
        step(st)
        step(st)
        values, _ = dense_oracle(st.laplacian)
        assert np.max(np.abs(st.basis.values - values[:3])) <= 1e-8

    def test_step_on_stopped_rejected(self, two_triangles):
        st = create_session(two_triangles)
        step(st)
        stop(st)
        with pytest.raises(SessionError, match="stopped"):
            step(st)

    def test_spectrum_exhausted(self, p3):
        st = create_session(p3)
        step(st)
        step(st)
        with pytest.raises(SessionError, match="exhausted"):
            step(st)

    def test_k_max_cap(self, two_triangles):
        st = create_session(two_triangles, SessionConfig(k_max=2))
        step(st)
        with pytest.raises(SessionError, match="k_max"):
            step(st)

    def test_solver_failure_marks_failed(self):
        g = random_weighted_connected(60, 0.15, seed=23)
        cfg = SessionConfig(solver=SolverConfig(seed=0, method="power", max_iters=3))
        st = create_session(g, cfg)
        with pytest.raises(ConvergenceError):
            step(st)
        assert st.status is SessionStatus.FAILED
        assert st.failure and "K=2" in st.failure
        with pytest.raises(SessionError):
            step(st)

    def test_wall_time_recorded(self, two_triangles):
        st = create_session(two_triangles)
        rec = step(st)
        assert rec.wall_time_ms >= 0.0


class TestStop:
    def test_report_after_three_steps(self, two_triangles):
        st = create_session(two_triangles)
        for _ in range(3):
            step(st)
        report = stop(st)
        assert report.k == 4
        assert [r.k for r in report.history] == [2, 3, 4]
        assert st.status is SessionStatus.STOPPED

    def test_stop_before_any_step(self, p3):
        st = create_session(p3)
        with pytest.raises(SessionError, match="no step"):
            stop(st)

    def test_double_stop(self, two_triangles):
        st = create_session(two_triangles)
        step(st)
        stop(st)
        with pytest.raises(SessionError, match="already stopped"):
            stop(st)


class TestExport:
    def test_labels_csv(self, two_triangles):
        st = create_session(two_triangles)
        step(st)
        text = export_labels_csv(st, 2)
        lines = text.strip().splitlines()
        assert lines[0] == "node_id,cluster"
        assert len(lines) == 7
        assert len({line.split(",")[1] for line in lines[1:]}) == 2

    def test_metrics_csv_one_row_per_k(self, two_triangles):
        st = create_session(two_triangles)
        step(st)
        step(st)
        lines = export_metrics_csv(st).strip().splitlines()
        assert lines[0].startswith("K,modularity")
        assert len(lines) == 3

    def test_metrics_json_round_trip(self, two_triangles):
        st = create_session(two_triangles)
        rec = step(st)
        payload = export_metrics_json(st)
        assert payload[0]["modularity"] == rec.metrics.modularity
        assert json.loads(json.dumps(payload)) == payload

    def test_export_requires_history(self, p3):
        st = create_session(p3)
        with pytest.raises(SessionError):
            export_labels_csv(st)

    def test_original_node_ids_restored(self):
        g = load_edge_list("10 20\n20 30\n10 30\n70 80\n80 90\n70 90")
        st = create_session(g)
        step(st)
        first_col = [line.split(",")[0] for line in export_labels_csv(st).strip().splitlines()[1:]]
        assert first_col == ["10", "20", "30", "70", "80", "90"]


class TestDeterminismAndPersistence:
    def test_replay_identical(self, two_triangles):
        a = create_session(two_triangles, session_id="x")
        b = create_session(two_triangles, session_id="x")
        for _ in range(4):
            step(a)
            step(b)
        for ra, rb in zip(a.history, b.history):
            assert ra.k == rb.k
            assert np.array_equal(ra.assignment.labels, rb.assignment.labels)
            assert ra.metrics == rb.metrics

    def test_checkpoint_restore_bit_exact(self, two_triangles):
        a = create_session(two_triangles, session_id="y")
        step(a)
        step(a)
        blob = json.dumps(checkpoint(a))
        b = restore(json.loads(blob))
        assert b.id == a.id and b.status == a.status
        assert np.array_equal(b.basis.values, a.basis.values)
        assert np.array_equal(b.basis.vectors, a.basis.vectors)
        assert [r.k for r in b.history] == [r.k for r in a.history]
        # continued stepping stays identical
        ra, rb = step(a), step(b)
        assert np.array_equal(ra.assignment.labels, rb.assignment.labels)
        assert ra.metrics == rb.metrics

    def test_checkpoint_preserves_stopped_state(self, two_triangles):
        a = create_session(two_triangles)
        step(a)
        stop(a)
        b = restore(checkpoint(a))
        assert b.status is SessionStatus.STOPPED
        with pytest.raises(SessionError):
            step(b)

    def test_checkpoint_file_round_trip(self, two_triangles, tmp_path):
        from lapinc.session import load_checkpoint, save_checkpoint

        a = create_session(two_triangles, session_id="file")
        step(a)
        target = tmp_path / "session.json"
        save_checkpoint(a, target)
        b = load_checkpoint(target)
        assert b.id == "file"
        assert np.array_equal(b.basis.vectors, a.basis.vectors)
        ra, rb = step(a), step(b)
        assert np.array_equal(ra.assignment.labels, rb.assignment.labels)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=100))
    def test_history_contiguous_after_random_sequences(self, steps, seed):
        g = random_weighted_connected(16, 0.4, seed=seed % 10)
        sess = create_session(g, SessionConfig(solver=SolverConfig(seed=seed)))
        for _ in range(steps):
            step(sess)
        assert [r.k for r in sess.history] == list(range(2, 2 + steps))
        assert sess.basis.k == sess.history[-1].k

    def test_session_basis_matches_batch(self):
        g = random_weighted_connected(60, 0.15, seed=31)
        sess = create_session(g, SessionConfig(solver=SolverConfig(seed=5)))
        for _ in range(5):
            step(sess)
        batch = batch_smallest(sess.laplacian, 6, SolverConfig(seed=5), sess.labeling)
        assert np.max(np.abs(sess.basis.values - batch.values)) <= 1e-7 * sess.laplacian.sigma


class TestConfig:
    def test_metrics_on_normalized_graph(self, two_triangles):
        st = create_session(two_triangles, SessionConfig(metrics_on="wn"))
        rec = step(st)
        # two unit triangles normalize to weight-1/2 edges; separation metrics unchanged
        assert rec.metrics.modularity == pytest.approx(0.5)
        assert rec.metrics.scaled_nc == 0.0

    def test_invalid_metrics_mode(self):
        with pytest.raises(ValueError):
            SessionConfig(metrics_on="original")

    def test_normalized_kind_session(self, two_triangles):
        st = create_session(two_triangles, SessionConfig(kind=LaplacianKind.NORMALIZED))
        rec = step(st)
        assert rec.k == 2
        assert st.laplacian.sigma == 2.0
