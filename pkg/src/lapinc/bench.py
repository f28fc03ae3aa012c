"""Timing harness: the three methods swept over K on seeded random graphs.

Each trial generates one connected random graph and runs every requested
method sequentially from K=2 to K_max, recording per-K and cumulative wall
times on a monotonic clock.  One warm-up run per (method, n) is discarded
before timing.  An audit pass on the first trial of each size checks that
all methods agree on eigenvalues to 1e-7 * s; a disagreement raises with a
forensic payload attached.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, replace

import numpy as np

from .eigensolve import (
    EigenBasis,
    SolverConfig,
    _derive_seed,
    kernel_basis,
    next_eigenpair_detailed,
)
from .graph import (
    ComponentLabeling,
    Graph,
    LaplacianKind,
    LaplacianMatrix,
    build_laplacian,
    connected_components,
    generate_erdos_renyi,
)
from .lanczos import batch_smallest, lanczos_smallest

__all__ = [
    "BenchRecord",
    "BenchAuditError",
    "AuditResult",
    "METHODS",
    "BENCH_CSV_HEADER",
    "incremental_run",
    "run_bench",
    "records_to_csv",
    "summarize",
]

METHODS = ("incremental_io", "lanczos_io", "batch")
BENCH_CSV_HEADER = "method,n,p,K,wall_time_ms,cumulative_ms,residual,trial,seed"
AUDIT_TOL = 1e-7


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n: int
    p: float
    k: int
    wall_time_ms: float
    cumulative_ms: float
    residual: float
    trial: int
    seed: int

    def to_csv_row(self) -> str:
        return (
            f"{self.method},{self.n},{self.p!r},{self.k},{self.wall_time_ms:.3f},"
            f"{self.cumulative_ms:.3f},{self.residual:.6e},{self.trial},{self.seed}"
        )


@dataclass(frozen=True)
class AuditResult:
    n: int
    seed: int
    max_relative_diff: float
    values: dict[str, list[float]]


class BenchAuditError(RuntimeError):
    """Cross-method eigenvalue disagreement; ``forensics`` holds the evidence."""

    def __init__(self, message: str, forensics: dict):
        super().__init__(message)
        self.forensics = forensics


def incremental_run(
    laplacian: LaplacianMatrix,
    labeling: ComponentLabeling | None,
    k_max: int,
    cfg: SolverConfig,
) -> tuple[EigenBasis, list[float], list[int]]:
    """Extend the kernel basis to k_max, timing each extension separately.

    Returns the basis plus per-K wall times (seconds) and solver iteration
    counts, indexed by K = delta+1 .. k_max.
    """
    basis = kernel_basis(laplacian, labeling)
    times: list[float] = []
    iters: list[int] = []
    mat = laplacian.matrix
    while basis.k < k_max:
        step_cfg = replace(cfg, seed=_derive_seed(cfg.seed, basis.k + 1))
        t0 = time.perf_counter()
        pair, result = next_eigenpair_detailed(laplacian, basis, step_cfg)
        times.append(time.perf_counter() - t0)
        iters.append(result.iterations)
        residual = float(np.linalg.norm(mat @ pair.vector - pair.value * pair.vector))
        basis = basis.extended(pair.value, pair.vector, residual)
    return basis, times, iters


def _run_method(
    method: str,
    laplacian: LaplacianMatrix,
    labeling: ComponentLabeling,
    k_max: int,
    cfg: SolverConfig,
) -> tuple[list[float], list[float], np.ndarray]:
    """Per-K wall times (s), per-K residuals, and the final K_max eigenvalues."""
    delta = labeling.count
    if method == "incremental_io":
        basis, times, _ = incremental_run(laplacian, labeling, k_max, cfg)
        residuals = [float(r) for r in basis.residuals[delta:]]
        return times, residuals, basis.values
    if method == "batch":
        times = []
        residuals = []
        basis = None
        for k in range(delta + 1, k_max + 1):
            t0 = time.perf_counter()
            basis = batch_smallest(laplacian, k, cfg, labeling)
            times.append(time.perf_counter() - t0)
            residuals.append(float(basis.residuals.max()))
        return times, residuals, basis.values
    if method == "lanczos_io":
        t0 = time.perf_counter()
        basis, work_log = lanczos_smallest(laplacian, k_max, cfg, labeling)
        total = time.perf_counter() - t0
        logged = sum(row.wall_time_ms for row in work_log) / 1e3
        overhead = max(total - logged, 0.0) / max(len(work_log), 1)
        times = [row.wall_time_ms / 1e3 + overhead for row in work_log]
        residuals = [float(r) for r in basis.residuals[delta:]]
        return times, residuals, basis.values
    raise ValueError(f"unknown method {method!r}")


def run_bench(
    ns: list[int],
    p: float,
    k_max: int,
    trials: int,
    methods: tuple[str, ...] = METHODS,
    seed: int = 0,
    kind: LaplacianKind = LaplacianKind.UNNORMALIZED,
    audit: bool = True,
) -> tuple[list[BenchRecord], list[AuditResult]]:
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    records: list[BenchRecord] = []
    audits: list[AuditResult] = []
    for n in ns:
        if k_max > n:
            raise ValueError(f"k_max={k_max} exceeds n={n}")
        # Warm-up trial per (method, n), discarded.
        warm_seed = _derive_seed(seed, n)
        warm_graph = generate_erdos_renyi(n, p, warm_seed)
        warm_lap = build_laplacian(warm_graph, kind)
        warm_lab = connected_components(warm_graph)
        warm_cfg = SolverConfig(seed=warm_seed)
        for method in methods:
            _run_method(method, warm_lap, warm_lab, min(k_max, 4), warm_cfg)
        for trial in range(trials):
            trial_seed = _derive_seed(seed, 1_000_000 + n * 1_000 + trial)
            g = generate_erdos_renyi(n, p, trial_seed)
            laplacian = build_laplacian(g, kind)
            labeling = connected_components(g)
            cfg = SolverConfig(seed=trial_seed)
            trial_values: dict[str, np.ndarray] = {}
            for method in methods:
                times, residuals, values = _run_method(method, laplacian, labeling, k_max, cfg)
                trial_values[method] = values
                cumulative = 0.0
                for i, (dt, res) in enumerate(zip(times, residuals)):
                    cumulative += dt * 1e3
                    records.append(
                        BenchRecord(
                            method=method,
                            n=g.n,
                            p=p,
                            k=labeling.count + 1 + i,
                            wall_time_ms=dt * 1e3,
                            cumulative_ms=cumulative,
                            residual=res,
                            trial=trial,
                            seed=trial_seed,
                        )
                    )
            if audit and trial == 0 and len(methods) > 1:
                audits.append(_audit(g, laplacian, trial_seed, trial_values))
    return records, audits


def _audit(
    g: Graph, laplacian: LaplacianMatrix, seed: int, values: dict[str, np.ndarray]
) -> AuditResult:
    scale = max(1.0, laplacian.strength_total)
    methods = sorted(values)
    worst = 0.0
    for i, a in enumerate(methods):
        for b in methods[i + 1 :]:
            worst = max(worst, float(np.max(np.abs(values[a] - values[b]))) / scale)
    result = AuditResult(
        n=g.n,
        seed=seed,
        max_relative_diff=worst,
        values={m: [float(v) for v in values[m]] for m in methods},
    )
    if worst > AUDIT_TOL:
        raise BenchAuditError(
            f"methods disagree on eigenvalues: max relative diff {worst:.3e} > {AUDIT_TOL:g} "
            f"(n={g.n}, seed={seed})",
            forensics={
                "n": g.n,
                "seed": seed,
                "strength_total": laplacian.strength_total,
                "max_relative_diff": worst,
                "values": result.values,
            },
        )
    return result


def records_to_csv(records: list[BenchRecord]) -> str:
    lines = [BENCH_CSV_HEADER]
    lines.extend(r.to_csv_row() for r in records)
    return "\n".join(lines) + "\n"


def summarize(records: list[BenchRecord]) -> list[str]:
    """Mean +/- sd of per-K and cumulative times per (method, n, K)."""
    groups: dict[tuple[str, int, int], list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.n, rec.k), []).append(rec)
    lines = ["method          n      K   wall_ms (mean+/-sd)   cumulative_ms (mean+/-sd)"]
    for (method, n, k), recs in sorted(groups.items()):
        walls = [r.wall_time_ms for r in recs]
        cums = [r.cumulative_ms for r in recs]
        wsd = statistics.stdev(walls) if len(walls) > 1 else 0.0
        csd = statistics.stdev(cums) if len(cums) > 1 else 0.0
        lines.append(
            f"{method:<14} {n:>5} {k:>4}   {statistics.mean(walls):>9.2f} +/- {wsd:<8.2f} "
            f"{statistics.mean(cums):>12.2f} +/- {csd:.2f}"
        )
    return lines
