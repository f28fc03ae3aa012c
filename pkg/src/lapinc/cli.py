"""Command-line front door: solve, cluster, bench, serve.

Exit codes: 0 success, 1 input/parse error, 2 precondition violation,
3 convergence failure, 4 benchmark audit disagreement.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import BenchAuditError, records_to_csv, run_bench, summarize
from .eigensolve import ConvergenceError, SolverConfig, basis_to_json
from .graph import (
    Graph,
    GraphFormatError,
    LaplacianKind,
    build_laplacian,
    connected_components,
    load_edge_list,
    load_matrix_market,
)
from .lanczos import WORK_LOG_HEADER, batch_smallest, lanczos_smallest
from .session import (
    SessionConfig,
    create_session,
    export_labels_csv,
    export_metrics_csv,
    export_metrics_json,
    step,
)

EXIT_PARSE = 1
EXIT_PRECONDITION = 2
EXIT_CONVERGENCE = 3
EXIT_AUDIT = 4


def _read_graph(path: str) -> Graph:
    p = Path(path)
    if not p.exists():
        raise GraphFormatError(f"no such file: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() in (".mtx", ".mm") or text.lstrip().lower().startswith("%%matrixmarket"):
        return load_matrix_market(text)
    return load_edge_list(text)


def _kind(name: str) -> LaplacianKind:
    return LaplacianKind.NORMALIZED if name == "normalized" else LaplacianKind.UNNORMALIZED


def _cmd_solve(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    kind = _kind(args.kind)
    labeling = connected_components(g)
    if not labeling.count <= args.k <= g.n:
        print(
            f"error: --k must lie in [{labeling.count}, {g.n}] for this graph, got {args.k}",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION
    laplacian = build_laplacian(g, kind)
    cfg = SolverConfig(tol=args.tol, max_iters=args.max_iters, seed=args.seed, method=args.solver)
    work_rows = None
    if args.method == "inc":
        from .bench import incremental_run

        basis, _times, iters = incremental_run(laplacian, labeling, args.k, cfg)
        iterations = int(sum(iters))
    elif args.method == "batch":
        basis = batch_smallest(laplacian, args.k, cfg, labeling)
        iterations = -1
    else:
        basis, work_rows = lanczos_smallest(laplacian, args.k, cfg, labeling)
        iterations = int(sum(row.iterations for row in work_rows))
    print(f"kind: {kind.value}")
    print(f"n: {g.n}  m: {g.m}  components: {labeling.count}")
    print(f"method: {args.method}  K: {args.k}  tol: {args.tol:g}  seed: {args.seed}")
    print("values: " + " ".join(repr(float(v)) for v in basis.values))
    print("residuals: " + " ".join(f"{float(r):.3e}" for r in basis.residuals))
    if iterations >= 0:
        print(f"iterations: {iterations}")
    if work_rows:
        print(WORK_LOG_HEADER)
        for row in work_rows:
            print(row.to_csv_row())
    if args.out:
        Path(args.out).write_text(json.dumps(basis_to_json(basis)), encoding="utf-8")
        print(f"basis written to {args.out}")
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    if args.k < 2:
        print("error: --k must be at least 2 for clustering", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.k > g.n:
        print(f"error: --k must not exceed n={g.n}", file=sys.stderr)
        return EXIT_PRECONDITION
    cfg = SessionConfig(
        kind=_kind(args.kind),
        solver=SolverConfig(tol=args.tol, seed=args.seed),
        metrics_on=args.metrics_on,
        kmeans_seed=args.seed,
    )
    st = create_session(g, cfg)
    record = None
    while st.next_k <= args.k:
        record = step(st)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "labels.csv").write_text(export_labels_csv(st, args.k), encoding="utf-8")
    (out_dir / "metrics.csv").write_text(export_metrics_csv(st), encoding="utf-8")
    (out_dir / "metrics.json").write_text(
        json.dumps(export_metrics_json(st), indent=2), encoding="utf-8"
    )
    (out_dir / "basis.json").write_text(json.dumps(basis_to_json(st.basis)), encoding="utf-8")
    m = record.metrics
    print(f"K={record.k}  modularity={m.modularity:.6f}  scaled_nc={m.scaled_nc:.6f}")
    print(f"outputs in {out_dir}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    methods = tuple(args.methods.split(","))
    try:
        records, audits = run_bench(
            ns=args.n,
            p=args.p,
            k_max=args.kmax,
            trials=args.trials,
            methods=methods,
            seed=args.seed,
        )
    except BenchAuditError as err:
        dump = Path(args.out).with_suffix(".audit-failure.json") if args.out else Path("bench.audit-failure.json")
        dump.write_text(json.dumps(err.forensics, indent=2), encoding="utf-8")
        print(f"error: {err}\nforensics written to {dump}", file=sys.stderr)
        return EXIT_AUDIT
    csv_text = records_to_csv(records)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"{len(records)} records written to {args.out}")
    else:
        print(csv_text, end="")
    for line in summarize(records):
        print(line)
    for audit in audits:
        print(
            f"audit n={audit.n} seed={audit.seed}: max relative eigenvalue diff "
            f"{audit.max_relative_diff:.3e} (tolerance 1e-07)"
        )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lapinc",
        description="Incremental graph-Laplacian eigenpairs, clustering metrics, benchmarks, and the session service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="compute the K smallest eigenpairs of a graph Laplacian")
    p_solve.add_argument("graph", help="edge-list or MatrixMarket file")
    p_solve.add_argument("--kind", choices=("unnormalized", "normalized"), default="unnormalized")
    p_solve.add_argument("--k", type=int, required=True)
    p_solve.add_argument("--method", choices=("inc", "lanczos", "batch"), default="inc")
    p_solve.add_argument("--tol", type=float, default=1e-10)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument(
        "--solver",
        choices=("auto", "power", "lanczos"),
        default="auto",
        help="leading-pair solver for the incremental method",
    )
    p_solve.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    p_solve.add_argument("--out", help="write the eigenbasis JSON here")
    p_solve.set_defaults(func=_cmd_solve)

    p_cluster = sub.add_parser("cluster", help="non-interactive spectral clustering at a fixed K")
    p_cluster.add_argument("graph")
    p_cluster.add_argument("--k", type=int, required=True)
    p_cluster.add_argument("--kind", choices=("unnormalized", "normalized"), default="unnormalized")
    p_cluster.add_argument("--metrics-on", choices=("w", "wn"), default="w", dest="metrics_on")
    p_cluster.add_argument("--tol", type=float, default=1e-10)
    p_cluster.add_argument("--seed", type=int, default=0)
    p_cluster.add_argument("--out-dir", default="cluster-out", dest="out_dir")
    p_cluster.set_defaults(func=_cmd_cluster)

    p_bench = sub.add_parser("bench", help="timing sweep of the three methods on random graphs")
    p_bench.add_argument("--n", type=int, nargs="+", required=True)
    p_bench.add_argument("--p", type=float, default=0.1)
    p_bench.add_argument("--kmax", type=int, default=10)
    p_bench.add_argument("--trials", type=int, default=5)
    p_bench.add_argument("--methods", default="incremental_io,lanczos_io,batch")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", help="CSV output path")
    p_bench.set_defaults(func=_cmd_bench)

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=int(os.environ.get("LAPINC_PORT", "8322")))
    p_serve.add_argument("--data-dir", default=os.environ.get("LAPINC_DATA_DIR"), dest="data_dir")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except GraphFormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except ConvergenceError as err:
        print(
            f"error: convergence failure: {err} "
            f"(iterations={err.iterations}, residual={err.residual:.3e})",
            file=sys.stderr,
        )
        return EXIT_CONVERGENCE
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
