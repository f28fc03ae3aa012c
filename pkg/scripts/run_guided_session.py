#!/usr/bin/env python3
"""Interactive terminal walk-through of the user-guided clustering loop.

Generates (or loads) a graph, then advances one cluster count per <enter>,
printing the five metrics after each step so you can decide when to stop.
Type q to stop and write the exports.

    python scripts/run_guided_session.py --n 400 --p 0.05 --seed 1 --out-dir run1
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lapinc.clustering import METRICS_CSV_HEADER  # noqa: E402
from lapinc.graph import generate_erdos_renyi, load_edge_list  # noqa: E402
from lapinc.session import (  # noqa: E402
    create_session,
    export_labels_csv,
    export_metrics_csv,
    export_metrics_json,
    step,
    stop,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--graph", help="edge-list file (overrides the generator)")
    parser.add_argument("--n", type=int, default=400)
    parser.add_argument("--p", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="session-out", dest="out_dir")
    parser.add_argument("--max-steps", type=int, default=50, dest="max_steps")
    args = parser.parse_args()

    if args.graph:
        g = load_edge_list(Path(args.graph).read_text(encoding="utf-8"))
    else:
        g = generate_erdos_renyi(args.n, args.p, args.seed)
    st = create_session(g)
    for warning in st.warnings:
        print(f"warning: {warning}")
    print(f"graph: n={g.n} m={g.m}")
    print(METRICS_CSV_HEADER)
    for _ in range(args.max_steps):
        rec = step(st)
        print(f"{rec.metrics.to_csv_row()}    [{rec.wall_time_ms:.1f} ms]")
        answer = input("step K+1? [enter=yes, q=stop] ").strip().lower()
        if answer == "q":
            break
    report = stop(st)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "labels.csv").write_text(export_labels_csv(st), encoding="utf-8")
    (out / "metrics.csv").write_text(export_metrics_csv(st), encoding="utf-8")
    (out / "metrics.json").write_text(json.dumps(export_metrics_json(st), indent=2), encoding="utf-8")
    print(f"stopped at K={report.k}; exports in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
