"""Run a sweep config and print a dims x measures table of means.

    python3 scripts/run_sweep.py configs/sbm_demo.json --out report.csv
"""

import argparse
import logging
import time

from embstab.harness import ALL_MEASURES, emit_report, load_config, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("config")
    ap.add_argument("--out", default="report.csv")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    cfg = load_config(args.config)
    t0 = time.perf_counter()
    report = run_sweep(cfg, args.workers)
    elapsed = time.perf_counter() - t0
    emit_report(report, "json" if args.out.endswith(".json") else "csv", args.out)

    measures = [m for m in ALL_MEASURES if m in cfg.measures]
    print(f"{'dim':>5} " + " ".join(f"{m[:12]:>12}" for m in measures))
    for dim in cfg.dims:
        cells = []
        for m in measures:
            (row,) = report.select(m, dim)
            cells.append(f"{'error':>12}" if row.is_error else f"{row.mean:12.4f}")
        flag = report.select("accuracy", dim)[0].optimal_flag if "accuracy" in measures else ""
        print(f"{dim:>5} " + " ".join(cells) + (f"  {flag}" if flag else ""))
    print(f"{len(report.rows)} rows in {elapsed:.1f} s -> {args.out}")


if __name__ == "__main__":
    main()
