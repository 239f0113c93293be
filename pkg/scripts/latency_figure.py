#!/usr/bin/env python3
"""Reproduce the per-layer indication-latency chart from a seeded run.

Runs the demo workflow in-process, writes the columnar chart export and
(optionally) renders a PNG with one line per layer.

    python scripts/latency_figure.py --seed 42 --seconds 60 --out fig5.csv --png fig5.png
"""

from __future__ import annotations

import argparse
from pathlib import Path

from oranlab.config import LabConfig
from oranlab.lab import LivingLab, run_demo_workflow


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--seconds", type=int, default=60, help="virtual seconds")
    parser.add_argument("--out", type=Path, default=Path("fig5.csv"))
    parser.add_argument("--png", type=Path, default=None)
    args = parser.parse_args()

    lab = LivingLab(LabConfig(seed=args.seed))
    result = run_demo_workflow(lab, duration_ms=args.seconds * 1000)
    chart = lab.chart_export(result.session_id)
    args.out.write_text(chart, encoding="utf-8")
    rows = len(chart.strip().splitlines()) - 1
    print(f"session {result.session_id}: wrote {args.out} ({rows} rows)")

    if args.png is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        t, rlc, pdcp, mac = [], [], [], []
        for line in chart.strip().splitlines()[1:]:
            _, t_ms, a, b, c = line.split(",")
            if a and b and c:
                t.append(int(t_ms) / 1000.0)
                rlc.append(float(a))
                pdcp.append(float(b))
                mac.append(float(c))
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.plot(t, rlc, label="RLC", linewidth=0.8)
        ax.plot(t, pdcp, label="PDCP", linewidth=0.8)
        ax.plot(t, mac, label="MAC", linewidth=0.8)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("indication latency (ms)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=150)
        print(f"wrote {args.png}")


if __name__ == "__main__":
    main()
