"""Command line front end: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from hoqmc_plots.render import FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hoqmc-plot",
        description="Render a log-log convergence figure from harness CSVs",
    )
    parser.add_argument("csvs", nargs="+", help="input CSV files, one series each")
    parser.add_argument("--out", default="figure.svg", help="output SVG path")
    parser.add_argument("--x", default="N", help="x column (default N)")
    parser.add_argument("--y", default="abs_error", help="y column (default abs_error)")
    parser.add_argument(
        "--guides",
        default="-2",
        help="comma-separated guide slopes, e.g. --guides=-2,-0.5 (default -2)",
    )
    parser.add_argument(
        "--labels", default="", help="comma-separated legend labels, one per CSV"
    )
    parser.add_argument("--title", default="", help="figure title")
    ns = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            csv_paths=tuple(ns.csvs),
            out_path=ns.out,
            x_column=ns.x,
            y_column=ns.y,
            guide_slopes=tuple(float(s) for s in ns.guides.split(",") if s.strip()),
            labels=tuple(l.strip() for l in ns.labels.split(",") if l.strip()),
            title=ns.title,
        )
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
