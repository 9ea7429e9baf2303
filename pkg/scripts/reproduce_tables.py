#!/usr/bin/env python3
"""Recompute all six reference tables and write comparison reports.

Usage: reproduce_tables.py [outdir]

Writes table<k>_report.csv per table plus a one-line verdict each to stdout.
Exits 1 if any table fails its default threshold.
"""

import pathlib
import sys

from elasticfpt.tables import compare_table


def main() -> int:
    outdir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    all_ok = True
    for table_id in range(1, 7):
        report = compare_table(table_id)
        path = outdir / f"table{table_id}_report.csv"
        path.write_text(report.to_csv())
        worst = max(r.relative_error for r in report.rows)
        verdict = "PASS" if report.passed else "FAIL"
        print(f"table {table_id}: {verdict}  worst relative error {worst:.3E}  -> {path}")
        all_ok = all_ok and report.passed
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
