#!/usr/bin/env python3
"""
Utility functions for derivation and simulation runs.
"""

import csv
import json
import os
import statistics
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


def ensure_dirs(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def ensure_parent(path: str) -> None:
    ensure_dirs(os.path.dirname(path) or ".")


def save_json(data: Dict[str, Any], filename: str) -> None:
    ensure_parent(filename)
    with open(filename, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")


def save_results(results: Dict[str, Dict[str, Any]], filename="reproduction_results.json",
                 key="max_population_deviation"):
    """Save per-run results to JSON with a summary of `key` across runs."""
    values = [r[key] for r in results.values() if isinstance(r.get(key), (int, float))]
    output_data = {
        "results": results,
        "summary": {
            "total_runs": len(results),
            "average_" + key: statistics.mean(values) if values else None,
            "median_" + key: statistics.median(values) if values else None,
            "min_" + key: min(values) if values else None,
            "max_" + key: max(values) if values else None,
        }
    }
    save_json(output_data, filename)
    print(f"Detailed results saved to {filename}")


def format_complex(z: complex, digits: int = 6) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.{digits}g}"
    if z.real == 0.0:
        return f"{z.imag:.{digits}g}j"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}j"


def format_matrix(m: np.ndarray, labels: Optional[Sequence[str]] = None, indent: str = "  ",
                  rows: Optional[Sequence[int]] = None) -> str:
    """Aligned text rendering of a complex matrix, optionally restricted to `rows` x `rows`."""
    m = np.asarray(m)
    idx = list(range(m.shape[0])) if rows is None else list(rows)
    names = [labels[i] if labels is not None else str(i) for i in idx]
    cells = [[format_complex(m[i, j]) for j in idx] for i in idx]
    width = max([len(c) for row in cells for c in row] + [len(n) for n in names])
    head = indent + " " * (width + 1) + " ".join(f"{n:>{width}}" for n in names)
    lines = [head]
    for name, row in zip(names, cells):
        lines.append(indent + f"{name:>{width}} " + " ".join(f"{c:>{width}}" for c in row))
    return "\n".join(lines)


def print_deviation_table(rows: List[Dict[str, Any]], title="Full vs effective agreement"):
    """Print a formatted deviation table, largest deviation first."""
    print(f"\n=== {title} ===")
    print(f"{'Rank':<4} {'Run':<28} {'Max dev':<12} {'Trace dist':<12} {'Leakage':<12} {'Tolerance':<10} {'OK':<3}")
    print("-" * 87)

    sorted_rows = sorted(rows, key=lambda r: r["max_population_deviation"], reverse=True)

    for rank, r in enumerate(sorted_rows, 1):
        ok = "yes" if r["max_population_deviation"] <= r["tolerance"] else "NO"
        print(f"{rank:<4} {r['run']:<28} {r['max_population_deviation']:<12.4g} "
              f"{r['final_trace_distance']:<12.4g} {r['leakage']:<12.4g} {r['tolerance']:<10.3g} {ok:<3}")


def write_trajectory_csv(path: str, traj) -> int:
    """Write `t,pop_0,...,pop_{dim-1},trace`, floats in shortest round-trip form."""
    ensure_parent(path)
    header = ["t"] + [f"pop_{i}" for i in range(traj.dim)] + ["trace"]
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for t, pops in zip(traj.times, traj.populations):
            w.writerow([repr(float(t))] + [repr(float(p)) for p in pops] + [repr(float(pops.sum()))])
            n += 1
    return n
