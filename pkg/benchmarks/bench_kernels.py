"""Time the compiled and pure-Python segmentation kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--n 50000] [--repeat 5] [--json out.json]

Inputs are a synthetic random walk with dwell periods (GPS) and drifting AP
sets (WiFi), so segments of many lengths occur. Each backend's output is
checked against the other before timing is reported.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from conxsense import kernels


def gps_inputs(n, rng):
    dt = rng.choice([30_000, 60_000, 60_000, 120_000, 600_000], size=n)
    t = np.cumsum(dt).astype(np.int64)
    moving = rng.random(n) < 0.2
    step = np.where(moving, 5e-4, 5e-5)
    lat = 52.0 + np.cumsum(rng.normal(0.0, 1.0, n) * step)
    lon = 4.0 + np.cumsum(rng.normal(0.0, 1.0, n) * step)
    return t, lat, lon


def wifi_inputs(n, rng, universe=40, width=6):
    t = np.cumsum(rng.choice([60_000, 60_000, 120_000, 900_000], size=n)).astype(np.int64)
    centre = np.cumsum(rng.random(n) < 0.05) * 3
    rows, indptr = [], [0]
    for c in centre:
        row = sorted({int((c + k) % universe) for k in rng.integers(0, width, size=width)})
        rows.extend(row)
        indptr.append(len(rows))
    return t, np.asarray(indptr, dtype=np.int64), np.asarray(rows, dtype=np.int64)


def run(n, repeat, seed=0):
    rng = np.random.default_rng(seed)
    t, lat, lon = gps_inputs(n, rng)
    wt, indptr, aps = wifi_inputs(n, rng)
    cases = {
        "gps_segments": lambda k: k.gps_segments(t, lat, lon, 100.0, 300_000, 600_000),
        "wifi_segments": lambda k: k.wifi_segments(wt, indptr, aps, 0.5, 300_000, 600_000),
        "snapshot_starts": lambda k: k.snapshot_starts(t, 10_000),
        "chain_runs": lambda k: k.chain_runs(t, 300_000, False),
    }
    backends = kernels.available_backends()
    results = {}
    for name, fn in cases.items():
        outputs = {b: list(fn(mod)) for b, mod in backends.items()}
        if len({json.dumps(o) for o in outputs.values()}) != 1:
            raise SystemExit(f"{name}: backends disagree")
        row = {}
        for b, mod in backends.items():
            row[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))
        results[name] = row
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)
    results = run(args.n, args.repeat)
    if "cython" not in kernels.available_backends():
        print("compiled backend not built; timing the Python fallback only", file=sys.stderr)
    print(f"{'kernel':<16} {'python ms':>10} {'cython ms':>10} {'speedup':>8}   (n={args.n})")
    for name, row in results.items():
        py = row["python"] * 1e3
        cy = row.get("cython")
        if cy is None:
            print(f"{name:<16} {py:>10.2f} {'-':>10} {'-':>8}")
        else:
            print(f"{name:<16} {py:>10.2f} {cy * 1e3:>10.2f} {row['python'] / cy:>7.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"n": args.n, "seconds": results}, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
