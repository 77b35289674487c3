import importlib.util
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conxsense import kernels

BACKENDS = kernels.available_backends()


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


@needs_both
@given(st.lists(st.tuples(st.integers(0, 400_000), st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3)), max_size=80),
       st.sampled_from([50.0, 100.0]))
def test_gps_segments_identical(steps, r):
    t = np.cumsum([s[0] for s in steps]).astype(np.int64)
    lat = 60.0 + np.cumsum([s[1] for s in steps])
    lon = 24.0 + np.cumsum([s[2] for s in steps])
    a = BACKENDS["python"].gps_segments(t, lat, lon, r, 300_000, 600_000)
    b = BACKENDS["cython"].gps_segments(t, lat, lon, r, 300_000, 600_000)
    assert list(map(tuple, a)) == list(map(tuple, b))


@needs_both
@given(st.lists(st.tuples(st.integers(0, 400_000), st.frozensets(st.integers(0, 9), max_size=6)), max_size=80))
def test_wifi_kernels_identical(rows):
    t = np.cumsum([r[0] for r in rows]).astype(np.int64)
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    ids = []
    for k, (_, s) in enumerate(rows):
        ids.extend(sorted(s))
        indptr[k + 1] = len(ids)
    ids = np.asarray(ids, dtype=np.int64)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    if all(len(s) for _, s in rows):
        assert (list(map(tuple, py.wifi_segments(t, indptr, ids, 0.5, 300_000, 600_000)))
                == list(map(tuple, cy.wifi_segments(t, indptr, ids, 0.5, 300_000, 600_000))))
        target = np.array([1, 2, 3], dtype=np.int64)
        assert list(py.jaccard_to_set(indptr, ids, target)) == list(cy.jaccard_to_set(indptr, ids, target))
    assert list(py.snapshot_starts(t, 10_000)) == list(cy.snapshot_starts(t, 10_000))
    for strict in (True, False):
        assert list(map(tuple, py.chain_runs(t, 300_000, strict))) == list(map(tuple, cy.chain_runs(t, 300_000, strict)))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_chain_runs_boundaries(name):
    k = BACKENDS[name]
    t = np.array([0, 300, 600, 1000], dtype=np.int64)
    assert list(map(tuple, k.chain_runs(t, 300, False))) == [(0, 2), (3, 3)]
    assert list(map(tuple, k.chain_runs(t, 300, True))) == [(0, 0), (1, 1), (2, 2), (3, 3)]
    assert list(k.chain_runs(np.array([], dtype=np.int64), 300, True)) == []


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_jaccard_sorted(name):
    k = BACKENDS[name]
    assert k.jaccard_sorted(np.array([1, 2, 3], dtype=np.int64), np.array([2, 3, 4], dtype=np.int64)) == 0.5


def test_benchmark_script_runs_and_backends_agree():
    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    results = bench.run(n=500, repeat=1)
    assert set(results) == {"gps_segments", "wifi_segments", "snapshot_starts", "chain_runs"}
    assert all(set(row) == set(kernels.available_backends()) for row in results.values())
