"""Pure-Python segmentation kernels.

Same signatures and bit-identical results as the compiled ``_kernels``
module. Timestamps are integer milliseconds; index ranges are inclusive
``(start, end)`` pairs.
"""
import math

_R = 6371000.0
_DEG = math.pi / 180.0


def _dist(lat1, lon1, lat2, lon2):
    phi = ((lat1 + lat2) / 2.0) * _DEG
    x = ((lon2 - lon1) * _DEG) * math.cos(phi)
    y = (lat2 - lat1) * _DEG
    return _R * math.sqrt(x * x + y * y)


def gps_segments(t_ms, lat, lon, radius_m, gap_ms, min_ms):
    t_ms = [int(v) for v in t_ms]
    lat = [float(v) for v in lat]
    lon = [float(v) for v in lon]
    n = len(t_ms)
    out = []
    i = 0
    while i < n:
        j = i + 1
        while (j < n and t_ms[j] - t_ms[j - 1] <= gap_ms
               and _dist(lat[i], lon[i], lat[j], lon[j]) <= radius_m):
            j += 1
        if t_ms[j - 1] - t_ms[i] >= min_ms:
            out.append((i, j - 1))
            i = j
        else:
            i += 1
    return out


def jaccard_sorted(a, b):
    """Jaccard distance of two strictly increasing integer sequences."""
    na, nb = len(a), len(b)
    i = j = inter = 0
    while i < na and j < nb:
        if a[i] == b[j]:
            inter += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    union = na + nb - inter
    return (union - inter) / union


def wifi_segments(t_ms, indptr, aps, jaccard_max, gap_ms, min_ms):
    t_ms = [int(v) for v in t_ms]
    indptr = [int(v) for v in indptr]
    aps = [int(v) for v in aps]
    rows = [aps[indptr[k]:indptr[k + 1]] for k in range(len(t_ms))]
    n = len(t_ms)
    out = []
    i = 0
    while i < n:
        j = i + 1
        while (j < n and t_ms[j] - t_ms[j - 1] <= gap_ms
               and jaccard_sorted(rows[i], rows[j]) <= jaccard_max):
            j += 1
        if t_ms[j - 1] - t_ms[i] >= min_ms:
            out.append((i, j - 1))
            i = j
        else:
            i += 1
    return out


def snapshot_starts(t_ms, window_ms):
    """Indices opening a new snapshot: an observation further than the window from its group's first."""
    out = []
    first = None
    for k, v in enumerate(t_ms):
        v = int(v)
        if first is None or v - first > window_ms:
            out.append(k)
            first = v
    return out


def chain_runs(t_ms, gap_ms, strict):
    """Split a sorted timestamp list wherever the gap exceeds (or, if strict, reaches) gap_ms."""
    n = len(t_ms)
    if n == 0:
        return []
    out = []
    start = 0
    prev = int(t_ms[0])
    for k in range(1, n):
        cur = int(t_ms[k])
        d = cur - prev
        if (d >= gap_ms) if strict else (d > gap_ms):
            out.append((start, k - 1))
            start = k
        prev = cur
    out.append((start, n - 1))
    return out


def jaccard_to_set(indptr, aps, target):
    indptr = [int(v) for v in indptr]
    aps = [int(v) for v in aps]
    target = [int(v) for v in target]
    return [jaccard_sorted(aps[indptr[k]:indptr[k + 1]], target) for k in range(len(indptr) - 1)]
