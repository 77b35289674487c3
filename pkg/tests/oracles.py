"""Independent reference implementations used as test oracles.

They follow the definitions literally (set algebra, exhaustive enumeration)
and share no code with the package beyond plain data types.
"""
import math
from fractions import Fraction

R_EARTH = 6371000.0


def ms(t):
    return int(round(t * 1000))


def equirect(a, b):
    phi = math.radians((a[0] + b[0]) / 2.0)
    x = math.radians(b[1] - a[1]) * math.cos(phi)
    y = math.radians(b[0] - a[0])
    return R_EARTH * math.sqrt(x * x + y * y)


def jaccard(a, b):
    a, b = set(a), set(b)
    return Fraction(len(a ^ b), len(a | b))


def _greedy(n, times_ms, ok, gap_ms, min_ms):
    """Walk anchors; at each, take the longest prefix whose every point passes both predicates.

    ``ok(i, k)`` is the anchor predicate (radius or Jaccard) for point k.
    """
    out = []
    i = 0
    while i < n:
        j = i
        for k in range(i + 1, n):
            if times_ms[k] - times_ms[k - 1] <= gap_ms and ok(i, k):
                j = k
            else:
                break
        if times_ms[j] - times_ms[i] >= min_ms:
            out.append((i, j))
            i = j + 1
        else:
            i += 1
    return out


def gps_staypoints(points, r, gap, t_min):
    """points: [(t, lat, lon)] -> inclusive index ranges."""
    t = [ms(p[0]) for p in points]
    return _greedy(len(points), t, lambda i, k: equirect(points[i][1:], points[k][1:]) <= r, ms(gap), ms(t_min))


def wifi_staypoints(snaps, jmax, gap, t_min):
    """snaps: [(t, set)] -> inclusive index ranges."""
    t = [ms(s[0]) for s in snaps]
    limit = Fraction(jmax).limit_denominator(10 ** 6)
    return _greedy(len(snaps), t, lambda i, k: jaccard(snaps[i][1], snaps[k][1]) <= limit, ms(gap), ms(t_min))


def characteristic(sets):
    n = len(sets)
    aps = set().union(*sets)
    return {ap for ap in aps if sum(ap in s for s in sets) * 2 >= n}


def auc_pairs(scores, labels):
    """Mann-Whitney: P(score_pos > score_neg) + 0.5 P(tie)."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    acc = Fraction(0)
    for p in pos:
        for q in neg:
            acc += 1 if p > q else Fraction(1, 2) if p == q else 0
    return float(acc / (len(pos) * len(neg)))


# ---- random inputs --------------------------------------------------------------

_GAPS = (60.0, 60.0, 60.0, 30.0, 120.0, 299.999, 300.0, 300.001, 301.0, 900.0)


def _next_gap(rng):
    if rng.random() < 0.25:
        return float(round(rng.uniform(0.5, 400.0), 3))
    return _GAPS[int(rng.integers(len(_GAPS)))]


def random_gps_trace(rng, n):
    """Dwell/move mixture around Helsinki with jitter near the 100 m radius."""
    t = 1_700_000_000.0 + float(rng.integers(0, 1000))
    lat, lon = 60.17, 24.94
    out = []
    dwell = True
    for _ in range(n):
        if rng.random() < 0.1:
            dwell = not dwell
        if dwell:
            jitter = float(rng.choice([5.0, 40.0, 70.0]))
        else:
            lat += float(rng.normal(0, 150.0)) / 111_000.0
            lon += float(rng.normal(0, 150.0)) / 55_000.0
            jitter = 10.0
        la = lat + float(rng.normal(0, jitter)) / 111_000.0
        lo = lon + float(rng.normal(0, jitter)) / 55_000.0
        out.append((round(t, 3), round(la, 7), round(lo, 7)))
        t += _next_gap(rng)
    return out


def random_snapshots(rng, n, universe=8):
    t = 1_700_000_000.0
    place = set(int(x) for x in rng.choice(universe, 4, replace=False))
    out = []
    for _ in range(n):
        if rng.random() < 0.1:
            place = set(int(x) for x in rng.choice(universe, int(rng.integers(1, 6)), replace=False))
        s = {ap for ap in place if rng.random() > 0.2}
        if rng.random() < 0.3:
            s.add(int(rng.integers(universe)))
        if not s:
            s = {int(rng.integers(universe))}
        out.append((round(t, 3), frozenset(f"ap{a}" for a in s)))
        t += _next_gap(rng)
    return out
