"""GPS stay points, WiFi snapshots and WiFi stay points."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BothEmpty, EmptyMembers
from .trace import GpsObservation, WifiObservation, to_ms


@dataclass(frozen=True)
class StayPointParams:
    r_sp: float = 100.0
    t_min_sp: float = 600.0
    t_gap_sp: float = 300.0
    t_max_wifi: float = 10.0
    jaccard_max: float = 0.5

    def __post_init__(self):
        for name in ("r_sp", "t_min_sp", "t_gap_sp", "t_max_wifi", "jaccard_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.jaccard_max > 1:
            raise ValueError("jaccard_max must be in (0, 1]")


@dataclass(frozen=True)
class GpsStayPoint:
    members: tuple[GpsObservation, ...]
    t_start: float
    t_end: float
    centroid: tuple[float, float]

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0

    @property
    def duration_ms(self) -> int:
        return to_ms(self.t_end) - to_ms(self.t_start)

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "duration_s": self.duration,
                "lat": self.centroid[0], "lon": self.centroid[1], "n": len(self.members)}


@dataclass(frozen=True)
class WifiSnapshot:
    t: float
    aps: frozenset


@dataclass(frozen=True)
class WifiStayPoint:
    snapshots: tuple[WifiSnapshot, ...]
    t_start: float
    t_end: float
    char_set: frozenset

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0

    @property
    def duration_ms(self) -> int:
        return to_ms(self.t_end) - to_ms(self.t_start)

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "duration_s": self.duration,
                "char_set": sorted(self.char_set), "n": len(self.snapshots)}


def jaccard_distance(a, b) -> float:
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        raise BothEmpty("Jaccard distance of two empty sets is undefined")
    inter = len(a & b)
    return (union - inter) / union


def staypoint_centroid(members: Sequence[GpsObservation]) -> tuple[float, float]:
    if not members:
        raise EmptyMembers("centroid of an empty stay point")
    n = len(members)
    return math.fsum(m.lat for m in members) / n, math.fsum(m.lon for m in members) / n


def extract_gps_staypoints(gps: Sequence[GpsObservation], p: StayPointParams = StayPointParams()) -> list[GpsStayPoint]:
    """Greedy anchor-based segmentation of time-ordered GPS fixes.

    A segment grows while each fix is within ``r_sp`` of the anchor (its first
    fix) and within ``t_gap_sp`` of the previous fix. Segments shorter than
    ``t_min_sp`` are dropped and the anchor advances by one fix.
    """
    if not gps:
        return []
    t = np.fromiter((to_ms(g.t) for g in gps), dtype=np.int64, count=len(gps))
    lat = np.fromiter((g.lat for g in gps), dtype=np.float64, count=len(gps))
    lon = np.fromiter((g.lon for g in gps), dtype=np.float64, count=len(gps))
    segs = kernels.gps_segments(t, lat, lon, float(p.r_sp), to_ms(p.t_gap_sp), to_ms(p.t_min_sp))
    out = []
    for i, j in segs:
        members = tuple(gps[i:j + 1])
        out.append(GpsStayPoint(members, members[0].t, members[-1].t, staypoint_centroid(members)))
    return out


def group_wifi_snapshots(wifi: Sequence[WifiObservation], p: StayPointParams = StayPointParams()) -> list[WifiSnapshot]:
    if not wifi:
        return []
    t = np.fromiter((to_ms(w.t) for w in wifi), dtype=np.int64, count=len(wifi))
    starts = list(kernels.snapshot_starts(t, to_ms(p.t_max_wifi))) + [len(wifi)]
    return [WifiSnapshot(wifi[a].t, frozenset(w.ap for w in wifi[a:b]))
            for a, b in zip(starts, starts[1:])]


def characteristic_set(snaps: Sequence[WifiSnapshot]) -> frozenset:
    """APs seen in at least half of the snapshots (exactly half counts)."""
    counts: dict[str, int] = {}
    for s in snaps:
        for ap in s.aps:
            counts[ap] = counts.get(ap, 0) + 1
    n = len(snaps)
    return frozenset(ap for ap, c in counts.items() if 2 * c >= n)


def encode_snapshots(snaps: Sequence[WifiSnapshot], vocab: dict | None = None):
    """CSR encoding (indptr, ids) of snapshot AP sets, ids sorted within each row."""
    if vocab is None:
        vocab = {ap: i for i, ap in enumerate(sorted({ap for s in snaps for ap in s.aps}))}
    indptr = np.zeros(len(snaps) + 1, dtype=np.int64)
    rows = []
    for k, s in enumerate(snaps):
        row = sorted(vocab[ap] for ap in s.aps if ap in vocab)
        rows.extend(row)
        indptr[k + 1] = len(rows)
    return indptr, np.asarray(rows, dtype=np.int64), vocab


def extract_wifi_staypoints(snaps: Sequence[WifiSnapshot], p: StayPointParams = StayPointParams()) -> list[WifiStayPoint]:
    """Anchor-based segmentation of snapshots by Jaccard distance to the first snapshot."""
    if not snaps:
        return []
    indptr, ids, _ = encode_snapshots(snaps)
    t = np.fromiter((to_ms(s.t) for s in snaps), dtype=np.int64, count=len(snaps))
    segs = kernels.wifi_segments(t, indptr, ids, float(p.jaccard_max), to_ms(p.t_gap_sp), to_ms(p.t_min_sp))
    out = []
    for i, j in segs:
        members = tuple(snaps[i:j + 1])
        out.append(WifiStayPoint(members, members[0].t, members[-1].t, characteristic_set(members)))
    return out
