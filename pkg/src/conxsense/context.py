"""Visits, Bluetooth encounters, location/device contexts and context profiles."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .coi import GpsCoi, WifiCoi
from .geo import offset
from .staypoints import StayPointParams, encode_snapshots, group_wifi_snapshots
from .trace import ObservationSequence, to_ms


@dataclass(frozen=True)
class ContextParams:
    # no paper value for the visit gap; mirrors the encounter gap
    eps_visit: float = 300.0
    eps_enc: float = 300.0
    f_min_famdev: int = 5
    t_min_famdev: float = 1800.0
    visit_jaccard_max: float = 0.5
    visit_gap_strict: bool = False
    enc_gap_strict: bool = True
    # widen GPS rectangles by this many metres per side when testing membership
    gps_visit_margin_m: float = 0.0

    def __post_init__(self):
        if min(self.eps_visit, self.eps_enc, self.t_min_famdev) <= 0 or self.f_min_famdev < 1:
            raise ValueError("context parameters must be positive")
        if self.gps_visit_margin_m < 0:
            raise ValueError("gps_visit_margin_m must be >= 0")


@dataclass(frozen=True)
class Visit:
    coi_id: str
    t_start: float
    t_end: float
    kind: str = "gps"

    @property
    def duration_ms(self) -> int:
        return to_ms(self.t_end) - to_ms(self.t_start)

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0


@dataclass(frozen=True)
class Encounter:
    dev: str
    t_start: float
    t_end: float

    @property
    def duration_ms(self) -> int:
        return to_ms(self.t_end) - to_ms(self.t_start)

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000.0


@dataclass(frozen=True)
class CoiStats:
    kind: str
    visits: int = 0
    dur_ms: int = 0

    @property
    def dur_s(self) -> float:
        return self.dur_ms / 1000.0


@dataclass(frozen=True)
class DeviceStats:
    enc: int = 0
    dur_ms: int = 0

    @property
    def dur_s(self) -> float:
        return self.dur_ms / 1000.0


@dataclass(frozen=True)
class CoiProfile:
    stats: dict[str, CoiStats] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {cid: {"kind": s.kind, "visits": s.visits, "dur_s": s.dur_s}
                for cid, s in sorted(self.stats.items())}


@dataclass(frozen=True)
class DeviceProfile:
    stats: dict[str, DeviceStats] = field(default_factory=dict)
    familiar: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {dev: {"enc": s.enc, "dur_s": s.dur_s, "familiar": dev in self.familiar}
                for dev, s in sorted(self.stats.items())}


def _runs(times_ms: np.ndarray, gap_ms: int, strict: bool):
    return kernels.chain_runs(times_ms, gap_ms, strict)


def detect_visits(seq: ObservationSequence, cois: Sequence[GpsCoi | WifiCoi], p: ContextParams = ContextParams(),
                  t_max_wifi: float = 10.0) -> list[Visit]:
    """Chain in-CoI observations into visits.

    GPS fixes count when strictly inside the rectangle; WiFi snapshots count
    when their Jaccard distance to the CoI's AP set is within
    ``visit_jaccard_max``. Single-observation visits have duration 0.
    """
    gap = to_ms(p.eps_visit)
    out: list[Visit] = []
    gps_cois = [c for c in cois if c.kind == "gps"]
    wifi_cois = [c for c in cois if c.kind == "wifi"]

    if gps_cois:
        gps = seq.gps
        t = np.array([to_ms(g.t) for g in gps], dtype=np.int64)
        lat = np.array([g.lat for g in gps], dtype=np.float64)
        lon = np.array([g.lon for g in gps], dtype=np.float64)
        for c in gps_cois:
            lat_min, lon_min, lat_max, lon_max = c.bounds
            if p.gps_visit_margin_m > 0:
                lat_min, lon_min = offset(lat_min, lon_min, -p.gps_visit_margin_m, -p.gps_visit_margin_m)
                lat_max, lon_max = offset(lat_max, lon_max, p.gps_visit_margin_m, p.gps_visit_margin_m)
            idx = np.flatnonzero((lat_min < lat) & (lon_min < lon) & (lat < lat_max) & (lon < lon_max))
            for a, b in _runs(t[idx], gap, p.visit_gap_strict):
                out.append(Visit(c.id, gps[idx[a]].t, gps[idx[b]].t, "gps"))

    if wifi_cois:
        snaps = group_wifi_snapshots(seq.wifi, StayPointParams(t_max_wifi=t_max_wifi))
        vocab = {ap: i for i, ap in enumerate(sorted({ap for s in snaps for ap in s.aps}
                                                     | {ap for c in wifi_cois for ap in c.aps}))}
        indptr, ids, _ = encode_snapshots(snaps, vocab)
        t = np.array([to_ms(s.t) for s in snaps], dtype=np.int64)
        for c in wifi_cois:
            target = np.array(sorted(vocab[ap] for ap in c.aps), dtype=np.int64)
            d = np.asarray(kernels.jaccard_to_set(indptr, ids, target))
            idx = np.flatnonzero(d <= p.visit_jaccard_max)
            for a, b in _runs(t[idx], gap, p.visit_gap_strict):
                out.append(Visit(c.id, snaps[idx[a]].t, snaps[idx[b]].t, "wifi"))

    out.sort(key=lambda v: (v.t_start, v.coi_id))
    return out


def detect_encounters(seq: ObservationSequence, p: ContextParams = ContextParams()) -> list[Encounter]:
    """Per mobile-class device, chain sightings separated by less than ``eps_enc``."""
    by_dev: dict[str, list[float]] = {}
    for b in seq.bt:
        if b.dev_class == "mobile":
            by_dev.setdefault(b.dev, []).append(b.t)
    gap = to_ms(p.eps_enc)
    out = []
    for dev, ts in by_dev.items():
        ts = sorted(set(ts))
        t = np.array([to_ms(v) for v in ts], dtype=np.int64)
        for a, b in _runs(t, gap, p.enc_gap_strict):
            out.append(Encounter(dev, ts[a], ts[b]))
    out.sort(key=lambda e: (e.t_start, e.dev))
    return out


def location_context_at(t: float, visits: Iterable[Visit]) -> frozenset:
    return frozenset(v.coi_id for v in visits if v.t_start <= t <= v.t_end)


def device_context_at(t: float, encs: Iterable[Encounter]) -> frozenset:
    return frozenset(e.dev for e in encs if e.t_start <= t <= e.t_end)


def _contexts(times: Sequence[float], spans: Iterable[tuple[str, float, float]]) -> list[frozenset]:
    order = np.argsort(np.asarray(times, dtype=np.float64), kind="stable")
    ts = np.asarray(times, dtype=np.float64)[order]
    acc: list[set] = [set() for _ in range(len(ts))]
    for key, a, b in spans:
        lo = np.searchsorted(ts, a, side="left")
        hi = np.searchsorted(ts, b, side="right")
        for k in range(lo, hi):
            acc[k].add(key)
    out: list[frozenset] = [frozenset()] * len(ts)
    for rank, k in enumerate(order):
        out[k] = frozenset(acc[rank])
    return out


def location_contexts(times: Sequence[float], visits: Iterable[Visit]) -> list[frozenset]:
    """Batch form of :func:`location_context_at` for many timestamps."""
    return _contexts(times, ((v.coi_id, v.t_start, v.t_end) for v in visits))


def device_contexts(times: Sequence[float], encs: Iterable[Encounter]) -> list[frozenset]:
    return _contexts(times, ((e.dev, e.t_start, e.t_end) for e in encs))


def build_profiles(visits: Iterable[Visit], encs: Iterable[Encounter], p: ContextParams = ContextParams(),
                   cois: Sequence[GpsCoi | WifiCoi] = ()) -> tuple[CoiProfile, DeviceProfile]:
    coi_acc: dict[str, list] = {c.id: [c.kind, 0, 0] for c in cois}
    for v in visits:
        s = coi_acc.setdefault(v.coi_id, [v.kind, 0, 0])
        s[1] += 1
        s[2] += v.duration_ms
    dev_acc: dict[str, list] = {}
    for e in encs:
        s = dev_acc.setdefault(e.dev, [0, 0])
        s[0] += 1
        s[1] += e.duration_ms
    min_ms = to_ms(p.t_min_famdev)
    familiar = frozenset(d for d, (n, dur) in dev_acc.items() if n >= p.f_min_famdev and dur >= min_ms)
    coi_profile = CoiProfile({cid: CoiStats(k, n, dur) for cid, (k, n, dur) in coi_acc.items()})
    dev_profile = DeviceProfile({d: DeviceStats(n, dur) for d, (n, dur) in dev_acc.items()}, familiar)
    return coi_profile, dev_profile
