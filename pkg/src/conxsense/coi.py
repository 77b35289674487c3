"""Aggregation of stay points into Contexts-of-Interest (CoIs)."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from .geo import box_size_m
from .staypoints import GpsStayPoint, WifiStayPoint
from .trace import to_ms


@dataclass(frozen=True)
class CoiParams:
    gps_max: float = 100.0
    f_min_coi: int = 5
    t_min_coi: float = 1800.0
    # "more than f_min_coi" for GPS areas, "at least f_min_coi" for WiFi sets
    gps_freq_strict: bool = True
    wifi_freq_strict: bool = False

    def __post_init__(self):
        if not self.gps_max > 0 or not self.t_min_coi > 0:
            raise ValueError("gps_max and t_min_coi must be > 0")
        if self.f_min_coi < 1:
            raise ValueError("f_min_coi must be >= 1")


@dataclass(frozen=True)
class GpsCoi:
    id: str
    bounds: tuple[float, float, float, float]  # lat_min, lon_min, lat_max, lon_max
    member_staypoints: tuple[GpsStayPoint, ...]
    kind = "gps"

    @property
    def total_duration_ms(self) -> int:
        return sum(sp.duration_ms for sp in self.member_staypoints)

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": "gps", "bounds": list(self.bounds),
                "visits": len(self.member_staypoints), "dur_s": self.total_duration_ms / 1000.0}


@dataclass(frozen=True)
class WifiCoi:
    id: str
    aps: frozenset
    member_staypoints: tuple[WifiStayPoint, ...]
    kind = "wifi"

    @property
    def total_duration_ms(self) -> int:
        return sum(sp.duration_ms for sp in self.member_staypoints)

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": "wifi", "aps": sorted(self.aps),
                "visits": len(self.member_staypoints), "dur_s": self.total_duration_ms / 1000.0}


def _digest(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


def gps_coi_id(bounds) -> str:
    return "gps-" + _digest(",".join(f"{round(v, 6):.6f}" for v in bounds))


def wifi_coi_id(aps) -> str:
    return "wifi-" + _digest(",".join(sorted(aps)))


def _frequent(count: int, f_min: int, strict: bool) -> bool:
    return count > f_min if strict else count >= f_min


def _fits(bounds, gps_max: float) -> bool:
    w, h = box_size_m(*bounds)
    return w <= gps_max and h <= gps_max


def detect_gps_cois(sps: Sequence[GpsStayPoint], p: CoiParams = CoiParams()) -> list[GpsCoi]:
    """First-fit box growing over chronologically ordered stay-point centroids.

    Each unassigned centroid seeds a box; later unassigned centroids join when
    the enlarged box still fits in ``gps_max`` x ``gps_max`` meters. A box that
    passes the visit-count and total-duration thresholds becomes a CoI and its
    stay points are consumed; a failing box releases them.
    """
    assigned = [False] * len(sps)
    min_ms = to_ms(p.t_min_coi)
    out = []
    for s, seed in enumerate(sps):
        if assigned[s]:
            continue
        lat, lon = seed.centroid
        box = (lat, lon, lat, lon)
        members = [s]
        for k in range(s + 1, len(sps)):
            if assigned[k]:
                continue
            la, lo = sps[k].centroid
            grown = (min(box[0], la), min(box[1], lo), max(box[2], la), max(box[3], lo))
            if _fits(grown, p.gps_max):
                box = grown
                members.append(k)
        dur = sum(sps[k].duration_ms for k in members)
        if _frequent(len(members), p.f_min_coi, p.gps_freq_strict) and dur >= min_ms:
            for k in members:
                assigned[k] = True
            out.append(GpsCoi(gps_coi_id(box), box, tuple(sps[k] for k in members)))
    return out


def detect_wifi_cois(wsps: Sequence[WifiStayPoint], p: CoiParams = CoiParams()) -> list[WifiCoi]:
    """Group WiFi stay points by identical characteristic set."""
    groups: dict[frozenset, list[WifiStayPoint]] = {}
    for sp in wsps:
        if sp.char_set:
            groups.setdefault(sp.char_set, []).append(sp)
    min_ms = to_ms(p.t_min_coi)
    out = []
    for aps, members in groups.items():
        dur = sum(m.duration_ms for m in members)
        if _frequent(len(members), p.f_min_coi, p.wifi_freq_strict) and dur >= min_ms:
            out.append(WifiCoi(wifi_coi_id(aps), aps, tuple(sorted(members, key=lambda m: (m.t_start, m.t_end)))))
    return sorted(out, key=lambda c: c.id)
