"""Seeded synthetic traces: mobility, WiFi, Bluetooth proximity, feedback and device events."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSchedule
from .features import LABEL_MAP
from .geo import equirect_m, offset
from .policy import HarnessEvent, Truth, TruthSegment
from .trace import (BtObservation, FeedbackObservation, GpsObservation, ObservationSequence, WifiObservation,
                    sort_records)

DAY = 86400.0
MINUTE = 60.0
EPOCH_2024 = 1704067200.0  # Monday 2024-01-01 00:00 UTC


@dataclass(frozen=True)
class Place:
    name: str
    lat: float
    lon: float
    aps: tuple[str, ...] = ()
    misuse: str = "unsafe"      # feedback vocabulary: safe | unsafe
    exposure: str = "public"    # home | work | public
    gps: bool = True
    background: tuple[str, ...] = ()   # non-mobile BT devices sighted here


@dataclass(frozen=True)
class Dwell:
    place: str
    start: float                # seconds after midnight
    duration: float
    days: tuple[int, ...] | None = None   # None = every day


@dataclass(frozen=True)
class Companion:
    dev: str
    place: str
    presence: float = 0.9       # chance to be there on a given dwell


@dataclass(frozen=True)
class ScenarioConfig:
    places: tuple[Place, ...]
    home: str
    dwells: tuple[Dwell, ...]
    companions: tuple[Companion, ...] = ()
    stranger_rate: float = 0.3          # new sighting bursts per public minute
    stranger_reuse: float = 0.3
    days: int = 14
    gps_sigma_m: float = 8.0
    wifi_miss: float = 0.1
    bt_miss: float = 0.1
    speed_mps: float = 200.0 / 60.0
    feedback_per_day: tuple[int, int] = (2, 3)
    waking_hours: tuple[float, float] = (7 * 3600.0, 23 * 3600.0)
    start: float = EPOCH_2024
    seed: int = 42
    name: str = "custom"

    def __post_init__(self):
        for prob in (self.wifi_miss, self.bt_miss, self.stranger_reuse):
            if not 0.0 <= prob <= 1.0:
                raise InvalidSchedule("probabilities must lie in [0, 1]")
        names = {p.name for p in self.places}
        if self.home not in names:
            raise InvalidSchedule(f"home place {self.home!r} not defined")
        for d in self.dwells:
            if d.place not in names:
                raise InvalidSchedule(f"dwell at unknown place {d.place!r}")
        if self.days < 1:
            raise InvalidSchedule("days must be >= 1")

    def place(self, name: str) -> Place:
        return next(p for p in self.places if p.name == name)


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    place: str | None           # None while travelling
    src: str | None = None
    dst: str | None = None

    @property
    def transit(self) -> bool:
        return self.place is None


def _travel_time(cfg: ScenarioConfig, a: str, b: str) -> float:
    pa, pb = cfg.place(a), cfg.place(b)
    dist = equirect_m(pa.lat, pa.lon, pb.lat, pb.lon)
    return math.ceil(dist / cfg.speed_mps / MINUTE) * MINUTE


def build_segments(cfg: ScenarioConfig) -> list[Segment]:
    """Absolute dwell/transit timeline; the user is home whenever nothing is scheduled."""
    segs: list[Segment] = []
    where, since = cfg.home, cfg.start
    for day in range(cfg.days):
        base = cfg.start + day * DAY
        todays = sorted((d for d in cfg.dwells if d.days is None or day in d.days), key=lambda d: d.start)
        for d in todays:
            t0 = base + d.start
            if d.place == where:
                continue
            depart = t0 - _travel_time(cfg, where, d.place)
            if depart < since:
                raise InvalidSchedule(f"day {day}: cannot reach {d.place!r} by {d.start}s")
            if depart > since:
                segs.append(Segment(since, depart, where))
            segs.append(Segment(depart, t0, None, where, d.place))
            t1 = t0 + d.duration
            segs.append(Segment(t0, t1, d.place))
            where, since = d.place, t1
            # head home unless the next dwell starts too soon to make the round trip worthwhile
            nxt = [n for n in todays if n.start > d.start]
            home_trip = _travel_time(cfg, d.place, cfg.home)
            if not nxt or base + nxt[0].start - t1 > home_trip + _travel_time(cfg, cfg.home, nxt[0].place):
                segs.append(Segment(t1, t1 + home_trip, None, d.place, cfg.home))
                where, since = cfg.home, t1 + home_trip
    end = cfg.start + cfg.days * DAY
    if since < end:
        segs.append(Segment(since, end, where))
    for a, b in zip(segs, segs[1:]):
        if b.t_start < a.t_end:
            raise InvalidSchedule("overlapping schedule")
    return [s for s in segs if s.t_end > s.t_start]


def _segment_index(segs: Sequence[Segment]):
    starts = np.array([s.t_start for s in segs])

    def find(t: float) -> Segment:
        return segs[int(np.searchsorted(starts, t, side="right")) - 1]
    return find


def _street_aps(src: str, dst: str, bucket: int) -> list[str]:
    out = []
    for k in range(3):
        h = _stable_hash(f"{src}>{dst}|{bucket}|{k}")
        out.append(":".join(f"{(h >> (8 * i)) & 0xff:02x}" for i in range(6)))
    return out


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha1(text.encode()).digest()[:8], "little")


def _position(cfg: ScenarioConfig, seg: Segment, t: float) -> tuple[float, float, float]:
    """(lat, lon, metres along route) at time t."""
    if not seg.transit:
        p = cfg.place(seg.place)
        return p.lat, p.lon, 0.0
    a, b = cfg.place(seg.src), cfg.place(seg.dst)
    frac = (t - seg.t_start) / (seg.t_end - seg.t_start)
    lat = a.lat + frac * (b.lat - a.lat)
    lon = a.lon + frac * (b.lon - a.lon)
    return lat, lon, frac * equirect_m(a.lat, a.lon, b.lat, b.lon)


@dataclass
class Scenario:
    config: ScenarioConfig
    trace: ObservationSequence
    segments: list[Segment]
    truth: Truth
    events: list[HarnessEvent] = field(default_factory=list)


def _truth(cfg: ScenarioConfig, segs: Sequence[Segment]) -> Truth:
    out = []
    for s in segs:
        if s.transit:
            misuse, exposure, name = "unsafe", "public", "transit"
        else:
            p = cfg.place(s.place)
            misuse, exposure, name = p.misuse, p.exposure, p.name
        out.append(TruthSegment(s.t_start, s.t_end, name, LABEL_MAP["misuse"][misuse],
                                LABEL_MAP["exposure"][exposure]))
    return Truth(out)


def _feedback(cfg: ScenarioConfig, segs: Sequence[Segment], rng: np.random.Generator) -> list[FeedbackObservation]:
    """2-3 labels a day, drawn inside dwell windows during waking hours.

    The first comes from a private place, the second from a public one when the
    day has any, the rest from any dwell.
    """
    out = []
    lo_h, hi_h = cfg.waking_hours
    for day in range(cfg.days):
        base = cfg.start + day * DAY
        windows = []
        for s in segs:
            if s.transit:
                continue
            a, b = max(s.t_start, base + lo_h), min(s.t_end, base + hi_h)
            margin = min(120.0, (b - a) / 4.0)
            if b - a >= 5 * MINUTE:
                windows.append((a + margin, b - margin, cfg.place(s.place)))
        if not windows:
            continue
        private = [w for w in windows if w[2].exposure != "public"]
        public = [w for w in windows if w[2].exposure == "public"]
        n = int(rng.integers(cfg.feedback_per_day[0], cfg.feedback_per_day[1] + 1))
        for k in range(n):
            pool = private if k == 0 and private else public if k == 1 and public else windows
            a, b, place = pool[int(rng.integers(len(pool)))]
            t = round(float(rng.uniform(a, b)), 3)
            out.append(FeedbackObservation(t, place.misuse, place.exposure))
    return out


def generate_scenario(cfg: ScenarioConfig, with_events: bool = True) -> Scenario:
    segs = build_segments(cfg)
    find = _segment_index(segs)
    rng = np.random.default_rng(cfg.seed)
    records = []
    stranger_pool: list[str] = []
    stranger_count = 0
    active_strangers: dict[str, float] = {}
    present: dict[tuple[str, float], bool] = {}
    n_ticks = int(cfg.days * DAY / MINUTE)
    for k in range(n_ticks):
        t = cfg.start + k * MINUTE
        seg = find(t)
        place = None if seg.transit else cfg.place(seg.place)
        lat, lon, along = _position(cfg, seg, t)
        if seg.transit or place.gps:
            north, east = (rng.normal(0.0, cfg.gps_sigma_m, 2) if cfg.gps_sigma_m > 0 else (0.0, 0.0))
            plat, plon = offset(lat, lon, float(north), float(east))
            records.append(GpsObservation(t, round(plat, 7), round(plon, 7)))
        if place is not None:
            aps = [ap for ap in place.aps if not (cfg.wifi_miss > 0 and rng.random() < cfg.wifi_miss)]
        else:
            aps = _street_aps(seg.src, seg.dst, int(along // 150.0))
        records.extend(WifiObservation(t, ap) for ap in sorted(set(aps)))
        if place is not None:
            for c in cfg.companions:
                if c.place != place.name:
                    continue
                key = (c.dev, seg.t_start)
                if key not in present:
                    present[key] = bool(rng.random() < c.presence)
                if present[key] and not (cfg.bt_miss > 0 and rng.random() < cfg.bt_miss):
                    records.append(BtObservation(t, c.dev, "mobile"))
            for dev in place.background:
                records.append(BtObservation(t, dev, "other"))
        if place is None or place.exposure == "public":
            for _ in range(int(rng.poisson(cfg.stranger_rate))):
                if stranger_pool and rng.random() < cfg.stranger_reuse:
                    dev = stranger_pool[int(rng.integers(len(stranger_pool)))]
                else:
                    stranger_count += 1
                    dev = f"stranger-{stranger_count:05d}"
                    stranger_pool.append(dev)
                active_strangers[dev] = t + MINUTE * int(rng.integers(0, 4))
        else:
            active_strangers.clear()
        for dev in sorted(active_strangers):
            if active_strangers[dev] < t:
                del active_strangers[dev]
            elif not (cfg.bt_miss > 0 and rng.random() < cfg.bt_miss):
                records.append(BtObservation(t, dev, "mobile"))
    records.extend(_feedback(cfg, segs, rng))
    trace = ObservationSequence(sort_records(records), f"{cfg.name}-{cfg.seed}")
    truth = _truth(cfg, segs)
    events = generate_events(cfg, segs) if with_events else []
    return Scenario(cfg, trace, segs, truth, events)


def generate_synthetic_trace(cfg: ScenarioConfig) -> ObservationSequence:
    return generate_scenario(cfg, with_events=False).trace


def generate_events(cfg: ScenarioConfig, segs: Sequence[Segment]) -> list[HarnessEvent]:
    """Wakes every ~30 min while awake, a weekly reboot, and periodic sensor access attempts.

    Uses its own random stream so the trace is unaffected.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    lo_h, hi_h = cfg.waking_hours
    out = []
    for day in range(cfg.days):
        base = cfg.start + day * DAY
        if day % 7 == 3:
            out.append(HarnessEvent(base + lo_h - 600.0, "reboot"))
        t = base + lo_h
        while t < base + hi_h:
            out.append(HarnessEvent(round(t + float(rng.uniform(0, 300)), 3), "wake"))
            t += 1800.0
        t = base + lo_h
        while t < base + hi_h:
            out.append(HarnessEvent(round(t + 7.0, 3), "access", "thirdparty.placeraider", "camera", "take_picture"))
            out.append(HarnessEvent(round(t + 8.0, 3), "access", "thirdparty.placeraider", "accelerometer", "read"))
            if int((t - base) // 600) % 3 == 0:
                out.append(HarnessEvent(round(t + 9.0, 3), "access", "system.camera", "camera", "take_picture"))
                out.append(HarnessEvent(round(t + 10.0, 3), "access", "thirdparty.game", "gps", "read"))
            t += 600.0
    return sorted(out, key=lambda e: e.t)


def events_to_jsonl(events: Sequence[HarnessEvent], truth: Truth) -> str:
    lines = [json.dumps({"kind": "truth", "t_start": s.t_start, "t_end": s.t_end, "place": s.place,
                         "misuse": s.misuse, "exposure": s.exposure}, separators=(",", ":"))
             for s in truth.segments]
    lines += [json.dumps(e.to_dict(), separators=(",", ":")) for e in events]
    return "\n".join(lines) + "\n"


def events_from_jsonl(lines) -> tuple[list[HarnessEvent], Truth]:
    events, segs = [], []
    for line in lines:
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj["kind"] == "truth":
            segs.append(TruthSegment(obj["t_start"], obj["t_end"], obj["place"], obj["misuse"], obj["exposure"]))
        else:
            events.append(HarnessEvent(obj["t"], obj["kind"], obj.get("app"), obj.get("sensor"), obj.get("op")))
    return events, Truth(segs)


# ---- built-in scenarios -----------------------------------------------------

def _aps(prefix: int, n: int) -> tuple[str, ...]:
    return tuple(f"02:00:00:{prefix:02x}:00:{i:02x}" for i in range(n))


def commuter(days: int = 14, seed: int = 42, **overrides) -> ScenarioConfig:
    """Home, weekday office, a grocery store after work and a weekend sports facility."""
    home = (60.1700, 24.9400)
    weekdays = tuple(d for d in range(days) if d % 7 < 5)
    weekends = tuple(d for d in range(days) if d % 7 >= 5)
    store_days = weekdays[:10]
    places = (
        Place("home", *home, aps=_aps(1, 6), misuse="safe", exposure="home", background=("home-tv",)),
        Place("work", *offset(*home, 300.0, 6000.0), aps=_aps(2, 10), misuse="safe", exposure="work",
              background=("work-printer",)),
        Place("store", *offset(*home, 300.0, 1500.0), aps=_aps(3, 4), misuse="unsafe", exposure="public"),
        Place("gym", *offset(*home, -400.0, -2000.0), aps=_aps(4, 3), misuse="unsafe", exposure="public"),
    )
    dwells = (
        Dwell("work", 8.5 * 3600, 8 * 3600, weekdays),
        Dwell("store", 17 * 3600, 15 * 60, store_days),
        Dwell("gym", 10 * 3600, 90 * 60, weekends),
    )
    companions = (Companion("colleague-a", "work"), Companion("colleague-b", "work"))
    kwargs = dict(places=places, home="home", dwells=dwells, companions=companions, days=days, seed=seed,
                  name="commuter")
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)


def grocery_store(visits: int = 10, spread_m: float = 30.0, seed: int = 7) -> list[GpsObservation]:
    """GPS fixes for repeated 15-minute store visits whose dwell spots lie within ``spread_m``."""
    rng = np.random.default_rng(seed)
    store = (60.1727, 24.9670)
    out = []
    half = spread_m / 2.0
    for v in range(visits):
        spot = offset(*store, float(rng.uniform(-half, half)), float(rng.uniform(-half, half)))
        t0 = EPOCH_2024 + v * DAY + 17 * 3600
        for k in range(16):
            jitter = rng.uniform(-3.0, 3.0, 2)
            lat, lon = offset(*spot, float(jitter[0]), float(jitter[1]))
            out.append(GpsObservation(t0 + k * MINUTE, lat, lon))
    return out


SCENARIOS = {"commuter": commuter}
