"""Observation records and the JSON Lines trace format.

One record per line, discriminated by ``kind``::

    {"kind":"gps","t":0.0,"lat":60.17,"lon":24.94}
    {"kind":"wifi","t":0.0,"ap":"aa:bb:cc:dd:ee:ff"}
    {"kind":"bt","t":0.0,"dev":"d1","dev_class":"mobile"}
    {"kind":"feedback","t":0.0,"misuse":"safe","exposure":null}

An optional ``{"kind":"meta","user_id":...}`` line carries the user id.
Unknown keys are ignored; an unknown kind is a malformed record.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import EmptyTrace, MalformedRecord

KINDS = ("gps", "wifi", "bt", "feedback")
_KIND_ORDER = {k: i for i, k in enumerate(KINDS)}
MISUSE_VALUES = ("safe", "unsafe")
EXPOSURE_VALUES = ("home", "work", "public")
DEV_CLASSES = ("mobile", "other")

_MAC_BARE = re.compile(r"^[0-9a-f]{12}$")
_MAC_SEP = re.compile(r"^[0-9a-f]{1,2}([:-][0-9a-f]{1,2}){5}$")


def normalize_ap(ap: str) -> str:
    """Lowercase colon-separated MAC; non-MAC identifiers are only lowercased."""
    s = ap.strip().lower()
    if _MAC_BARE.match(s):
        return ":".join(s[i:i + 2] for i in range(0, 12, 2))
    if _MAC_SEP.match(s):
        return ":".join(part.zfill(2) for part in re.split(r"[:-]", s))
    return s


@dataclass(frozen=True, slots=True)
class GpsObservation:
    t: float
    lat: float
    lon: float
    kind = "gps"


@dataclass(frozen=True, slots=True)
class WifiObservation:
    t: float
    ap: str
    kind = "wifi"


@dataclass(frozen=True, slots=True)
class BtObservation:
    t: float
    dev: str
    dev_class: str = "mobile"
    kind = "bt"


@dataclass(frozen=True, slots=True)
class FeedbackObservation:
    t: float
    misuse: str | None = None
    exposure: str | None = None
    kind = "feedback"


Observation = Union[GpsObservation, WifiObservation, BtObservation, FeedbackObservation]


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    reason: str


@dataclass(frozen=True)
class ObservationSequence:
    records: tuple[Observation, ...]
    user_id: str = ""
    malformed: tuple[ParseIssue, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Observation]:
        return iter(self.records)

    def of_kind(self, kind: str) -> list:
        return [r for r in self.records if r.kind == kind]

    @property
    def gps(self) -> list[GpsObservation]:
        return self.of_kind("gps")

    @property
    def wifi(self) -> list[WifiObservation]:
        return self.of_kind("wifi")

    @property
    def bt(self) -> list[BtObservation]:
        return self.of_kind("bt")

    @property
    def feedback(self) -> list[FeedbackObservation]:
        return self.of_kind("feedback")


def _number(obj: dict, key: str) -> float:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{key!r} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"{key!r} must be finite")
    return v


def _string(obj: dict, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str) or not v.strip():
        raise ValueError(f"{key!r} must be a non-empty string")
    return v


def _choice(obj: dict, key: str, allowed: tuple[str, ...], optional: bool = False):
    v = obj.get(key)
    if v is None and optional:
        return None
    if v not in allowed:
        raise ValueError(f"{key!r} must be one of {allowed}, got {v!r}")
    return v


def record_from_dict(obj: dict) -> Observation:
    """Build one observation from a decoded JSON object; raises ValueError."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    t = _number(obj, "t")
    if t < 0:
        raise ValueError("'t' must be >= 0")
    if kind == "gps":
        lat, lon = _number(obj, "lat"), _number(obj, "lon")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"lat {lat} out of range")
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"lon {lon} out of range")
        return GpsObservation(t, lat, lon)
    if kind == "wifi":
        return WifiObservation(t, normalize_ap(_string(obj, "ap")))
    if kind == "bt":
        return BtObservation(t, _string(obj, "dev"), _choice(obj, "dev_class", DEV_CLASSES))
    misuse = _choice(obj, "misuse", MISUSE_VALUES, optional=True)
    exposure = _choice(obj, "exposure", EXPOSURE_VALUES, optional=True)
    if misuse is None and exposure is None:
        raise ValueError("feedback needs misuse or exposure")
    return FeedbackObservation(t, misuse, exposure)


def record_to_dict(rec: Observation) -> dict:
    if rec.kind == "gps":
        return {"kind": "gps", "t": rec.t, "lat": rec.lat, "lon": rec.lon}
    if rec.kind == "wifi":
        return {"kind": "wifi", "t": rec.t, "ap": rec.ap}
    if rec.kind == "bt":
        return {"kind": "bt", "t": rec.t, "dev": rec.dev, "dev_class": rec.dev_class}
    return {"kind": "feedback", "t": rec.t, "misuse": rec.misuse, "exposure": rec.exposure}


def sort_records(records: Iterable[Observation]) -> tuple[Observation, ...]:
    """Stable order by (t, kind); ties keep input order."""
    return tuple(sorted(records, key=lambda r: (r.t, _KIND_ORDER[r.kind])))


def parse_trace(lines: Iterable[str], strict: bool = False, user_id: str | None = None) -> ObservationSequence:
    """Parse JSON Lines into a time-ordered sequence.

    Lenient mode (default) skips bad lines and lists them in ``malformed``;
    strict mode raises :class:`MalformedRecord` on the first one.
    """
    records: list[Observation] = []
    issues: list[ParseIssue] = []
    uid = user_id
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if isinstance(obj, dict) and obj.get("kind") == "meta":
                if uid is None and isinstance(obj.get("user_id"), str):
                    uid = obj["user_id"]
                continue
            records.append(record_from_dict(obj))
        except ValueError as exc:  # json.JSONDecodeError is a ValueError
            if strict:
                raise MalformedRecord(line_no, str(exc)) from None
            issues.append(ParseIssue(line_no, str(exc)))
    if not records:
        raise EmptyTrace("trace contains no valid records")
    return ObservationSequence(sort_records(records), uid or "", tuple(issues))


def read_trace(path, strict: bool = False) -> ObservationSequence:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh, strict=strict)


def serialize_trace(seq: ObservationSequence) -> str:
    out = []
    if seq.user_id:
        out.append(json.dumps({"kind": "meta", "user_id": seq.user_id}, separators=(",", ":")))
    out.extend(json.dumps(record_to_dict(r), separators=(",", ":")) for r in seq.records)
    return "\n".join(out) + "\n"


def write_trace(seq: ObservationSequence, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_trace(seq))


def _identity(rec: Observation):
    if rec.kind == "wifi":
        return rec.ap
    if rec.kind == "bt":
        return rec.dev
    return None


@dataclass
class ValidationReport:
    counts: dict[str, int]
    duplicates: dict[str, list[float]]
    gaps: list[tuple[str, float, float]]
    malformed: list[ParseIssue]

    @property
    def ok(self) -> bool:
        return not self.malformed and not any(self.duplicates.values())

    def to_dict(self) -> dict:
        return {
            "counts": self.counts,
            "duplicates": self.duplicates,
            "gaps": [{"kind": k, "t_prev": a, "t_next": b} for k, a, b in self.gaps],
            "malformed": [{"line": i.line_no, "reason": i.reason} for i in self.malformed],
        }


def validate_sequence(seq: ObservationSequence, gap_threshold: float = 300.0,
                      gap_kinds: tuple[str, ...] = ("gps", "wifi")) -> ValidationReport:
    """Report per-kind counts, duplicated observations and sampling gaps.

    A duplicate is a repeated (t, identity) pair within one kind, so the APs of
    one WiFi scan sharing a timestamp are not flagged.
    """
    counts = {k: 0 for k in KINDS}
    seen: dict[str, Counter] = {k: Counter() for k in KINDS}
    last_t: dict[str, float] = {}
    gaps = []
    for rec in seq.records:
        counts[rec.kind] += 1
        seen[rec.kind][(rec.t, _identity(rec))] += 1
        if rec.kind in gap_kinds:
            prev = last_t.get(rec.kind)
            if prev is not None and rec.t - prev > gap_threshold:
                gaps.append((rec.kind, prev, rec.t))
            last_t[rec.kind] = rec.t
    duplicates = {k: sorted({key[0] for key, n in c.items() if n > 1}) for k, c in seen.items()}
    return ValidationReport(counts, duplicates, gaps, list(seq.malformed))


def to_ms(t: float) -> int:
    """Timestamp in integer milliseconds; all duration arithmetic happens on these."""
    return int(round(t * 1000.0))
