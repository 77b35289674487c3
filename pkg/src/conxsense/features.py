"""The eight context features and labeled datasets built from user feedback."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .coi import GpsCoi, WifiCoi
from .context import (CoiProfile, ContextParams, DeviceProfile, build_profiles, detect_encounters,
                      detect_visits, device_contexts, location_contexts)
from .errors import NoFeedback
from .trace import ObservationSequence, to_ms

FEATURE_NAMES = (
    "gps_max_dur",
    "gps_max_dur_visits",
    "wifi_max_dur",
    "wifi_max_dur_visits",
    "bt_num",
    "bt_fam",
    "bt_fam_avg_time",
    "bt_fam_avg_freq",
)
TASKS = ("misuse", "exposure")
LABEL_MAP = {
    "misuse": {"safe": "low_risk", "unsafe": "high_risk"},
    "exposure": {"public": "low_exposure", "home": "high_exposure", "work": "high_exposure"},
}
# protections are relaxed only for the positive class
POSITIVE = {"misuse": "low_risk", "exposure": "low_exposure"}
NEGATIVE = {"misuse": "high_risk", "exposure": "high_exposure"}
CSV_HEADER = ("t",) + FEATURE_NAMES + ("task", "label")


@dataclass(frozen=True)
class FeatureVector:
    t: float
    f: tuple[float, ...]

    def as_dict(self) -> dict:
        return dict(zip(FEATURE_NAMES, self.f))


@dataclass(frozen=True)
class LabeledFeatureVector:
    fv: FeatureVector
    task: str
    label: str

    @property
    def t(self) -> float:
        return self.fv.t


def _max_dur(coi_profile: CoiProfile, ids: Iterable[str], kind: str) -> tuple[float, float]:
    best = None
    for cid in ids:
        s = coi_profile.stats.get(cid)
        if s is None or s.kind != kind:
            continue
        key = (-s.dur_ms, cid)
        if best is None or key < best[0]:
            best = (key, s)
    if best is None:
        return 0.0, 0.0
    return best[1].dur_s, float(best[1].visits)


def compute_features(t: float, coi_profile: CoiProfile, device_profile: DeviceProfile,
                     loc_ctx: Iterable[str], dev_ctx: Iterable[str]) -> FeatureVector:
    """Feature vector at ``t``; durations in seconds.

    Among CoIs of equal total duration the smallest id supplies the visit count.
    """
    loc_ctx = set(loc_ctx)
    dev_ctx = set(dev_ctx)
    gps_dur, gps_visits = _max_dur(coi_profile, loc_ctx, "gps")
    wifi_dur, wifi_visits = _max_dur(coi_profile, loc_ctx, "wifi")
    fam = sorted(dev_ctx & device_profile.familiar)
    if fam:
        stats = [device_profile.stats[d] for d in fam]
        avg_time = sum(s.dur_ms for s in stats) / 1000.0 / len(fam)
        avg_freq = sum(s.enc for s in stats) / len(fam)
    else:
        avg_time = avg_freq = 0.0
    return FeatureVector(t, (gps_dur, gps_visits, wifi_dur, wifi_visits,
                             float(len(dev_ctx)), float(len(fam)), float(avg_time), float(avg_freq)))


class FeatureExtractor:
    """Precomputes visits, encounters and profiles for one trace.

    ``causal=True`` builds the profile used at ``t`` only from visits and
    encounters that ended strictly before ``t``.
    """

    def __init__(self, seq: ObservationSequence, cois: Sequence[GpsCoi | WifiCoi],
                 params: ContextParams = ContextParams(), causal: bool = False, t_max_wifi: float = 10.0):
        self.params = params
        self.causal = causal
        self.cois = list(cois)
        self.visits = detect_visits(seq, self.cois, params, t_max_wifi=t_max_wifi)
        self.encounters = detect_encounters(seq, params)
        self.coi_profile, self.device_profile = build_profiles(self.visits, self.encounters, params, self.cois)

    def profiles_before(self, t: float) -> tuple[CoiProfile, DeviceProfile]:
        cut = to_ms(t)
        visits = [v for v in self.visits if to_ms(v.t_end) < cut]
        encs = [e for e in self.encounters if to_ms(e.t_end) < cut]
        return build_profiles(visits, encs, self.params, self.cois)

    def at(self, t: float) -> FeatureVector:
        return self.batch([t])[0]

    def batch(self, times: Sequence[float]) -> list[FeatureVector]:
        locs = location_contexts(times, self.visits)
        devs = device_contexts(times, self.encounters)
        out = []
        for t, loc, dev in zip(times, locs, devs):
            cp, dp = self.profiles_before(t) if self.causal else (self.coi_profile, self.device_profile)
            out.append(compute_features(t, cp, dp, loc, dev))
        return out


def label_for(feedback, task: str) -> str | None:
    value = getattr(feedback, task)
    return None if value is None else LABEL_MAP[task][value]


def build_dataset(seq: ObservationSequence, features_at: Callable[[float], FeatureVector] | FeatureExtractor,
                  task: str) -> list[LabeledFeatureVector]:
    """One labeled vector per feedback record that answers ``task``."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    labeled = [(fb.t, label_for(fb, task)) for fb in seq.feedback]
    labeled = [(t, lab) for t, lab in labeled if lab is not None]
    if not labeled:
        raise NoFeedback(f"no feedback records for task {task!r}")
    if isinstance(features_at, FeatureExtractor):
        fvs = features_at.batch([t for t, _ in labeled])
    else:
        fvs = [features_at(t) for t, _ in labeled]
    return [LabeledFeatureVector(fv, task, lab) for fv, (_, lab) in zip(fvs, labeled)]


def to_arrays(data: Sequence[LabeledFeatureVector]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.array([d.fv.f for d in data], dtype=np.float64).reshape(len(data), len(FEATURE_NAMES))
    y = np.array([d.label for d in data], dtype=object)
    t = np.array([d.t for d in data], dtype=np.float64)
    return X, y, t


def dataset_to_csv(data: Sequence[LabeledFeatureVector]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for d in data:
        w.writerow([repr(d.t), *(repr(v) for v in d.fv.f), d.task, d.label])
    return buf.getvalue()


def dataset_from_csv(text: str) -> list[LabeledFeatureVector]:
    rows = csv.reader(io.StringIO(text))
    header = tuple(next(rows))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for row in rows:
        if not row:
            continue
        t = float(row[0])
        f = tuple(float(v) for v in row[1:1 + len(FEATURE_NAMES)])
        out.append(LabeledFeatureVector(FeatureVector(t, f), row[-2], row[-1]))
    return out
