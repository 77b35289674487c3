"""Default-deny access control driven by context classifications, and the lockscreen latch."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import UnknownSensor

TRUSTED, UNTRUSTED = "trusted", "untrusted"
SENSORS = ("camera", "accelerometer", "microphone", "gps", "magnetometer")
DENY_REASONS = ("no_rule", "wrong_label", "low_confidence", "lockscreen_block")
LOCKSCREEN = "lockscreen"


@dataclass(frozen=True)
class Rule:
    subject: str
    object: str
    op: str
    task: str | None = None          # None: unconditional
    relax_label: str | None = None

    def to_dict(self) -> dict:
        return {"subject": self.subject, "object": self.object, "op": self.op,
                "task": self.task, "relax_label": self.relax_label}


@dataclass(frozen=True)
class RuleTable:
    apps: Mapping[str, str]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            key = (r.subject, r.object, r.op)
            if key in seen:
                raise ValueError(f"duplicate rule for {key}")
            seen.add(key)
        object.__setattr__(self, "_index", {(r.subject, r.object, r.op): r for r in self.rules})

    def subject_type(self, app_id: str) -> str:
        # apps absent from the table are treated as third-party
        return self.apps.get(app_id, UNTRUSTED)

    def lookup(self, subject: str, obj: str, op: str) -> Rule | None:
        return self._index.get((subject, obj, op))


@dataclass(frozen=True)
class Thresholds:
    values: Mapping[str, Mapping[str, float]]

    def get(self, task: str, sensor: str) -> float:
        try:
            return float(self.values[task][sensor])
        except KeyError:
            raise UnknownSensor(f"no confidence threshold for ({task}, {sensor})") from None

    def raised(self, task: str, sensor: str, value: float) -> "Thresholds":
        vals = {k: dict(v) for k, v in self.values.items()}
        vals.setdefault(task, {})[sensor] = value
        return Thresholds(vals)


@dataclass(frozen=True)
class ClassificationEvent:
    t: float
    task: str
    label: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")


@dataclass(frozen=True)
class Decision:
    allow: bool
    reason: str

    def to_dict(self) -> dict:
        return {"decision": "allow" if self.allow else "deny", "reason": self.reason}


@dataclass(frozen=True)
class LockState:
    displayed: bool = True
    watermark: bool = True
    last_risk: str | None = None
    last_confidence: float = 0.0


@dataclass(frozen=True)
class LockEvent:
    kind: str                        # risk_classified | wake | reboot | manual_unlock
    label: str | None = None
    confidence: float = 0.0

    @staticmethod
    def risk(label: str, confidence: float) -> "LockEvent":
        return LockEvent("risk_classified", label, confidence)


WAKE = LockEvent("wake")
REBOOT = LockEvent("reboot")
MANUAL_UNLOCK = LockEvent("manual_unlock")


def decide_access(app_id: str, sensor: str, op: str,
                  event: ClassificationEvent | Mapping[str, ClassificationEvent] | None,
                  rules: RuleTable, thresholds: Thresholds, lock: LockState) -> Decision:
    """Allow only through a matching rule whose condition currently holds.

    ``event`` may be a single classification or a mapping task -> classification.
    """
    subject = rules.subject_type(app_id)
    rule = rules.lookup(subject, sensor, op)
    if rule is None:
        return Decision(False, "no_rule")
    if rule.task is not None:
        threshold = thresholds.get(rule.task, sensor)
        ev = event.get(rule.task) if isinstance(event, Mapping) else event
        if ev is None or ev.task != rule.task or ev.label != rule.relax_label:
            return Decision(False, "wrong_label")
        if ev.confidence < threshold:
            return Decision(False, "low_confidence")
    if sensor == "accelerometer" and subject == UNTRUSTED and lock.displayed:
        return Decision(False, "lockscreen_block")
    return Decision(True, "conditional" if rule.task is not None else "unconditional")


def update_lock_state(lock: LockState, event: LockEvent, threshold: float = 0.5) -> LockState:
    """Lockscreen transitions with a low-watermark latch.

    Reboot, or any high-risk classification (at any confidence), arms the
    latch; only a manual unlock clears it. A wake dismisses the lockscreen only
    when the latch is clear and the latest risk is low at ``threshold`` or more.
    """
    if event.kind == "reboot":
        return LockState(displayed=True, watermark=True, last_risk=None, last_confidence=0.0)
    if event.kind == "manual_unlock":
        return replace(lock, displayed=False, watermark=False)
    if event.kind == "risk_classified":
        armed = lock.watermark or event.label == "high_risk"
        return replace(lock, watermark=armed, last_risk=event.label, last_confidence=event.confidence)
    if event.kind == "wake":
        auto = (not lock.watermark and lock.last_risk == "low_risk"
                and lock.last_confidence >= threshold)
        return replace(lock, displayed=not auto)
    raise ValueError(f"unknown lock event {event.kind!r}")


def threshold_for_fpr(points: Sequence[tuple[float, float]], thresholds: Sequence[float], target_fpr: float) -> float:
    """Confidence threshold reaching the best TPR with FPR <= target on held-out ROC data."""
    best = 0
    for k, (fpr, tpr) in enumerate(points):
        if fpr <= target_fpr + 1e-12 and tpr >= points[best][1]:
            best = k
    thr = thresholds[best]
    return 1.0 if thr == float("inf") else max(float(thr), 0.5)


# ---- policy file -------------------------------------------------------------

def load_policy(obj: Mapping) -> tuple[RuleTable, Thresholds]:
    apps = dict(obj.get("apps", {}))
    for app, typ in apps.items():
        if typ not in (TRUSTED, UNTRUSTED):
            raise ValueError(f"app {app!r}: unknown type {typ!r}")
    rules = tuple(Rule(r["subject"], r["object"], r["op"], r.get("task"), r.get("relax_label"))
                  for r in obj.get("rules", []))
    thresholds = Thresholds({t: {s: float(v) for s, v in m.items()} for t, m in obj.get("thresholds", {}).items()})
    table = RuleTable(apps, rules)
    for r in rules:
        if r.task is not None:
            thresholds.get(r.task, r.object)
    return table, thresholds


def read_policy(path) -> tuple[RuleTable, Thresholds]:
    with open(path, encoding="utf-8") as fh:
        return load_policy(json.load(fh))


SENSOR_OPS = {"camera": ("take_picture", "start_preview"), "accelerometer": ("read",),
              "microphone": ("read",), "gps": ("read",), "magnetometer": ("read",)}


def default_policy() -> dict:
    """Trusted system apps keep sensor access; third-party apps only in low-exposure contexts."""
    rules = []
    for sensor, ops in SENSOR_OPS.items():
        for op in ops:
            rules.append({"subject": TRUSTED, "object": sensor, "op": op, "task": None, "relax_label": None})
            rules.append({"subject": UNTRUSTED, "object": sensor, "op": op,
                          "task": "exposure", "relax_label": "low_exposure"})
    return {
        "apps": {"system.camera": TRUSTED, "system.maps": TRUSTED, "thirdparty.placeraider": UNTRUSTED,
                 "thirdparty.game": UNTRUSTED},
        "rules": rules,
        # more sensitive sensors demand more confidence
        "thresholds": {"exposure": {"camera": 0.6, "accelerometer": 0.6, "microphone": 0.6,
                                    "gps": 0.8, "magnetometer": 0.5},
                       "misuse": {LOCKSCREEN: 0.6}},
    }


# ---- enforcement replay ------------------------------------------------------

@dataclass(frozen=True)
class HarnessEvent:
    t: float
    kind: str                 # wake | reboot | access
    app: str | None = None
    sensor: str | None = None
    op: str | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "t": self.t}
        if self.kind == "access":
            d.update(app=self.app, sensor=self.sensor, op=self.op)
        return d


@dataclass(frozen=True)
class TruthSegment:
    t_start: float
    t_end: float
    place: str
    misuse: str               # low_risk | high_risk
    exposure: str             # low_exposure | high_exposure


class Truth:
    """Ground-truth labels over time, from the scenario schedule."""

    def __init__(self, segments: Iterable[TruthSegment]):
        self.segments = sorted(segments, key=lambda s: s.t_start)
        self._starts = np.array([s.t_start for s in self.segments])

    def at(self, t: float) -> TruthSegment | None:
        k = int(np.searchsorted(self._starts, t, side="right")) - 1
        if k >= 0 and self.segments[k].t_start <= t < self.segments[k].t_end:
            return self.segments[k]
        return None

    def label(self, task: str, t: float) -> str | None:
        seg = self.at(t)
        return None if seg is None else getattr(seg, task)


# A classifier for replay maps timestamps to {task: (labels, confidences)}.
ReplayClassifier = Callable[[Sequence[float]], Mapping[str, tuple[Sequence[str], Sequence[float]]]]


def oracle_classifier(truth: Truth) -> ReplayClassifier:
    from .features import NEGATIVE

    def classify(times):
        out = {}
        for task in ("misuse", "exposure"):
            labels = [truth.label(task, t) or NEGATIVE[task] for t in times]
            out[task] = (labels, [1.0] * len(times))
        return out
    return classify


def always_deny_classifier() -> ReplayClassifier:
    from .features import NEGATIVE

    def classify(times):
        return {task: ([NEGATIVE[task]] * len(times), [1.0] * len(times)) for task in ("misuse", "exposure")}
    return classify


def model_classifier(models: Mapping, extractor) -> ReplayClassifier:
    """Trained per-task models evaluated on features from ``extractor`` (a FeatureExtractor)."""
    def classify(times):
        X = np.array([fv.f for fv in extractor.batch(list(times))], dtype=np.float64)
        out = {}
        for task, model in models.items():
            labels, conf = model.predict_many(X)
            out[task] = (list(labels), conf.tolist())
        return out
    return classify


@dataclass
class EnforcementReport:
    wakes_low_risk: int = 0
    prompts_avoided: int = 0
    wakes_high_risk: int = 0
    high_risk_unlocked: int = 0
    accesses: int = 0
    allowed: int = 0
    untrusted_allowed: int = 0
    high_exposure_leaks: int = 0
    trusted_denied: int = 0
    deny_reasons: dict[str, int] = field(default_factory=dict)
    latencies_ns: list[int] = field(default_factory=list, repr=False)

    @property
    def prompts_avoided_frac(self) -> float:
        return self.prompts_avoided / self.wakes_low_risk if self.wakes_low_risk else 0.0

    @property
    def high_risk_unlock_frac(self) -> float:
        return self.high_risk_unlocked / self.wakes_high_risk if self.wakes_high_risk else 0.0

    def latency_ms(self) -> dict:
        if not self.latencies_ns:
            return {"mean": 0.0, "std": 0.0, "p95": 0.0, "n": 0}
        ms = np.asarray(self.latencies_ns, dtype=np.float64) / 1e6
        return {"mean": float(ms.mean()), "std": float(ms.std()), "p95": float(np.percentile(ms, 95)), "n": len(ms)}

    def to_dict(self, include_latency: bool = True) -> dict:
        d = {
            "wakes_low_risk": self.wakes_low_risk,
            "prompts_avoided": self.prompts_avoided,
            "prompts_avoided_frac": self.prompts_avoided_frac,
            "wakes_high_risk": self.wakes_high_risk,
            "high_risk_unlocked": self.high_risk_unlocked,
            "high_risk_unlock_frac": self.high_risk_unlock_frac,
            "accesses": self.accesses,
            "allowed": self.allowed,
            "untrusted_allowed": self.untrusted_allowed,
            "high_exposure_leaks": self.high_exposure_leaks,
            "trusted_denied": self.trusted_denied,
            "deny_reasons": dict(sorted(self.deny_reasons.items())),
        }
        if include_latency:
            d["latency_ms"] = self.latency_ms()
        return d


def replay_enforcement(events: Sequence[HarnessEvent], classifier: ReplayClassifier, rules: RuleTable,
                       thresholds: Thresholds, truth: Truth, cadence: float = 60.0) -> EnforcementReport:
    """Replay wake/reboot/access events against a classifier and score them with ground truth.

    The classifier is consulted at every event and at a fixed cadence in
    between, so risk changes arm the lockscreen latch even while the device
    sleeps. A wake that shows the lockscreen is followed by a manual unlock.
    """
    from .features import NEGATIVE

    events = sorted(events, key=lambda e: e.t)
    report = EnforcementReport()
    if not events:
        return report
    t0, t1 = events[0].t, events[-1].t
    ticks = list(np.arange(t0, t1, cadence)) if cadence > 0 else []
    timeline = sorted([(float(t), 0, None) for t in ticks] + [(e.t, 1, e) for e in events],
                      key=lambda x: (x[0], x[1]))
    times = [x[0] for x in timeline]
    predictions = classifier(times)
    lock_threshold = thresholds.values.get("misuse", {}).get(LOCKSCREEN, 0.5)
    lock = LockState()
    for k, (t, _, ev) in enumerate(timeline):
        cls = {task: ClassificationEvent(t, task, labels[k], float(confs[k]))
               for task, (labels, confs) in predictions.items()}
        if "misuse" in cls:
            lock = update_lock_state(lock, LockEvent.risk(cls["misuse"].label, cls["misuse"].confidence),
                                     lock_threshold)
        if ev is None:
            continue
        if ev.kind == "reboot":
            lock = update_lock_state(lock, REBOOT)
        elif ev.kind == "wake":
            lock = update_lock_state(lock, WAKE, lock_threshold)
            risk = truth.label("misuse", t) or NEGATIVE["misuse"]
            if risk == "low_risk":
                report.wakes_low_risk += 1
                report.prompts_avoided += int(not lock.displayed)
            else:
                report.wakes_high_risk += 1
                report.high_risk_unlocked += int(not lock.displayed)
            if lock.displayed:
                lock = update_lock_state(lock, MANUAL_UNLOCK)
        elif ev.kind == "access":
            start = time.perf_counter_ns()
            d = decide_access(ev.app, ev.sensor, ev.op, cls, rules, thresholds, lock)
            report.latencies_ns.append(time.perf_counter_ns() - start)
            report.accesses += 1
            subject = rules.subject_type(ev.app)
            if d.allow:
                report.allowed += 1
                if subject == UNTRUSTED:
                    report.untrusted_allowed += 1
                    if (truth.label("exposure", t) or NEGATIVE["exposure"]) == "high_exposure":
                        report.high_exposure_leaks += 1
            else:
                report.deny_reasons[d.reason] = report.deny_reasons.get(d.reason, 0) + 1
                if subject == TRUSTED:
                    report.trusted_denied += 1
        else:
            raise ValueError(f"unknown harness event {ev.kind!r}")
    return report
