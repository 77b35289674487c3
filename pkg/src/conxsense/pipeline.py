"""End-to-end orchestration: trace -> stay points -> CoIs -> profiles -> features -> models."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import TrainedModel, train
from .coi import GpsCoi, WifiCoi, detect_gps_cois, detect_wifi_cois
from .config import PipelineConfig
from .evaluation import EvalResult, cross_validate, roc_csv
from .features import TASKS, FeatureExtractor, LabeledFeatureVector, build_dataset, dataset_to_csv
from .staypoints import (GpsStayPoint, WifiSnapshot, WifiStayPoint, extract_gps_staypoints,
                         extract_wifi_staypoints, group_wifi_snapshots)
from .trace import ObservationSequence, validate_sequence


@dataclass
class Profile:
    gps_staypoints: list[GpsStayPoint]
    snapshots: list[WifiSnapshot]
    wifi_staypoints: list[WifiStayPoint]
    gps_cois: list[GpsCoi]
    wifi_cois: list[WifiCoi]
    extractor: FeatureExtractor

    @property
    def cois(self) -> list:
        return [*self.gps_cois, *self.wifi_cois]

    def profiles_dict(self) -> dict:
        return {"cois": self.extractor.coi_profile.to_dict(), "devices": self.extractor.device_profile.to_dict()}


def build_profile(trace: ObservationSequence, config: PipelineConfig = PipelineConfig()) -> Profile:
    gps_sps = extract_gps_staypoints(trace.gps, config.staypoints)
    snaps = group_wifi_snapshots(trace.wifi, config.staypoints)
    wifi_sps = extract_wifi_staypoints(snaps, config.staypoints)
    gps_cois = detect_gps_cois(gps_sps, config.coi)
    wifi_cois = detect_wifi_cois(wifi_sps, config.coi)
    extractor = FeatureExtractor(trace, [*gps_cois, *wifi_cois], config.context, causal=config.causal,
                                 t_max_wifi=config.staypoints.t_max_wifi)
    return Profile(gps_sps, snaps, wifi_sps, gps_cois, wifi_cois, extractor)


@dataclass
class PipelineResult:
    profile: Profile
    datasets: dict[str, list[LabeledFeatureVector]] = field(default_factory=dict)
    models: dict[str, TrainedModel] = field(default_factory=dict)
    evaluations: dict[str, EvalResult] = field(default_factory=dict)

    def summary(self) -> dict:
        return {task: ev.summary() for task, ev in self.evaluations.items()}


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_pipeline(trace: ObservationSequence, config: PipelineConfig = PipelineConfig(), outdir=None,
                 tasks=TASKS) -> PipelineResult:
    """Profile the trace, label feature vectors, then train and cross-validate one model per task.

    With ``outdir`` every intermediate artifact is written there; the files
    depend only on (trace, config).
    """
    profile = build_profile(trace, config)
    result = PipelineResult(profile)
    for task in tasks:
        data = build_dataset(trace, profile.extractor, task)
        result.datasets[task] = data
        result.models[task] = train(config.model, data)
        result.evaluations[task] = cross_validate(config.model, data, config.folds)
    if outdir is not None:
        write_artifacts(result, trace, config, Path(outdir))
    return result


def write_artifacts(result: PipelineResult, trace: ObservationSequence, config: PipelineConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    p = result.profile
    _dump(out / "config.json", config.to_dict())
    _dump(out / "validation.json", validate_sequence(trace).to_dict())
    _dump(out / "staypoints.json", {"gps": [s.to_dict() for s in p.gps_staypoints],
                                    "wifi": [s.to_dict() for s in p.wifi_staypoints]})
    _dump(out / "cois.json", [c.to_dict() for c in p.cois])
    _dump(out / "profiles.json", p.profiles_dict())
    for task, data in result.datasets.items():
        (out / f"features_{task}.csv").write_text(dataset_to_csv(data), encoding="utf-8")
    for task, model in result.models.items():
        _dump(out / f"model_{task}.json", model.to_dict())
    for task, ev in result.evaluations.items():
        (out / f"roc_{task}.csv").write_text(roc_csv(ev), encoding="utf-8")
    _dump(out / "summary.json", result.summary())
