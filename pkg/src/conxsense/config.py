"""One JSON config holding every tunable parameter, defaulting to the published values."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .classifier import ModelSpec
from .coi import CoiParams
from .context import ContextParams
from .policy import default_policy
from .staypoints import StayPointParams


@dataclass(frozen=True)
class PipelineConfig:
    staypoints: StayPointParams = field(default_factory=StayPointParams)
    coi: CoiParams = field(default_factory=CoiParams)
    context: ContextParams = field(default_factory=ContextParams)
    model: ModelSpec = field(default_factory=ModelSpec)
    folds: int = 10
    causal: bool = False
    thresholds: dict = field(default_factory=lambda: default_policy()["thresholds"])

    def to_dict(self) -> dict:
        return {"staypoints": asdict(self.staypoints), "coi": asdict(self.coi), "context": asdict(self.context),
                "model": asdict(self.model), "folds": self.folds, "causal": self.causal,
                "thresholds": self.thresholds}

    def with_model(self, **changes) -> "PipelineConfig":
        spec = asdict(self.model)
        spec.update(changes)
        return PipelineConfig(self.staypoints, self.coi, self.context, ModelSpec(**spec), self.folds, self.causal,
                              self.thresholds)


def _build(cls, obj: dict | None):
    obj = obj or {}
    known = {f.name for f in fields(cls)}
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**obj)


def config_from_dict(obj: dict) -> PipelineConfig:
    return PipelineConfig(
        staypoints=_build(StayPointParams, obj.get("staypoints")),
        coi=_build(CoiParams, obj.get("coi")),
        context=_build(ContextParams, obj.get("context")),
        model=_build(ModelSpec, obj.get("model")),
        folds=int(obj.get("folds", 10)),
        causal=bool(obj.get("causal", False)),
        thresholds=obj.get("thresholds") or default_policy()["thresholds"],
    )


def load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
