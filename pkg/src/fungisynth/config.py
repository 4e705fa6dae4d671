"""JSON configuration: schema, defaults, validation and conversion to runtime params.

Layout::

    {
      "seed": 7, "total_frames": 100, "output_dir": "out", "segment_budget": 1000000,
      "lifecycle":   {"initial_spores": 200, "spore_bounds": [0.1, 0.9, 0.1, 0.9], ...},
      "morphology":  {"base_length": 0.06, "hypha": {...}, "mycelium": {...}},
      "environment": {"temperature_mu": 1.0, "temperature_sigma": 0.1, "growth_time_constant": 0.5},
      "render":      {"width": 512, "height": 512, "palette": {...}, "z_order": [...], "antialias": false}
    }

Every key is optional; omitted keys take the defaults below.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .lifecycle import JitterLaw, LifecycleParams, Stage
from .morphology import DEFAULT_SEGMENT_BUDGET, BranchParams, EnvironmentParams
from .render import Color, Palette

__all__ = ["ConfigError", "SimulationConfig", "load_config", "config_from_dict"]

RGB = tuple[float, float, float]


class ConfigError(ValueError):
    """Raised for unreadable, malformed or invalid configuration."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)


class LifecycleSection(_Section):
    initial_spores: int = Field(200, ge=0)
    spore_bounds: tuple[float, float, float, float] = (0.1, 0.9, 0.1, 0.9)
    jitter_law: JitterLaw = JitterLaw.UNIFORM
    jitter_range: float = Field(0.01, ge=0)
    jitter_sigma: float = Field(0.005, ge=0)
    initial_spore_radius: float = Field(0.012, gt=0)
    min_spore_radius: float = Field(0.002, gt=0)
    hypha_rate: float = Field(1.0, ge=0)
    mycelium_rate: float = Field(2.0, ge=0)
    mycelium_threshold: float = Field(0.5, ge=0, lt=1)


class StageSection(_Section):
    initial_width: float = Field(gt=0)
    mean_sub_branches: float = Field(ge=0)
    length_mu: float
    length_sigma: float = Field(ge=0)
    width_range: tuple[float, float]
    decay_factor: float = Field(gt=0, le=1)
    decay_noise_sigma: float = Field(0.2, ge=0)
    max_depth: int = Field(ge=0)
    length_threshold: float = Field(0.004, gt=0)
    density_alpha: float = Field(0.0, ge=0)


def _hypha_default() -> StageSection:
    return StageSection(
        initial_width=0.006, mean_sub_branches=2.0, length_mu=1.0, length_sigma=0.2,
        width_range=(0.6, 1.0), decay_factor=0.7, max_depth=4,
    )


def _mycelium_default() -> StageSection:
    return StageSection(
        initial_width=0.008, mean_sub_branches=3.0, length_mu=0.8, length_sigma=0.15,
        width_range=(0.7, 1.0), decay_factor=0.85, max_depth=5, density_alpha=0.15,
    )


class MorphologySection(_Section):
    base_length: float = Field(0.06, ge=0)
    hypha: StageSection = Field(default_factory=_hypha_default)
    mycelium: StageSection = Field(default_factory=_mycelium_default)

    @model_validator(mode="before")
    @classmethod
    def _merge_stage_defaults(cls, data: Any) -> Any:
        # a partial stage section overrides only the keys it names
        if isinstance(data, dict):
            data = dict(data)
            for name, default in (("hypha", _hypha_default), ("mycelium", _mycelium_default)):
                if isinstance(data.get(name), dict):
                    data[name] = {**default().model_dump(), **data[name]}
        return data


class EnvironmentSection(_Section):
    temperature_mu: float = 1.0
    temperature_sigma: float = Field(0.1, ge=0)
    growth_time_constant: float = Field(0.5, ge=0, lt=1)


_DEFAULT_PALETTE = Palette()


class PaletteSection(_Section):
    spore: tuple[RGB, RGB] = _DEFAULT_PALETTE.spore
    hypha: tuple[RGB, RGB] = _DEFAULT_PALETTE.hypha
    mycelium: tuple[RGB, RGB] = _DEFAULT_PALETTE.mycelium
    background: RGB = _DEFAULT_PALETTE.background

    @model_validator(mode="after")
    def _channels_in_range(self):
        for name in ("spore", "hypha", "mycelium", "background"):
            value = getattr(self, name)
            colors = value if name != "background" else (value,)
            for c in colors:
                if any(not 0.0 <= ch <= 1.0 for ch in c):
                    raise ValueError(f"palette.{name}: color channels must lie in [0, 1]")
        return self


class RenderSection(_Section):
    width: int = Field(512, ge=16)
    height: int = Field(512, ge=16)
    palette: PaletteSection = Field(default_factory=PaletteSection)
    z_order: tuple[Stage, Stage, Stage] = (Stage.HYPHA, Stage.MYCELIUM, Stage.SPORE)
    antialias: bool = False


class SimulationConfig(_Section):
    seed: int = Field(7, ge=0, lt=2**64)
    total_frames: int = Field(100, ge=2)
    output_dir: str = "out"
    segment_budget: int = Field(DEFAULT_SEGMENT_BUDGET, gt=0)
    lifecycle: LifecycleSection = Field(default_factory=LifecycleSection)
    morphology: MorphologySection = Field(default_factory=MorphologySection)
    environment: EnvironmentSection = Field(default_factory=EnvironmentSection)
    render: RenderSection = Field(default_factory=RenderSection)

    @model_validator(mode="after")
    def _runtime_params_valid(self):
        # the runtime dataclasses carry the cross-field invariants
        checks = (
            ("lifecycle", self.lifecycle_params),
            ("morphology.hypha", lambda: self.branch_params(Stage.HYPHA)),
            ("morphology.mycelium", lambda: self.branch_params(Stage.MYCELIUM)),
            ("environment", self.environment_params),
        )
        for section, build in checks:
            try:
                build()
            except ValueError as exc:
                raise ValueError(f"{section}: {exc}") from None
        if len(set(self.render.z_order)) != 3:
            raise ValueError("render.z_order must list each stage exactly once")
        return self

    def lifecycle_params(self) -> LifecycleParams:
        return LifecycleParams(**self.lifecycle.model_dump())

    def branch_params(self, stage: Stage) -> BranchParams:
        section: StageSection = getattr(self.morphology, Stage(stage).value)
        fields = section.model_dump()
        lo, hi = fields.pop("width_range")
        return BranchParams(initial_length=self.morphology.base_length, width_lo=lo, width_hi=hi, **fields)

    def environment_params(self) -> EnvironmentParams:
        return EnvironmentParams(**self.environment.model_dump())

    def palette(self) -> Palette:
        p = self.render.palette
        return Palette(
            spore=tuple(Color(*c) for c in p.spore),
            hypha=tuple(Color(*c) for c in p.hypha),
            mycelium=tuple(Color(*c) for c in p.mycelium),
            background=Color(*p.background),
        )

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    def with_overrides(self, **overrides: Any) -> "SimulationConfig":
        """Apply dotted-path overrides, e.g. ``{"lifecycle.initial_spores": 10}``."""
        data = self.to_dict()
        for dotted, value in overrides.items():
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        return config_from_dict(data)


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def config_from_dict(data: dict) -> SimulationConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        return SimulationConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_format_validation_error(exc)}") from None


def load_config(path: str | Path) -> SimulationConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    return config_from_dict(data)
