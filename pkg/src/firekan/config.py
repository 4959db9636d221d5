"""Pipeline configuration: one JSON file, command-line overrides on top.

Precedence is flag > file > default.  Relative paths inside the file are
resolved against the file's own directory, so a config travels with its
data.  Example::

    {
      "seed": 20250107,
      "output_dir": "out",
      "inputs": {
        "post_stack": "scene/post_stack.bin",
        "labels": "scene/labels.bin",
        "landcover": "scene/landcover.bin",
        "population": "scene/population.bin",
        "age_sex": "scene/age_sex.bin",
        "jurisdiction": "scene/jurisdiction.geojson",
        "footprints": "scene/footprints.geojson"
      },
      "fires": [{"name": "north", "bounds": [500000, 4100000, 500500, 4100500]}],
      "model": {"hidden_dims": [32, 16], "degree": 4, "dropout_rate": 0.3},
      "sampling": {"n_per_class": 2000, "train_fraction": 0.8},
      "assessment": {"landcover_labels": {"1": "Shrubland"},
                     "jurisdiction_attribute": "agency_code"}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .burnmap import FireHint, PostprocessParams
from .errors import ConfigError
from .training import ModelConfig


@dataclass
class SamplingConfig:
    n_per_class: int = 2000
    train_fraction: float = 0.8
    validation_fraction: float = 0.1


@dataclass
class AssessmentConfig:
    landcover_labels: dict[int, str] = field(default_factory=dict)
    jurisdiction_attribute: str = "agency_code"
    jurisdiction_labels: dict[int, str] = field(default_factory=dict)
    other_threshold_percent: float = 0.3
    use_dasymetric: bool = False
    settled_codes: list[int] = field(default_factory=list)
    resample_layers: bool = False


@dataclass
class PipelineConfig:
    """Everything a run needs; see the module docstring for the file layout."""

    seed: int = 0
    threads: int = 1
    output_dir: Path = Path("out")
    inputs: dict[str, Path | None] = field(default_factory=dict)
    fires: list[FireHint] = field(default_factory=list)
    model: ModelConfig = field(default_factory=ModelConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    postprocess: PostprocessParams = field(default_factory=PostprocessParams)
    assessment: AssessmentConfig = field(default_factory=AssessmentConfig)

    def input_path(self, key: str) -> Path | None:
        return self.inputs.get(key)

    def require_inputs(self, keys: list[str]) -> dict[str, Path]:
        """Check the named inputs are configured and exist on disk."""
        out = {}
        for key in keys:
            path = self.inputs.get(key)
            if path is None:
                raise ConfigError(f"config is missing required input {key!r}")
            if not Path(path).exists():
                raise ConfigError(f"input {key!r} does not exist: {path}")
            out[key] = Path(path)
        return out


_INPUT_KEYS = (
    "pre_stack",
    "post_stack",
    "labels",
    "landcover",
    "population",
    "age_sex",
    "jurisdiction",
    "footprints",
    "settlement",
)


def _int_keyed(mapping: dict, what: str) -> dict[int, str]:
    out = {}
    for key, value in mapping.items():
        try:
            out[int(key)] = str(value)
        except ValueError as exc:
            raise ConfigError(f"{what}: key {key!r} is not an integer code") from exc
    return out


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    base = path.parent

    config = PipelineConfig()
    config.seed = int(doc.get("seed", config.seed))
    config.threads = int(doc.get("threads", config.threads))
    out_dir = Path(doc.get("output_dir", config.output_dir))
    config.output_dir = out_dir if out_dir.is_absolute() else base / out_dir

    inputs = doc.get("inputs", {})
    unknown = set(inputs) - set(_INPUT_KEYS)
    if unknown:
        raise ConfigError(f"unknown input keys: {sorted(unknown)}")
    for key in _INPUT_KEYS:
        value = inputs.get(key)
        if value is None:
            config.inputs[key] = None
        else:
            p = Path(value)
            config.inputs[key] = p if p.is_absolute() else base / p

    names = set()
    for i, raw in enumerate(doc.get("fires", [])):
        try:
            name = str(raw["name"])
            bounds = tuple(float(v) for v in raw["bounds"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"fires[{i}] needs a name and 4-number bounds") from exc
        if len(bounds) != 4:
            raise ConfigError(f"fires[{i}] bounds must be [min_x, min_y, max_x, max_y]")
        if name in names:
            raise ConfigError(f"duplicate fire name {name!r}")
        names.add(name)
        config.fires.append(FireHint(name, bounds))

    model = doc.get("model", {})
    known_model = {f for f in ModelConfig.__dataclass_fields__}
    unknown = set(model) - known_model
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    config.model = ModelConfig(**model)

    sampling = doc.get("sampling", {})
    unknown = set(sampling) - set(SamplingConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown sampling keys: {sorted(unknown)}")
    config.sampling = SamplingConfig(**sampling)

    postprocess = doc.get("postprocess", {})
    unknown = set(postprocess) - set(PostprocessParams.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown postprocess keys: {sorted(unknown)}")
    try:
        config.postprocess = PostprocessParams(**postprocess)
    except ValueError as exc:
        raise ConfigError(f"bad postprocess settings: {exc}") from exc

    assessment = dict(doc.get("assessment", {}))
    if "landcover_labels" in assessment:
        assessment["landcover_labels"] = _int_keyed(assessment["landcover_labels"], "landcover_labels")
    if "jurisdiction_labels" in assessment:
        assessment["jurisdiction_labels"] = _int_keyed(
            assessment["jurisdiction_labels"], "jurisdiction_labels"
        )
    unknown = set(assessment) - set(AssessmentConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown assessment keys: {sorted(unknown)}")
    config.assessment = AssessmentConfig(**assessment)
    return config
