from .core import (
    SCHEMA_VERSION,
    Pipeline,
    PipelineError,
    SchemaError,
    build_predictor,
    build_steps,
    deserialize,
    instantiate,
    serialize,
)
from .run import PipelineObjective, SearchOutcome, check_metric, holdout_indices, search
from .templates import (
    DEFAULT_METRIC,
    FORECAST_LAGS,
    PRESETS,
    TASKS,
    TemplateError,
    default_space,
    is_classification,
    normalize_task,
    preset_models,
)

__all__ = [
    "SCHEMA_VERSION",
    "Pipeline",
    "PipelineError",
    "SchemaError",
    "build_predictor",
    "build_steps",
    "deserialize",
    "instantiate",
    "serialize",
    "PipelineObjective",
    "SearchOutcome",
    "check_metric",
    "holdout_indices",
    "search",
    "DEFAULT_METRIC",
    "FORECAST_LAGS",
    "PRESETS",
    "TASKS",
    "TemplateError",
    "default_space",
    "is_classification",
    "normalize_task",
    "preset_models",
]
