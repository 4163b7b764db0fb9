"""Automated quantum machine learning: a statevector simulator, quantum kernel
and circuit models, and a TPE search over preprocessing + model pipelines."""

__version__ = "0.1.0"

from .pipeline import Pipeline, deserialize, instantiate, search, serialize  # noqa: E402

__all__ = ["Pipeline", "deserialize", "instantiate", "search", "serialize", "__version__"]
