"""Conditional (tree-structured) hyperparameter search spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("CATEGORICAL", "UNIFORM", "LOG_UNIFORM", "INT_UNIFORM")


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    id: str
    kind: str
    options: tuple = ()
    lo: float = 0.0
    hi: float = 1.0
    parent: str | None = None
    parent_values: tuple = ()

    @property
    def numeric(self) -> bool:
        return self.kind != "CATEGORICAL"

    def internal_bounds(self) -> tuple[float, float]:
        if self.kind == "LOG_UNIFORM":
            return math.log(self.lo), math.log(self.hi)
        return float(self.lo), float(self.hi)

    def to_internal(self, value) -> float:
        return math.log(value) if self.kind == "LOG_UNIFORM" else float(value)

    def from_internal(self, u: float):
        lo, hi = self.internal_bounds()
        u = min(max(u, lo), hi)
        if self.kind == "LOG_UNIFORM":
            return min(max(math.exp(u), self.lo), self.hi)
        if self.kind == "INT_UNIFORM":
            return int(min(max(round(u), self.lo), self.hi))
        return float(u)

    def contains(self, value) -> bool:
        if self.kind == "CATEGORICAL":
            return value in self.options
        if self.kind == "INT_UNIFORM":
            return isinstance(value, (int, np.integer)) and self.lo <= value <= self.hi
        return isinstance(value, (int, float)) and self.lo <= value <= self.hi


def categorical(id, options, when=None) -> Param:
    parent, values = when if when else (None, ())
    return Param(id, "CATEGORICAL", tuple(options), parent=parent, parent_values=tuple(values))


def uniform(id, lo, hi, when=None) -> Param:
    parent, values = when if when else (None, ())
    return Param(id, "UNIFORM", lo=float(lo), hi=float(hi), parent=parent, parent_values=tuple(values))


def log_uniform(id, lo, hi, when=None) -> Param:
    parent, values = when if when else (None, ())
    return Param(id, "LOG_UNIFORM", lo=float(lo), hi=float(hi), parent=parent, parent_values=tuple(values))


def int_uniform(id, lo, hi, when=None) -> Param:
    parent, values = when if when else (None, ())
    return Param(id, "INT_UNIFORM", lo=int(lo), hi=int(hi), parent=parent, parent_values=tuple(values))


class SearchSpace:
    """Ordered parameters; a parameter is active when its parent is active and
    the parent's value is one of ``parent_values``. Parents precede children."""

    def __init__(self, params):
        self.params: list[Param] = list(params)
        self.by_id: dict[str, Param] = {}
        for p in self.params:
            if p.kind not in KINDS:
                raise SpaceError(f"{p.id}: unknown kind {p.kind}")
            if p.id in self.by_id:
                raise SpaceError(f"duplicate parameter id {p.id!r}")
            if p.kind == "CATEGORICAL":
                if not p.options:
                    raise SpaceError(f"{p.id}: categorical needs options")
            else:
                if not p.lo < p.hi:
                    raise SpaceError(f"{p.id}: need lo < hi, got [{p.lo}, {p.hi}]")
                if p.kind == "LOG_UNIFORM" and p.lo <= 0:
                    raise SpaceError(f"{p.id}: log-uniform needs lo > 0")
            if p.parent is not None:
                parent = self.by_id.get(p.parent)
                if parent is None:
                    raise SpaceError(f"{p.id}: parent {p.parent!r} must be declared first")
                if parent.kind != "CATEGORICAL":
                    raise SpaceError(f"{p.id}: parent {p.parent!r} is not categorical")
                bad = [v for v in p.parent_values if v not in parent.options]
                if bad or not p.parent_values:
                    raise SpaceError(f"{p.id}: activating values {bad or '()'} not options of {p.parent}")
            self.by_id[p.id] = p

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def is_active(self, p: Param, config: dict) -> bool:
        if p.parent is None:
            return True
        return p.parent in config and config[p.parent] in p.parent_values

    def validate(self, config: dict) -> None:
        expected = set()
        partial: dict = {}
        for p in self.params:
            if self.is_active(p, partial):
                expected.add(p.id)
                if p.id not in config:
                    raise SpaceError(f"active parameter {p.id!r} missing")
                if not p.contains(config[p.id]):
                    raise SpaceError(f"{p.id}={config[p.id]!r} outside its domain")
                partial[p.id] = config[p.id]
        extra = set(config) - expected
        if extra:
            raise SpaceError(f"inactive or unknown parameters present: {sorted(extra)}")

    def sample_value(self, p: Param, rng):
        if p.kind == "CATEGORICAL":
            return p.options[int(rng.integers(len(p.options)))]
        if p.kind == "INT_UNIFORM":
            return int(rng.integers(p.lo, p.hi + 1))
        lo, hi = p.internal_bounds()
        return p.from_internal(float(rng.uniform(lo, hi)))

    def sample_random(self, rng) -> dict:
        config: dict = {}
        for p in self.params:
            if self.is_active(p, config):
                config[p.id] = self.sample_value(p, rng)
        return config


def sample_random(space: SearchSpace, rng) -> dict:
    return space.sample_random(rng)
