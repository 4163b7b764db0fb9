"""Budgeted suggest -> evaluate -> record loop."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from .._deadline import TrialTimeout, deadline
from .space import SearchSpace
from .tpe import tpe_suggest

log = logging.getLogger(__name__)

STATUSES = ("OK", "FAILED", "TIMEOUT")


class NoResultError(RuntimeError):
    """Raised when a search finishes without a single successful trial."""


@dataclass(frozen=True)
class Budget:
    max_trials: int | None = None
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_trials is None and self.max_seconds is None:
            raise ValueError("a budget needs max_trials and/or max_seconds")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError("max_trials must be positive")
        if self.max_seconds is not None and not self.max_seconds > 0:
            raise ValueError("max_seconds must be positive")

    def default_trial_timeout(self) -> float | None:
        return None if self.max_seconds is None else self.max_seconds / 20


@dataclass
class TrialRecord:
    index: int
    config: dict
    loss: float
    status: str
    seconds: float = 0.0
    seed: int = 0
    error: str = ""


@dataclass
class OptimizationResult:
    best_config: dict
    best_loss: float
    history: list[TrialRecord] = field(default_factory=list)
    best_index: int = -1

    def best_so_far(self) -> list[float]:
        return best_so_far([t.loss for t in self.history])


def best_so_far(losses) -> list[float]:
    out, best = [], math.inf
    for v in losses:
        if math.isfinite(v) and v < best:
            best = v
        out.append(best)
    return out


def run_trial(objective, config: dict, timeout: float | None):
    """Evaluate one configuration; returns ``(loss, status, seconds, error)``."""
    start = time.perf_counter()
    try:
        with deadline(timeout):
            loss = float(objective(config))
        status = "OK" if math.isfinite(loss) else "FAILED"
        err = "" if status == "OK" else "non-finite loss"
        # work that never reached a cooperative check can still overrun
        if timeout is not None and time.perf_counter() - start > timeout:
            status, err = "TIMEOUT", "per-trial time limit exceeded"
    except TrialTimeout as exc:
        loss, status, err = math.inf, "TIMEOUT", str(exc)
    except Exception as exc:  # noqa: BLE001 - any objective failure becomes a FAILED trial
        loss, status, err = math.inf, "FAILED", f"{type(exc).__name__}: {exc}"
    if status != "OK":
        loss = math.inf
    return loss, status, time.perf_counter() - start, err


def optimize(
    space: SearchSpace,
    objective,
    budget: Budget,
    seed: int = 0,
    workers: int = 1,
    trial_timeout: float | None = None,
    sampler: str = "tpe",
    callback=None,
) -> OptimizationResult:
    """Minimize ``objective(config)`` over ``space``.

    With one worker the history is a deterministic function of ``seed``. With
    several workers evaluations run in a process pool while suggestions and the
    history stay with this coordinator; completion order then depends on
    timing, so results are no longer reproducible run to run.
    """
    if sampler not in ("tpe", "random"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    rng = np.random.default_rng(seed)
    if trial_timeout is None:
        trial_timeout = budget.default_trial_timeout()
    history: list[TrialRecord] = []
    start = time.monotonic()

    def time_left() -> bool:
        return budget.max_seconds is None or time.monotonic() - start < budget.max_seconds

    def trials_left(submitted: int) -> bool:
        return budget.max_trials is None or submitted < budget.max_trials

    def suggest() -> dict:
        if sampler == "random":
            return space.sample_random(rng)
        return tpe_suggest(space, history, rng)

    def record(index, config, outcome):
        loss, status, seconds, err = outcome
        rec = TrialRecord(index, config, loss, status, seconds, seed, err)
        history.append(rec)
        if status != "OK":
            log.debug("trial %d %s: %s", index, status, err)
        if callback is not None:
            callback(rec)

    submitted = 0
    if workers == 1:
        while trials_left(submitted) and time_left():
            config = suggest()
            record(submitted, config, run_trial(objective, config, trial_timeout))
            submitted += 1
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = {}
            while True:
                while len(pending) < workers and trials_left(submitted) and time_left():
                    config = suggest()
                    fut = pool.submit(run_trial, objective, config, trial_timeout)
                    pending[fut] = (submitted, config)
                    submitted += 1
                if not pending:
                    break
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in sorted(done, key=lambda f: pending[f][0]):
                    index, config = pending.pop(fut)
                    record(index, config, fut.result())

    ok = [t for t in history if t.status == "OK"]
    if not ok:
        raise NoResultError(f"no successful trial among {len(history)} evaluated")
    best = min(ok, key=lambda t: (t.loss, t.index))
    return OptimizationResult(best.config, best.loss, history, best.index)


def flatten_columns(history) -> list[str]:
    cols: set[str] = set()
    for t in history:
        cols.update(t.config)
    return sorted(cols)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def history_to_csv(history, timing: bool = False) -> str:
    """Trial history as CSV: index, status, loss, [seconds,] then config columns.

    Wall time is excluded unless ``timing`` is set so that reruns with the
    same seed produce byte-identical files.
    """
    cols = flatten_columns(history)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "status", "loss"] + (["seconds"] if timing else []) + cols)
    for t in sorted(history, key=lambda r: r.index):
        row = [t.index, t.status, _fmt(t.loss)]
        if timing:
            row.append(f"{t.seconds:.6f}")
        row += [_fmt(t.config[c]) if c in t.config else "" for c in cols]
        w.writerow(row)
    return buf.getvalue()
