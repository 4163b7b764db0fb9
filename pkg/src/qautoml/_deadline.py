"""Cooperative per-trial wall-clock limits.

Long loops (SMO iterations, QNN epochs) call :func:`check_deadline`; the search
loop wraps each trial in :func:`deadline`. Nothing is interrupted asynchronously.
"""
from __future__ import annotations

import contextvars
import time
from contextlib import contextmanager

_DEADLINE: contextvars.ContextVar[float | None] = contextvars.ContextVar("qautoml_deadline", default=None)


class TrialTimeout(RuntimeError):
    pass


@contextmanager
def deadline(seconds: float | None):
    if seconds is None:
        yield
        return
    token = _DEADLINE.set(time.monotonic() + seconds)
    try:
        yield
    finally:
        _DEADLINE.reset(token)


def check_deadline() -> None:
    limit = _DEADLINE.get()
    if limit is not None and time.monotonic() > limit:
        raise TrialTimeout("per-trial time limit exceeded")
