"""Execution lanes for independent chain runs.

Results are collected in task order, so lane count never changes numbers:
chains carry their own (seed, stream) and are merged deterministically.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_LANES = "UEGLAB_LANES"


def resolve_lanes(lanes: int | None = None) -> int:
    if lanes is not None and lanes > 0:
        return int(lanes)
    env = os.environ.get(ENV_LANES, "")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return n if n > 0 else 1


def map_indexed(fn, tasks, lanes: int | None = None) -> list:
    """Apply fn over tasks, preserving order; >1 lanes uses process workers."""
    lanes = resolve_lanes(lanes)
    tasks = list(tasks)
    if lanes <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(lanes, len(tasks))) as ex:
        return list(ex.map(fn, tasks))
