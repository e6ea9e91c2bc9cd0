"""Small shared helpers."""

from __future__ import annotations

import json
import os

WORKERS_ENV = "SEMVOX_WORKERS"


def resolve_workers(workers: int | None = None) -> int:
    """Worker-thread count: explicit argument, else the SEMVOX_WORKERS
    environment variable, else available parallelism."""
    if workers is not None:
        n = int(workers)
    else:
        env = os.environ.get(WORKERS_ENV)
        if env is not None:
            try:
                n = int(env)
            except ValueError:
                raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        else:
            n = os.cpu_count() or 1
    if n < 1:
        raise ValueError(f"worker count must be >= 1, got {n}")
    return n


def canonical_json(obj) -> str:
    """Deterministic JSON rendering (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "),
                      allow_nan=False) + "\n"
