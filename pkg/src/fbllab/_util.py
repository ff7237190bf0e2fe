"""Small shared helpers: seeding, thread count, JSON-safe conversion."""

from __future__ import annotations

import json
import os

import numpy as np

THREADS_ENV = "FBL_LAB_THREADS"


def mix_seed(seed: int, *salts: int) -> int:
    """Stable seed derivation, independent of interpreter hash randomization."""
    h = (int(seed) & 0xFFFFFFFF) ^ 0x9E3779B9
    for s in salts:
        h = (h * 1000003 + (int(s) & 0xFFFFFFFF) + 0x7F4A7C15) & 0xFFFFFFFF
    return h


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (obj != obj):  # NaN guard for reports
        return None
    return obj


def dump_json(obj, indent: int = 2) -> str:
    return json.dumps(jsonable(obj), indent=indent, sort_keys=True)
