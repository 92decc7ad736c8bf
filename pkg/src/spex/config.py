"""Runtime knobs shared by the compute modules.

``SPEX_THREADS`` sets the worker count and ``SPEX_BUDGET`` overrides every
per-operation work budget at once. Explicit arguments always win.
"""

from __future__ import annotations

import os

DEFAULT_BUDGETS = {
    "sum_units": 10**8,
    "count_I": 10**9,
    "J_distribution": 10**9,
    "moments": 10**9,
    "discrepancy": 10**9,
    "koksma_szusz": 10**7,
}


def threads(value: int | None = None) -> int:
    if value is not None:
        if value < 1:
            raise ValueError("worker count must be >= 1")
        return value
    env = os.environ.get("SPEX_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def budget(kind: str, value: int | None = None) -> int:
    if value is not None:
        return value
    env = os.environ.get("SPEX_BUDGET")
    if env:
        return int(float(env))
    return DEFAULT_BUDGETS[kind]
