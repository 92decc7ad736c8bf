"""Access to the JSON schemas shipped with the package."""

from __future__ import annotations

import json
from importlib.resources import files

SCHEMAS = ("common", "expsum", "bounds", "moments", "powgen", "discrepancy", "scan", "verify")


def schema(name: str) -> dict:
    """The JSON schema document for one output kind, e.g. ``schema("expsum")``."""
    if name not in SCHEMAS:
        raise KeyError(f"no schema named {name!r}")
    return json.loads(files("spex").joinpath("schemas", f"{name}.json").read_text())
