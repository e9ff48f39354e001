"""JSON reports with a fixed layout.

Key order is insertion order and never depends on hashing; rationals are
written as strings (``"3/2"``) so the output is exact and byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .. import __version__

SCHEMA_VERSION = "segrelie-report/1"


def _plain(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_report(command: str, config: dict, source_text: str, result: dict) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "tool": "segrelie",
        "version": __version__,
        "command": command,
        "config": config,
        "input_sha256": input_digest(source_text),
        "result": result,
    }


def render(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, ensure_ascii=False) + "\n"
