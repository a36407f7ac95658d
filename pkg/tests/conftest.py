"""Shared fixtures: golden-file access for the dual-route regression tests."""

from __future__ import annotations

import pathlib

import numpy as np
import pytest

from spinchain.oracle import decode_complex, load_golden

GOLDEN_DIR = pathlib.Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def golden():
    """Load a golden file once per session; values decoded to complex arrays."""

    cache: dict[str, dict] = {}

    def _load(name: str) -> dict:
        if name not in cache:
            record = load_golden(GOLDEN_DIR / f"{name}.json")
            record["values"] = {
                key: np.asarray(decode_complex(val)) for key, val in record["values"].items()
            }
            cache[name] = record
        return cache[name]

    return _load
