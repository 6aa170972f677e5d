"""Committed desk-scale datasets used by the tests and the docs.

* ``period4.csv``: two units, the four-step cycle (1,0), (0,0), (0,1),
  (0,0) repeated eight times. One unit fires, two silent steps later the
  other answers.
* ``random_n3.csv``: 48 seeded random steps over three units (regenerate
  with ``scripts/make_fixtures.py``).

Matching ``*_run.json`` files hold ready-to-use run configurations.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "PERIOD4_CYCLE",
    "fixture_path",
    "period4_path",
    "period4_run_path",
    "random_n3_path",
    "random_n3_run_path",
]

# One period of the two-unit cycle, time order.
PERIOD4_CYCLE = np.array([[1, 0], [0, 0], [0, 1], [0, 0]], dtype=np.int64)


def fixture_path(name: str) -> Path:
    path = Path(str(resources.files(__package__) / name))
    if not path.exists():
        raise FileNotFoundError(f"fixture {name!r} not found at {path}")
    return path


def period4_path() -> Path:
    return fixture_path("period4.csv")


def period4_run_path() -> Path:
    return fixture_path("period4_run.json")


def random_n3_path() -> Path:
    return fixture_path("random_n3.csv")


def random_n3_run_path() -> Path:
    return fixture_path("random_n3_run.json")
