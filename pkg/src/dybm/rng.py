"""Reproducible sampling streams.

All sampling uses the counter-based Philox generator, which produces the
same stream on every platform. The splitting rule: the stream for
generated time step ``t`` is the base stream for the run seed jumped ``t``
times, and within a step the units consume one double each in ascending
unit order. Two runs with the same seed therefore agree bit for bit, and
a step's draws do not depend on how many steps precede it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["step_stream"]


def step_stream(seed: int, step: int) -> np.random.Generator:
    """Independent substream for one generated time step."""
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    return np.random.Generator(np.random.Philox(seed).jumped(step))
