"""Network configuration and learnable parameters.

A model is a network of ``n_units`` binary units. Each ordered pair
``(i, j)`` in the connectivity set carries a conduction delay
``d[i, j] >= 1`` and two banks of weight coefficients: ``u`` (potentiation,
one coefficient per arrival decay rate) and ``v`` (depression, one per
near-window decay rate). Unit histories enter the model only through
geometric sums (eligibility traces) and a short per-pair FIFO queue, which
is what keeps online learning exact with bounded memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ConfigError", "ModelConfig", "Parameters", "as_time_slice"]

# Largest representable double; the near-window trace uses coefficients that
# grow like (1/mu)**lag, so configs must keep that below this bound.
_LOG_FLOAT_MAX = math.log(np.finfo(np.float64).max)


class ConfigError(ValueError):
    """Raised when a model configuration violates an invariant."""


def _check_rates(name: str, rates: tuple[float, ...]) -> None:
    if len(rates) == 0:
        raise ConfigError(f"{name} must contain at least one decay rate")
    for idx, r in enumerate(rates):
        if not (0.0 < r < 1.0) or not math.isfinite(r):
            raise ConfigError(
                f"{name}[{idx}] must lie strictly inside (0, 1), got {r!r}"
            )


@dataclass
class ModelConfig:
    """Shape and fixed hyper-parameters of one model.

    ``delays`` maps each connected ordered pair ``(i, j)`` to its conduction
    delay; the connectivity set is exactly the key set. Decay rates are
    fixed hyper-parameters, not learned.
    """

    n_units: int
    lambdas: tuple[float, ...]
    mus: tuple[float, ...]
    delays: dict[tuple[int, int], int]
    temperature: float = 1.0

    def __post_init__(self) -> None:
        self.n_units = int(self.n_units)
        self.lambdas = tuple(float(r) for r in self.lambdas)
        self.mus = tuple(float(r) for r in self.mus)
        self.delays = {
            (int(i), int(j)): int(d) for (i, j), d in dict(self.delays).items()
        }
        self.temperature = float(self.temperature)
        self.validate()

    @classmethod
    def dense(
        cls,
        n_units: int,
        *,
        lambdas: tuple[float, ...] = (0.5,),
        mus: tuple[float, ...] = (0.25,),
        delay: int = 2,
        temperature: float = 1.0,
        self_pairs: bool = True,
    ) -> "ModelConfig":
        """All-to-all connectivity with one shared delay.

        The keyword defaults are the documented defaults used whenever a
        caller does not care: single decay rates 0.5 / 0.25, delay 2, unit
        temperature, self pairs included (a self pair links a unit's own
        past to its present; same-time self influence does not exist).
        """
        pairs = {
            (i, j): delay
            for i in range(n_units)
            for j in range(n_units)
            if self_pairs or i != j
        }
        return cls(n_units, lambdas, mus, pairs, temperature)

    def validate(self) -> None:
        if self.n_units < 1:
            raise ConfigError(f"n_units must be >= 1, got {self.n_units}")
        _check_rates("lambdas", self.lambdas)
        _check_rates("mus", self.mus)
        if not (self.temperature > 0.0) or not math.isfinite(self.temperature):
            raise ConfigError(
                f"temperature must be a positive real, got {self.temperature!r}"
            )
        for (i, j), d in self.delays.items():
            if not (0 <= i < self.n_units and 0 <= j < self.n_units):
                raise ConfigError(
                    f"delays[({i}, {j})]: unit index out of range for "
                    f"{self.n_units} units"
                )
            if d < 1:
                raise ConfigError(f"delays[({i}, {j})] must be >= 1, got {d}")
        # Overflow guard: the near-window trace evaluates (1/mu)**lag up to
        # lag = max_delay - 1, which must stay below the float maximum.
        if self.delays:
            mu_min = min(self.mus)
            if (self.max_delay - 1) * math.log(1.0 / mu_min) >= _LOG_FLOAT_MAX:
                raise ConfigError(
                    "mus/delays overflow guard: (1/min(mus))**(max_delay-1) "
                    "exceeds the double-precision range"
                )

    # Derived views -------------------------------------------------------

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Connected ordered pairs, sorted; index order for u/v/alpha rows."""
        return tuple(sorted(self.delays))

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], int]:
        return {pair: m for m, pair in enumerate(self.pairs)}

    @property
    def n_pairs(self) -> int:
        return len(self.delays)

    @property
    def n_lambda(self) -> int:
        return len(self.lambdas)

    @property
    def n_mu(self) -> int:
        return len(self.mus)

    @cached_property
    def max_delay(self) -> int:
        return max(self.delays.values(), default=1)

    @cached_property
    def arrays(self) -> "_DerivedArrays":
        """Cached vector views used by the hot paths. Treat as read-only."""
        return _DerivedArrays(self)


class _DerivedArrays:
    """Per-config numpy views: pair endpoints, delays, decay rates, and the
    per-pair near-window coefficient tables mu**(-lag) for lag 1..d-1."""

    def __init__(self, config: ModelConfig) -> None:
        pairs = config.pairs
        self.pre = np.array([i for i, _ in pairs], dtype=np.int64)
        self.post = np.array([j for _, j in pairs], dtype=np.int64)
        self.delay = np.array([config.delays[p] for p in pairs], dtype=np.int64)
        self.lam = np.asarray(config.lambdas, dtype=np.float64)
        self.mu = np.asarray(config.mus, dtype=np.float64)
        coeffs = []
        for d in self.delay:
            lags = np.arange(1, int(d))
            coeffs.append(self.mu[:, None] ** (-lags[None, :]))
        self.beta_coeffs = tuple(coeffs)


@dataclass
class Parameters:
    """Learnable state: per-unit bias plus per-pair u and v coefficient rows.

    Rows of ``u`` and ``v`` follow ``config.pairs`` order; columns follow
    ``lambdas`` / ``mus`` order.
    """

    bias: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)

    @classmethod
    def zeros(cls, config: ModelConfig) -> "Parameters":
        """Neutral start: every unit fires with probability one half."""
        return cls(
            bias=np.zeros(config.n_units),
            u=np.zeros((config.n_pairs, config.n_lambda)),
            v=np.zeros((config.n_pairs, config.n_mu)),
        )

    def validate_for(self, config: ModelConfig) -> None:
        shapes = {
            "bias": (self.bias.shape, (config.n_units,)),
            "u": (self.u.shape, (config.n_pairs, config.n_lambda)),
            "v": (self.v.shape, (config.n_pairs, config.n_mu)),
        }
        for name, (got, want) in shapes.items():
            if got != want:
                raise ValueError(f"parameter {name} has shape {got}, expected {want}")
        for name, arr in (("bias", self.bias), ("u", self.u), ("v", self.v)):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter {name} contains non-finite entries")

    def copy(self) -> "Parameters":
        return Parameters(self.bias.copy(), self.u.copy(), self.v.copy())


def as_time_slice(values, n_units: int) -> np.ndarray:
    """Coerce one time step of unit values to an int vector, checking shape
    and that every entry is 0 or 1."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.shape[0] != n_units:
        raise ValueError(
            f"time slice must be a length-{n_units} vector, got shape {arr.shape}"
        )
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("time slice entries must be 0 or 1")
    return arr.astype(np.int64)
