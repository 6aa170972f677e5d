"""Trace state and the per-step conditional distribution.

State carried between time steps, per model:

* ``alpha[m, k]``: arrived-spike trace of pair ``m = (i, j)``. Every spike
  of unit ``i`` enters with weight 1 the moment it has crossed the pair's
  delay, then decays by ``lambdas[k]`` each step.
* ``gamma[i, l]``: source trace of unit ``i``. Each spike enters with weight
  ``mus[l]`` and decays by ``mus[l]`` each step.
* ``queues[m]``: the last ``d - 1`` values of the source unit, newest first;
  these are the spikes still in transit on the pair's delay line.

The near-window trace ``beta[m, l]`` is derived from the queue on every
call, never carried recursively: carrying it forward would repeatedly
multiply by ``1/mu`` and is numerically unstable. Its coefficients
``mu**(-lag)`` grow toward the delay horizon on purpose (they mirror the
near side of the weight kernel); the configuration validator bounds them.

All update functions are pure: ``advance`` returns a fresh state and leaves
its input untouched, so snapshots can be read concurrently and compared.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .config import ModelConfig, Parameters, as_time_slice

__all__ = [
    "TraceState",
    "Footprint",
    "init_state",
    "advance",
    "beta",
    "unit_energy",
    "fire_prob",
    "fire_probs",
    "cond_prob",
    "expected_footprint",
    "measured_footprint",
    "alpha_update_variant",
]

# Validation hook: "decay_then_add" is the recursion consistent with the
# trace definitions (the freshly arrived spike enters with coefficient 1);
# "add_then_decay" folds the arrival in before decaying, which skews the
# newest term by one decay factor. The faulty variant exists only so the
# validation suite can demonstrate that its equivalence check catches it.
ALPHA_UPDATE_VARIANTS = ("decay_then_add", "add_then_decay")
_alpha_update_variant = "decay_then_add"


@contextmanager
def alpha_update_variant(name: str):
    """Temporarily switch the arrival-trace recursion (fault injection)."""
    global _alpha_update_variant
    if name not in ALPHA_UPDATE_VARIANTS:
        raise ValueError(f"unknown alpha update variant {name!r}")
    previous = _alpha_update_variant
    _alpha_update_variant = name
    try:
        yield
    finally:
        _alpha_update_variant = previous


@dataclass
class TraceState:
    """Everything the model remembers about the past.

    ``queues[m]`` is a plain list of 0/1 ints, index 0 = lag 1 (newest),
    last index = lag ``d - 1``. ``step_count`` counts absorbed slices.
    """

    alpha: np.ndarray
    gamma: np.ndarray
    queues: list[list[int]]
    step_count: int = 0

    def copy(self) -> "TraceState":
        return TraceState(
            self.alpha.copy(),
            self.gamma.copy(),
            [list(q) for q in self.queues],
            self.step_count,
        )


@dataclass(frozen=True)
class Footprint:
    """Stored-size audit: trace reals, queue bits, parameter reals."""

    trace_scalars: int
    queue_bits: int
    param_scalars: int


def init_state(config: ModelConfig) -> TraceState:
    """Fresh state, equivalent to an infinite all-zero history."""
    return TraceState(
        alpha=np.zeros((config.n_pairs, config.n_lambda)),
        gamma=np.zeros((config.n_units, config.n_mu)),
        queues=[[0] * (config.delays[p] - 1) for p in config.pairs],
        step_count=0,
    )


def advance(state: TraceState, config: ModelConfig, new_slice) -> TraceState:
    """Absorb one observed slice and return the successor state.

    For each pair, the element leaving the queue (the spike that has just
    finished crossing the delay; the slice itself when the delay is 1)
    enters the arrival trace with coefficient 1 after the old trace has
    decayed. Source traces decay and absorb the new slice in one step.
    """
    x = as_time_slice(new_slice, config.n_units)
    arr = config.arrays
    n_pairs = config.n_pairs

    arrived = np.empty(n_pairs, dtype=np.float64)
    queues: list[list[int]] = []
    for m in range(n_pairs):
        q = state.queues[m]
        xi = int(x[arr.pre[m]])
        if q:
            arrived[m] = q[-1]
            queues.append([xi] + q[:-1])
        else:
            arrived[m] = xi
            queues.append([])

    if _alpha_update_variant == "decay_then_add":
        alpha = state.alpha * arr.lam[None, :] + arrived[:, None]
    else:
        alpha = (state.alpha + arrived[:, None]) * arr.lam[None, :]
    gamma = (state.gamma + x[:, None].astype(np.float64)) * arr.mu[None, :]
    return TraceState(alpha, gamma, queues, state.step_count + 1)


def _beta_matrix(state: TraceState, config: ModelConfig) -> np.ndarray:
    """Near-window traces for all pairs, shape (n_pairs, n_mu); computed
    fresh from the queues on every call."""
    arr = config.arrays
    out = np.zeros((config.n_pairs, config.n_mu))
    for m, q in enumerate(state.queues):
        if q:
            out[m] = arr.beta_coeffs[m] @ np.asarray(q, dtype=np.float64)
    return out


def beta(state: TraceState, config: ModelConfig, i: int, j: int, ell: int) -> float:
    """Near-window trace of pair (i, j) for decay rate index ``ell``:
    sum over lag s in [1, d-1] of mus[ell]**(-s) * queue[s - 1]."""
    try:
        m = config.pair_index[(i, j)]
    except KeyError:
        raise ValueError(f"pair ({i}, {j}) is not connected") from None
    q = state.queues[m]
    if not q:
        return 0.0
    return float(config.arrays.beta_coeffs[m][ell] @ np.asarray(q, dtype=np.float64))


def _drives(params: Parameters, state: TraceState, config: ModelConfig) -> np.ndarray:
    """Per-unit input drive: bias plus the trace-weighted pair terms.

    drive[j] = bias[j] + sum over incoming pairs (u . alpha - v . beta)
    minus, for each outgoing pair (j, i), v[(j, i)] . gamma[i]. The energy
    of firing is minus the drive; staying silent always has energy zero.
    """
    arr = config.arrays
    drive = params.bias.astype(np.float64).copy()
    if config.n_pairs:
        b = _beta_matrix(state, config)
        incoming = (params.u * state.alpha).sum(axis=1) - (params.v * b).sum(axis=1)
        drive += np.bincount(arr.post, weights=incoming, minlength=config.n_units)
        outgoing = (params.v * state.gamma[arr.post]).sum(axis=1)
        drive -= np.bincount(arr.pre, weights=outgoing, minlength=config.n_units)
    return drive


def unit_energy(
    params: Parameters, state: TraceState, config: ModelConfig, j: int, x_j: int
) -> float:
    """Energy contribution of unit ``j`` taking value ``x_j`` next step."""
    if x_j not in (0, 1):
        raise ValueError(f"x_j must be 0 or 1, got {x_j!r}")
    if x_j == 0:
        return 0.0
    return float(-_drives(params, state, config)[j])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    out[~pos] = z[~pos] - np.log1p(np.exp(z[~pos]))
    return out


def fire_probs(params: Parameters, state: TraceState, config: ModelConfig) -> np.ndarray:
    """Probability that each unit fires next step, given the state."""
    return _sigmoid(_drives(params, state, config) / config.temperature)


def fire_prob(params: Parameters, state: TraceState, config: ModelConfig, j: int) -> float:
    """Single-unit firing probability; sigmoid of drive over temperature,
    evaluated with the sign-branched form so large drives cannot overflow."""
    if not 0 <= j < config.n_units:
        raise IndexError(f"unit index {j} out of range")
    return float(fire_probs(params, state, config)[j])


def cond_prob(
    params: Parameters, state: TraceState, config: ModelConfig, slice_values
) -> tuple[float, float]:
    """Probability of one full next slice, and its log.

    Units are conditionally independent given the state, so the result is a
    product of per-unit firing (or silence) probabilities. The log form is
    the numerically safe one; the plain probability may underflow to 0 for
    wide networks, which is why both are returned.
    """
    x = as_time_slice(slice_values, config.n_units)
    z = _drives(params, state, config) / config.temperature
    signed = np.where(x == 1, z, -z)
    log_p = float(_log_sigmoid(signed).sum())
    return float(np.exp(log_p)), log_p


def expected_footprint(config: ModelConfig) -> Footprint:
    """Storage the model is allowed: one trace real per (pair, arrival rate)
    plus one per (unit, source rate); one queue bit per in-transit step; one
    parameter real per bias and per pair-rate coefficient."""
    m = config.n_pairs
    return Footprint(
        trace_scalars=m * config.n_lambda + config.n_units * config.n_mu,
        queue_bits=sum(d - 1 for d in config.delays.values()),
        param_scalars=config.n_units + m * (config.n_lambda + config.n_mu),
    )


def measured_footprint(state: TraceState, params: Parameters) -> Footprint:
    """Storage actually held by a state/parameter pair."""
    return Footprint(
        trace_scalars=state.alpha.size + state.gamma.size,
        queue_bits=sum(len(q) for q in state.queues),
        param_scalars=params.bias.size + params.u.size + params.v.size,
    )
