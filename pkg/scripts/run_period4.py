#!/usr/bin/env python3
"""Train on the bundled period-4 pattern and show what the model learned.

Usage: python3 scripts/run_period4.py [--epochs 500] [--out model.json]
"""

from __future__ import annotations

import argparse

import numpy as np

from dybm.checkpoint import save_checkpoint
from dybm.config import ModelConfig, Parameters
from dybm.fixtures import PERIOD4_CYCLE, period4_path
from dybm.generator import RolloutConfig, eval_prediction, rollout
from dybm.learning import TrainerConfig, train
from dybm.model import advance, fire_probs, init_state
from dybm.seriesio import read_series


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--learning-rate", type=float, default=0.1)
    parser.add_argument("--out", default=None, help="optional checkpoint path")
    args = parser.parse_args()

    series = read_series(period4_path())
    config = ModelConfig.dense(2, lambdas=(0.5,), mus=(0.25,), delay=2)
    params, metrics = train(
        Parameters.zeros(config),
        config,
        [series],
        TrainerConfig(learning_rate=args.learning_rate, epochs=args.epochs),
    )
    print(
        f"log-likelihood: {metrics.epoch_log_likelihood[0]:.3f} -> "
        f"{metrics.epoch_log_likelihood[-1]:.3f} over {args.epochs} epochs "
        f"({metrics.wall_ms:.0f} ms)"
    )

    state = init_state(config)
    for x in series:
        state = advance(state, config, x)
    print("steady-state next-step confidence per cycle position:")
    for step in range(4):
        target = PERIOD4_CYCLE[step]
        p = fire_probs(params, state, config)
        correct = np.where(target == 1, p, 1.0 - p)
        print(f"  t= {step}: target {target.tolist()}  confidence {correct.min():.4f}")
        state = advance(state, config, target)

    generated = rollout(
        params, config, RolloutConfig(horizon=16, mode="argmax", primer=PERIOD4_CYCLE)
    )
    print("argmax rollout after one-period primer:")
    for row in generated:
        print("  " + " ".join(str(int(v)) for v in row))
    scores = eval_prediction(params, config, np.tile(PERIOD4_CYCLE, (32, 1)))
    print(f"nll per bit on 32 periods: {scores.nll_per_bit:.4f}  accuracy {scores.accuracy:.3f}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(save_checkpoint(params, config))
        print(f"checkpoint written to {args.out}")


if __name__ == "__main__":
    main()
