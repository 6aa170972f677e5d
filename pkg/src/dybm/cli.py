"""Command-line front end.

Subcommands: train, eval, generate, validate, kernel-dump, bench. Machine
output (metrics, reports, CSV) goes to stdout; human progress goes to
stderr. Exit codes: 0 success, 1 validation-suite failure, 2 bad input or
configuration, 3 training divergence. All randomness flows from --seed
flags; nothing is seeded from the clock.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, ModelConfig, Parameters
from .generator import RolloutConfig, eval_prediction, rollout
from .learning import TrainerConfig, TrainingDiverged, sgd_update, step_gradient, train
from .model import advance, expected_footprint, init_state, measured_footprint
from .oracle import forward_kernel, reverse_kernel
from .seriesio import SeriesFormatError, format_series, read_series
from .validate import run_all

__all__ = ["main"]


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_run_config(path: str) -> tuple[ModelConfig, dict, dict]:
    """Read a run configuration file: model config plus trainer and
    generation sections."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or "config" not in doc:
        raise ConfigError(f"{path}: expected an object with a 'config' section")
    cfg = doc["config"]
    try:
        delays = {(int(i), int(j)): int(d) for i, j, d in cfg["connectivity"]}
        config = ModelConfig(
            n_units=cfg["n_units"],
            lambdas=tuple(cfg["lambdas"]),
            mus=tuple(cfg["mus"]),
            delays=delays,
            temperature=cfg.get("temperature", 1.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: invalid config section: {exc}") from exc
    trainer = doc.get("trainer", {})
    generation = doc.get("generation", {})
    if not isinstance(trainer, dict) or not isinstance(generation, dict):
        raise ConfigError(f"{path}: trainer/generation sections must be objects")
    return config, trainer, generation


def _cmd_train(args: argparse.Namespace) -> int:
    config, trainer_doc, _ = _load_run_config(args.config)
    trainer = TrainerConfig(
        learning_rate=(
            args.learning_rate
            if args.learning_rate is not None
            else float(trainer_doc.get("learning_rate", 1e-3))
        ),
        epochs=(
            args.epochs if args.epochs is not None else int(trainer_doc.get("epochs", 1))
        ),
        mode=args.mode if args.mode is not None else trainer_doc.get("mode", "full_batch"),
        shuffle_seed=trainer_doc.get("shuffle_seed"),
    )
    dataset = []
    for path in args.data:
        series = read_series(path)
        if series.shape[1] != config.n_units:
            raise ConfigError(
                f"{path}: series has {series.shape[1]} units, model expects "
                f"{config.n_units}"
            )
        dataset.append(series)
    _log(
        f"training on {len(dataset)} series, mode={trainer.mode}, "
        f"learning_rate={trainer.learning_rate}, epochs={trainer.epochs}"
    )
    params = Parameters.zeros(config)
    params, metrics = train(
        params,
        config,
        dataset,
        trainer,
        record_sink=lambda rec: print(json.dumps(rec), flush=False),
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(save_checkpoint(params, config))
    if metrics.epoch_log_likelihood:
        _log(
            f"done: log-likelihood {metrics.epoch_log_likelihood[0]:.6f} -> "
            f"{metrics.epoch_log_likelihood[-1]:.6f} over "
            f"{len(metrics.epoch_log_likelihood)} epochs"
        )
    _log(f"checkpoint written to {args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    params, config, _ = load_checkpoint(_read(args.model))
    series = read_series(args.data)
    if series.shape[1] != config.n_units:
        raise ConfigError(
            f"{args.data}: series has {series.shape[1]} units, model expects "
            f"{config.n_units}"
        )
    scores = eval_prediction(params, config, series)
    print(
        json.dumps(
            {
                "log_likelihood": scores.log_likelihood,
                "nll_per_bit": scores.nll_per_bit,
                "accuracy": scores.accuracy,
            }
        )
    )
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    params, config, _ = load_checkpoint(_read(args.model))
    primer = None
    if args.primer is not None:
        primer = read_series(args.primer)
        if primer.shape[1] != config.n_units:
            raise ConfigError(
                f"{args.primer}: primer has {primer.shape[1]} units, model "
                f"expects {config.n_units}"
            )
    cfg = RolloutConfig(horizon=args.horizon, mode=args.mode, seed=args.seed, primer=primer)
    series = rollout(params, config, cfg)
    sys.stdout.write(format_series(series))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    reports = run_all(seed=args.seed)
    for report in reports:
        print(report.line())
    elapsed = time.perf_counter() - started
    _log(f"validation suite finished in {elapsed:.1f}s")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_kernel_dump(args: argparse.Namespace) -> int:
    params, config, _ = load_checkpoint(_read(args.model))
    i, j = args.pre, args.post
    if (i, j) not in config.pair_index:
        raise ConfigError(f"pair ({i}, {j}) is not connected in this model")
    if args.max_delta < 1:
        raise ConfigError(f"--max-delta must be >= 1, got {args.max_delta}")
    print("delta,w_forward,w_reverse,w_total")
    for delta in range(1, args.max_delta + 1):
        fwd = forward_kernel(params, config, i, j, delta)
        rev = reverse_kernel(params, config, j, i, delta)
        print(
            f"{delta},{format(fwd, '.17g')},{format(rev, '.17g')},"
            f"{format(fwd + rev, '.17g')}"
        )
    return 0


def _bench_config(n_units: int, fan_in: int) -> ModelConfig:
    delays = {}
    for j in range(n_units):
        for r in range(1, fan_in + 1):
            delays[((j - r) % n_units, j)] = 3
    return ModelConfig(n_units, (0.5,), (0.25,), delays)


def _cmd_bench(args: argparse.Namespace) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    report = {"fan_in": args.fan_in, "steps": args.steps, "sweep": []}
    for n in sizes:
        if args.fan_in >= n:
            raise ConfigError(f"--fan-in must be below the smallest size, got {args.fan_in} vs {n}")
        config = _bench_config(n, args.fan_in)
        params = Parameters.zeros(config)
        state = init_state(config)
        rng = np.random.Generator(np.random.Philox(args.seed))
        data = (rng.random((args.steps, n)) < 0.5).astype(np.int64)
        for x in data[: min(10, args.steps)]:  # warm caches before timing
            state = advance(state, config, x)
        state = init_state(config)
        started = time.perf_counter()
        for x in data:
            grad = step_gradient(params, state, config, x)
            params = sgd_update(params, grad, 1e-3)
            state = advance(state, config, x)
        elapsed = time.perf_counter() - started
        expected = expected_footprint(config)
        measured = measured_footprint(state, params)
        report["sweep"].append(
            {
                "n_units": n,
                "pairs": config.n_pairs,
                "per_synapse_update_us": elapsed / (args.steps * config.n_pairs) * 1e6,
                "trace_scalars": {
                    "measured": measured.trace_scalars,
                    "expected": expected.trace_scalars,
                },
                "param_scalars": {
                    "measured": measured.param_scalars,
                    "expected": expected.param_scalars,
                },
                "queue_bits": {
                    "measured": measured.queue_bits,
                    "expected": expected.queue_bits,
                },
            }
        )
    print(json.dumps(report, indent=2))
    return 0


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dybm",
        description="Train, evaluate, and sample binary time-series models "
        "with exact trace-based online learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("config", help="run configuration JSON")
    p.add_argument("data", nargs="+", help="training series CSV file(s)")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--learning-rate", type=float, default=None, help="override trainer.learning_rate")
    p.add_argument("--epochs", type=int, default=None, help="override trainer.epochs")
    p.add_argument("--mode", choices=("online", "full_batch"), default=None, help="override trainer.mode")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a series under a trained model")
    p.add_argument("model", help="checkpoint path")
    p.add_argument("data", help="series CSV path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("generate", help="roll the model forward, CSV to stdout")
    p.add_argument("model", help="checkpoint path")
    p.add_argument("--horizon", type=int, required=True, help="steps to generate")
    p.add_argument("--mode", choices=("sample", "argmax"), default="sample")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--primer", default=None, help="series CSV absorbed before generating")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("validate", help="run the brute-force equivalence suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("kernel-dump", help="dump one pair's weight kernel as CSV")
    p.add_argument("model", help="checkpoint path")
    p.add_argument("--pre", type=int, required=True, help="source unit index")
    p.add_argument("--post", type=int, required=True, help="target unit index")
    p.add_argument("--max-delta", type=int, default=16, help="largest lag to emit")
    p.set_defaults(func=_cmd_kernel_dump)

    p = sub.add_parser("bench", help="update-cost and storage audit")
    p.add_argument("--sizes", default="8,32,128", help="comma-separated unit counts")
    p.add_argument("--fan-in", type=int, default=4, help="incoming pairs per unit")
    p.add_argument("--steps", type=int, default=200, help="timed steps per size")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainingDiverged as exc:
        _log(f"error: {exc}")
        return 3
    except (ValueError, FileNotFoundError) as exc:
        # ConfigError, CheckpointError, SeriesFormatError and flag
        # validation all surface as ValueError subclasses
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
