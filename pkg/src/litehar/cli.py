"""Command line frontend: extract | train | predict | evaluate | synth.

Defaults match the benchmark configuration (D=10,000 kernels, 1 kHz
recordings decimated to 500 Hz, alpha grid 10^linspace(-3,3,10), 10-fold
cross-validation, 10 runs). All randomness flows from --kernel-seed and
--run-seed (plus --data-seed for synthetic data), which are echoed in the
report headers, so any command rerun with the same flags writes identical
result files.

A --config file holds key=value lines (keys are the long flag names, '#'
comments allowed); explicit flags override it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .data import (
    DatasetConfig,
    canonical_class_order,
    load_dataset_report,
    load_signals,
    save_recordings_csv,
)
from .evaluate import (
    EvalConfig,
    collect_predictions,
    masked_accuracy,
    report_from_predictions,
    write_confusion_csv,
    write_report_csv,
    write_subcarrier_csv,
    write_timing_csv,
)
from .kernels import generate_kernels, load_kernels, save_kernels
from .ridge import DEFAULT_ALPHAS, fit_bank, load_bank, predict_bank_indices, save_bank
from .synth import SynthSpec, generate
from .transform import save_features, transform_dataset, transform_sample
from .voting import ChannelMask, parse_mask, vote

_CLASS_WORDS = {"six": 6, "seven": 7}


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--data", metavar="DIR", help="directory of recording CSVs")
    g.add_argument("--synth", action="store_true", help="use a generated synthetic dataset")
    g.add_argument("--classes", default="six",
                   help="six|seven for real data; a class count for --synth (default: six)")
    g.add_argument("--source-rate", type=float, default=1000.0,
                   help="recording sample rate in Hz (default: 1000)")
    g.add_argument("--target-rate", type=float, default=500.0,
                   help="rate to decimate to (default: 500)")
    g.add_argument("--amplitude-columns", default="1,91", metavar="START,STOP",
                   help="half-open column range of the amplitudes (default: 1,91)")
    g.add_argument("--timestamp-column", action=argparse.BooleanOptionalAction, default=True,
                   help="whether column 0 is a timestamp (default: yes)")
    g.add_argument("--glob", default="**/input_*.csv", help="recording file pattern")
    g.add_argument("--delimiter", default=",", help="CSV delimiter (default: ,)")
    g.add_argument("--channels-per-antenna", type=int, default=30,
                   help="subcarriers per antenna (default: 30)")
    g.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="mean-subtract and l2-normalize each subcarrier (default: yes)")
    g.add_argument("--cache-dir", metavar="DIR",
                   help="cache preprocessed datasets here, keyed by config + file hashes")
    s = p.add_argument_group("synthetic data (with --synth)")
    s.add_argument("--channels", type=int, default=90, help="channel count M (default: 90)")
    s.add_argument("--length", type=int, default=10000, help="samples per signal (default: 10000)")
    s.add_argument("--samples-per-class", type=int, default=20, help="default: 20")
    s.add_argument("--snr-db", type=float, default=20.0,
                   help="signature RMS over unit noise, in dB (default: 20)")
    s.add_argument("--data-seed", type=int, default=0, help="synthetic generator seed")
    s.add_argument("--informative", default="all",
                   help="'all' or comma list of 1-based channels carrying class signal")
    s.add_argument("--rate", type=float, default=500.0, help="synthetic sample rate in Hz")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("kernels")
    g.add_argument("--num-kernels", "-D", type=int, default=10000,
                   help="random kernel count D (default: 10000)")
    g.add_argument("--kernel-seed", type=int, default=0, help="kernel generation seed")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="key=value file of defaults; flags override it")
    p.add_argument("--threads", type=int,
                   help="cap compiled-transform threads (results are identical at any count)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="litehar",
        description="CSI activity recognition with random convolution kernels, "
                    "a per-subcarrier ridge bank, and majority voting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    p = sub.add_parser("extract", help="write kernels.csv + features.csv for a dataset")
    _add_dataset_flags(p)
    _add_kernel_flags(p)
    _add_common_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_extract)
    commands["extract"] = p

    p = sub.add_parser("train", help="fit the classifier bank and persist it")
    _add_dataset_flags(p)
    _add_kernel_flags(p)
    _add_common_flags(p)
    p.add_argument("--alphas", default="", metavar="A1,A2,...",
                   help="regularization grid (default: 10 log-spaced in 1e-3..1e3)")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_train)
    commands["train"] = p

    p = sub.add_parser("predict", help="classify recording files with a trained bank")
    p.add_argument("inputs", nargs="+", metavar="RECORDING.csv")
    p.add_argument("--model", required=True, metavar="DIR",
                   help="directory written by `litehar train`")
    p.add_argument("--mask", default="all",
                   help="'all', 'antennas:1,2', or 'channels:1-30,61-90'")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_predict)
    commands["predict"] = p

    p = sub.add_parser("evaluate", help="cross-validate and write report CSVs")
    _add_dataset_flags(p)
    _add_kernel_flags(p)
    _add_common_flags(p)
    p.add_argument("--alphas", default="", metavar="A1,A2,...",
                   help="regularization grid (default: 10 log-spaced in 1e-3..1e3)")
    p.add_argument("--run-seed", type=int, default=0, help="fold shuffling seed")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--mask", default="all",
                   help="'all', 'antennas:1,2', or 'channels:1-30,61-90'")
    p.add_argument("--stratified", action=argparse.BooleanOptionalAction, default=True,
                   help="stratify folds by class (default: yes)")
    p.add_argument("--vary-kernel-seed", action="store_true",
                   help="redraw kernels each run instead of only reshuffling folds")
    p.add_argument("--antenna-sweep", action="store_true",
                   help="also re-vote under every antenna subset and write antenna_sweep.csv")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_evaluate)
    commands["evaluate"] = p

    p = sub.add_parser("synth", help="write a synthetic dataset in the loader's CSV layout")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_synth)
    commands["synth"] = p

    return parser, commands


def _config_tokens(path: str, subparser: argparse.ArgumentParser) -> list[str]:
    """Turn a key=value config file into CLI tokens for ``subparser``."""
    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            actions[opt] = action
    tokens: list[str] = []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        flag = "--" + key.strip().lower().replace("_", "-")
        value = value.strip()
        if flag not in actions:
            raise ValueError(f"{path}:{lineno}: unknown config key {key.strip()!r}")
        action = actions[flag]
        truthy = value.lower() in ("1", "true", "yes", "on")
        if isinstance(action, argparse.BooleanOptionalAction):
            tokens.append(flag if truthy else "--no-" + flag[2:])
        elif action.const is True:  # store_true flags
            if truthy:
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    return tokens


def _expand_config(argv: list[str], commands: dict) -> list[str]:
    if not argv or argv[0] not in commands:
        return argv
    command, rest = argv[0], argv[1:]
    passthrough: list[str] = []
    from_config: list[str] = []
    i = 0
    while i < len(rest):
        tok = rest[i]
        if tok == "--config":
            if i + 1 >= len(rest):
                raise ValueError("--config needs a file argument")
            from_config.extend(_config_tokens(rest[i + 1], commands[command]))
            i += 2
        elif tok.startswith("--config="):
            from_config.extend(_config_tokens(tok.split("=", 1)[1], commands[command]))
            i += 1
        else:
            passthrough.append(tok)
            i += 1
    # config tokens first, so explicit flags win
    return [command] + from_config + passthrough


def _class_count(text: str) -> int:
    if text.lower() in _CLASS_WORDS:
        return _CLASS_WORDS[text.lower()]
    return int(text)


def _class_set(text: str) -> str:
    t = text.lower()
    if t in ("six", "6"):
        return "six"
    if t in ("seven", "7"):
        return "seven"
    raise ValueError(f"--classes must be six or seven for real data, got {text!r}")


def _dataset_config(args) -> DatasetConfig:
    try:
        start, stop = (int(v) for v in args.amplitude_columns.split(","))
    except ValueError:
        raise ValueError(
            f"--amplitude-columns must be START,STOP, got {args.amplitude_columns!r}"
        ) from None
    return DatasetConfig(
        class_set=_class_set(args.classes),
        source_rate_hz=args.source_rate,
        target_rate_hz=args.target_rate,
        amplitude_columns=(start, stop),
        has_timestamp_column=args.timestamp_column,
        file_glob=args.glob,
        delimiter=args.delimiter,
        channels_per_antenna=args.channels_per_antenna,
        normalize_signals=args.normalize,
    )


def _synth_spec(args) -> SynthSpec:
    informative = None
    if args.informative.strip().lower() != "all":
        informative = tuple(int(v) for v in args.informative.split(","))
    return SynthSpec(
        classes=_class_count(args.classes),
        channels=args.channels,
        length=args.length,
        samples_per_class=args.samples_per_class,
        snr_db=args.snr_db,
        seed=args.data_seed,
        informative_channels=informative,
        sample_rate_hz=args.rate,
    )


def _load_source(args):
    if args.synth and args.data:
        raise ValueError("give either --data or --synth, not both")
    if args.synth:
        return generate(_synth_spec(args))
    if args.data:
        samples, report = load_dataset_report(
            args.data, _dataset_config(args), cache_dir=args.cache_dir
        )
        print(report.summary())
        return samples
    raise ValueError("need a dataset: pass --data DIR or --synth")


def _alphas(args) -> tuple:
    text = getattr(args, "alphas", "") or ""
    if not text.strip():
        return tuple(DEFAULT_ALPHAS)
    return tuple(float(v) for v in text.split(","))


def _apply_threads(args) -> None:
    if getattr(args, "threads", None) is None:
        return
    import numba

    n = max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


def _extract_features(samples, args):
    l_input = min(s.length for s in samples)
    kernel_set = generate_kernels(args.kernel_seed, args.num_kernels, l_input)
    return kernel_set, transform_dataset(samples, kernel_set)


def cmd_extract(args) -> int:
    samples = _load_source(args)
    kernel_set, features = _extract_features(samples, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_kernels(kernel_set, out / "kernels.csv")
    save_features(features, [s.source_id for s in samples], out / "features.csv")
    print(
        f"extracted {features.shape[0]} samples x {features.shape[1]} subcarriers "
        f"x {features.shape[2]} features (kernel_seed={args.kernel_seed})"
    )
    print(f"wrote {out / 'kernels.csv'} and {out / 'features.csv'}")
    return 0


def cmd_train(args) -> int:
    samples = _load_source(args)
    labels = [s.label for s in samples]
    kernel_set, features = _extract_features(samples, args)
    bank = fit_bank(
        features,
        labels,
        _alphas(args),
        class_labels=canonical_class_order(labels),
        kernel_seed=args.kernel_seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_bank(bank, out / "model.npz")
    save_kernels(kernel_set, out / "kernels.csv")
    alphas = sorted({m.alpha for m in bank.models})
    print(
        f"trained {bank.num_channels}-channel bank on {len(samples)} samples, "
        f"classes: {', '.join(str(c) for c in bank.class_labels)}"
    )
    print(f"selected alphas: {', '.join(f'{a:g}' for a in alphas)}")
    print(f"wrote {out / 'model.npz'} and {out / 'kernels.csv'}")
    return 0


def cmd_predict(args) -> int:
    model_dir = Path(args.model)
    bank = load_bank(model_dir / "model.npz")
    kernel_set = load_kernels(model_dir / "kernels.csv")
    if bank.kernel_seed is not None and kernel_set.seed != bank.kernel_seed:
        raise ValueError(
            f"model/kernel mismatch: bank was trained with kernel seed "
            f"{bank.kernel_seed}, {model_dir / 'kernels.csv'} has seed {kernel_set.seed}"
        )
    if bank.num_kernels != len(kernel_set):
        raise ValueError(
            f"model/kernel mismatch: bank expects {bank.num_kernels} kernels, "
            f"{model_dir / 'kernels.csv'} has {len(kernel_set)}"
        )
    config = _dataset_config(args)
    mask = None
    if args.mask.strip().lower() != "all":
        mask = parse_mask(args.mask, bank.num_channels, args.channels_per_antenna)
    for name in args.inputs:
        signals = load_signals(name, config)
        if signals.shape[0] != bank.num_channels:
            raise ValueError(
                f"{name}: expected {bank.num_channels} channels, got {signals.shape[0]}"
            )
        feature_matrix = transform_sample(signals, kernel_set)
        preds = predict_bank_indices(bank, feature_matrix.values[None])
        record = vote(preds[0], bank.num_classes, mask)
        label = bank.class_labels[record.final - 1]
        counts = " ".join(
            f"{c}={n}" for c, n in zip(bank.class_labels, record.counts)
        )
        print(f"{name}: {label}  votes: {counts}")
    return 0


_SWEEP_ANTENNA_SETS = ((1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))


def cmd_evaluate(args) -> int:
    samples = _load_source(args)
    num_channels = samples[0].num_channels
    mask = None
    if args.mask.strip().lower() != "all":
        mask = parse_mask(args.mask, num_channels, args.channels_per_antenna)
    config = EvalConfig(
        num_kernels=args.num_kernels,
        kernel_seed=args.kernel_seed,
        run_seed=args.run_seed,
        folds=args.folds,
        runs=args.runs,
        alphas=_alphas(args),
        mask=mask,
        stratified=args.stratified,
        vary_kernel_seed=args.vary_kernel_seed,
    )
    pred = collect_predictions(samples, config)
    report = report_from_predictions(pred, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out / "report.csv")
    write_confusion_csv(report.confusion, out / "confusion.csv")
    write_subcarrier_csv(
        report.per_subcarrier_accuracy, out / "subcarrier_accuracy.csv",
        channels_per_antenna=args.channels_per_antenna,
    )
    write_timing_csv(report.timing, out / "timing.csv")

    print(
        f"evaluation: {report.num_samples} samples, {report.num_channels} subcarriers, "
        f"D={report.num_kernels}, {report.fold_count}-fold x {report.run_count} runs "
        f"(kernel_seed={report.kernel_seed}, run_seed={report.run_seed})"
    )
    for label, acc in zip(report.class_labels, report.per_class_accuracy):
        print(f"  {label:<12s} {acc:.4f}")
    print(f"  {'average':<12s} {report.average_accuracy:.4f}")
    print(f"  {'overall':<12s} {report.overall_accuracy:.4f}")
    t = report.timing
    print(
        f"timing: train {t.total_train_s:.2f}s, inference {t.total_infer_s:.2f}s "
        f"({t.infer_per_sample_s * 1e3:.2f} ms/sample marginal)"
    )

    if args.antenna_sweep:
        num_antennas = max(1, num_channels // args.channels_per_antenna)
        sets = [s for s in _SWEEP_ANTENNA_SETS if all(a <= num_antennas for a in s)]
        with open(out / "antenna_sweep.csv", "w", newline="") as fh:
            fh.write("# litehar-antenna-sweep v1\n")
            fh.write("antennas,accuracy\n")
            print("antenna sweep:")
            for antenna_set in sets:
                sweep_mask = ChannelMask.antennas(
                    antenna_set, num_channels, args.channels_per_antenna
                )
                acc = masked_accuracy(pred, sweep_mask)
                name = "+".join(str(a) for a in antenna_set)
                fh.write(f"{name},{acc!r}\n")
                print(f"  antennas {name:<6s} {acc:.4f}")
    print(f"reports in {out}")
    return 0


def cmd_synth(args) -> int:
    spec = _synth_spec(args)
    samples = generate(spec)
    out = Path(args.out)
    paths = save_recordings_csv(samples, out)
    print(
        f"wrote {len(paths)} recordings ({spec.classes} classes x "
        f"{spec.samples_per_class} samples, {spec.channels} channels x "
        f"{spec.length} steps at {spec.sample_rate_hz:g} Hz) to {out}"
    )
    print(
        "reload with: --source-rate "
        f"{spec.sample_rate_hz:g} --target-rate {spec.sample_rate_hz:g} "
        f"--amplitude-columns 1,{spec.channels + 1}"
    )
    return 0


def main(argv=None) -> int:
    parser, commands = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv, commands)
        args = parser.parse_args(argv)
        _apply_threads(args)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"litehar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
