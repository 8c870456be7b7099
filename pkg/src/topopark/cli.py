"""Command-line entry point: ``topopark {synth,features,experiment,render}``.

Exit codes: 0 success, 1 pipeline error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig, load_config
from .errors import EmptyConfig, FormatError, InvalidConfig, TopoParkError
from .features import FEATURE_CHANNELS, FeatureMatrix, compute_feature_matrix, read_feature_matrix, write_feature_matrix
from .ingest import ChannelId, Label, fit_normalizer, load_manifest, load_trials, normalize_trial, parse_trial_csv
from .learn import Mode, evaluate_classification, evaluate_regression, pvi_features, run_classification, run_regression
from .persistence import EssentialPolicy, read_diagram_csv, sublevel_persistence, threshold_diagram, write_diagram_csv
from .pimage import rasterize, read_image_csv, to_pgm, write_image_csv
from .synth import SynthConfig, generate_dataset

_INPUT_ERRORS = (FileNotFoundError, EmptyConfig, FormatError, InvalidConfig)


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON config; flags override its values")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, help="random seed (used by synth)")


def _pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--manifest", type=Path, help="dataset manifest JSON")
    p.add_argument("--threshold", type=float, help="minimum lifetime kept in diagrams")
    p.add_argument("--essential", choices=[e.value for e in EssentialPolicy],
                   help="how to report the component born at the global minimum")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topopark", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    _common(p)
    p.add_argument("--subjects", type=int, nargs=3, metavar=("HY", "HE", "PD"))
    p.add_argument("--trials", type=int, nargs=3, metavar=("HY", "HE", "PD"))
    p.add_argument("--length", type=int, nargs=2, metavar=("MIN", "MAX"))

    p = sub.add_parser("features", help="compute the persistence-image feature matrix")
    _common(p)
    _pipeline_flags(p)
    p.add_argument("--channels", nargs="+", help="featurize only these channels (debugging)")

    p = sub.add_parser("experiment", help="leave-one-subject-out evaluation")
    _common(p)
    _pipeline_flags(p)
    p.add_argument("--task", required=True, choices=["binary", "three-class", "regress"])
    p.add_argument("--features", type=Path, help="precomputed feature matrix instead of --manifest")
    p.add_argument("--descriptor", choices=["pimage", "pvi"], default="pimage",
                   help="persistence images or the peak-velocity baseline")
    p.add_argument("--C", type=float, dest="C", help="regularization parameter")
    p.add_argument("--epsilon", type=float, help="regression insensitivity")
    p.add_argument("--fold-safe", action="store_true", default=None,
                   help="refit normalization on every training fold")

    p = sub.add_parser("render", help="emit diagram / image / signal artifacts")
    _common(p)
    _pipeline_flags(p)
    p.add_argument("input", type=Path, help="trial CSV, diagram CSV or image CSV")
    p.add_argument("--kind", required=True, choices=["diagram", "image", "signal"])
    p.add_argument("--channel", default="x")
    return parser


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {"out": args.out, "jobs": args.jobs}
    for name in ("manifest", "threshold", "seed"):
        if hasattr(args, name):
            overrides[name] = getattr(args, name)
    if getattr(args, "essential", None):
        overrides["essential"] = EssentialPolicy(args.essential)
    if getattr(args, "fold_safe", None):
        overrides["fold_safe"] = True
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilon"] = args.epsilon
    if getattr(args, "C", None) is not None:
        overrides["C_regress" if args.task == "regress" else "C_classify"] = args.C
    return cfg.with_overrides(**overrides)


def _require_manifest(cfg: PipelineConfig) -> Path:
    if cfg.manifest is None:
        raise UsageError("--manifest is required")
    if not Path(cfg.manifest).is_file():
        raise FileNotFoundError(f"manifest not found: {cfg.manifest}")
    return Path(cfg.manifest)


def _load_normalized(cfg: PipelineConfig):
    manifest = load_manifest(_require_manifest(cfg))
    trials = load_trials(manifest)
    norm = fit_normalizer(trials)
    return trials, [normalize_trial(t, norm) for t in trials]


def cmd_synth(args) -> int:
    cfg = _config(args)
    kwargs = {"seed": cfg.seed}
    if args.subjects:
        kwargs["subjects_per_class"] = tuple(args.subjects)
    if args.trials:
        kwargs["trials_per_subject"] = dict(zip(
            (Label.HEALTHY_YOUNG, Label.HEALTHY_ELDERLY, Label.PARKINSONS), args.trials))
    if args.length:
        kwargs["length_range"] = tuple(args.length)
    try:
        synth_cfg = SynthConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = generate_dataset(synth_cfg)
    path = data.write(cfg.out)
    print(f"wrote {len(data.trials)} trials for {len(data.subjects)} subjects; manifest {path}")
    return 0


def cmd_features(args) -> int:
    cfg = _config(args)
    if args.channels:
        cfg = cfg.select_channels(args.channels)
    _, normalized = _load_normalized(cfg)
    counts = []
    fm = compute_feature_matrix(normalized, cfg.images, cfg.threshold, cfg.essential, cfg.thresholds,
                                jobs=cfg.jobs, counts_out=counts)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_matrix(out / "features.csv", fm)
    print(f"{len(fm)} trials x {fm.X.shape[1]} features -> {out / 'features.csv'}")
    for c in cfg.images:
        per_trial = [cnt[c] for cnt in counts]
        print(f"  {c.column:>2}: diagram points mean {np.mean(per_trial):.1f} "
              f"min {min(per_trial)} max {max(per_trial)}")
    return 0


def _pvi_matrix(trials) -> FeatureMatrix:
    X = np.vstack([pvi_features(t) for t in trials])
    return FeatureMatrix(
        subjects=[t.subject_id for t in trials],
        trials=[t.trial_index for t in trials],
        labels=[t.label for t in trials],
        updrs=np.array([t.updrs for t in trials]),
        X=X,
        columns=[f"pvi_{c.column}" for c in FEATURE_CHANNELS],
    )


def cmd_experiment(args) -> int:
    cfg = _config(args)
    extra = {"descriptor": args.descriptor}
    if args.features is not None:
        if cfg.fold_safe:
            raise UsageError("--fold-safe needs raw trials (--manifest), not --features")
        if not args.features.is_file():
            raise FileNotFoundError(f"feature matrix not found: {args.features}")
        fm = read_feature_matrix(args.features)
    elif args.descriptor == "pvi":
        _, normalized = _load_normalized(cfg)
        fm = _pvi_matrix(normalized)
    elif cfg.fold_safe:
        fm = None
    else:
        _, normalized = _load_normalized(cfg)
        fm = compute_feature_matrix(normalized, cfg.images, cfg.threshold, cfg.essential, cfg.thresholds, jobs=cfg.jobs)
        extra.update(threshold=cfg.threshold, essential=cfg.essential.value)

    if fm is None:
        trials = load_trials(load_manifest(_require_manifest(cfg)))
        common = dict(configs=cfg.images, threshold=cfg.threshold, policy=cfg.essential, fold_safe=True, jobs=cfg.jobs)
        if args.task == "regress":
            report = run_regression(trials, C=cfg.C_regress, epsilon=cfg.epsilon, **common)
        else:
            report = run_classification(trials, C=cfg.C_classify, mode=Mode(args.task), **common)
        report.hyperparameters.update(extra)
    elif args.task == "regress":
        report = evaluate_regression(fm, cfg.C_regress, cfg.epsilon, jobs=cfg.jobs, extra=extra)
    else:
        report = evaluate_classification(fm, cfg.C_classify, Mode(args.task), jobs=cfg.jobs, extra=extra)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"report_{args.task}.json"
    path.write_text(json.dumps(report.to_json(), indent=1) + "\n", encoding="utf-8")
    if args.task == "regress":
        print(f"pearson r = {report.pearson_r:.4f}, p = {report.p_value:.4g} -> {path}")
    else:
        print(f"accuracy = {report.accuracy:.4f} (subject-level {report.subject_accuracy:.4f}) -> {path}")
    return 0


def _sniff(path: Path) -> str:
    with path.open(encoding="utf-8") as fh:
        head = fh.readline().strip().lower()
    if head.startswith("t,") or head == ",".join(("t", "x", "y", "fx", "fy", "fz", "mx", "my", "mz")):
        return "trial"
    if head == "birth,death":
        return "diagram"
    return "image"


def normalized_channel(path: Path, channel: ChannelId, manifest: Path | None):
    """One channel of a trial, normalized against ``manifest`` or, failing that, itself."""
    trial = parse_trial_csv(path)
    if manifest is not None:
        norm = fit_normalizer(load_trials(load_manifest(manifest)))
        return normalize_trial(trial, norm).channels[channel]
    centered = trial.channels[channel] - trial.channels[channel].mean()
    peak = np.max(np.abs(centered))
    return centered / peak if peak > 0 else centered


def cmd_render(args) -> int:
    cfg = _config(args)
    if not args.input.is_file():
        raise FileNotFoundError(f"input not found: {args.input}")
    try:
        channel = ChannelId.parse(args.channel)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.manifest is not None and not Path(cfg.manifest).is_file():
        raise FileNotFoundError(f"manifest not found: {cfg.manifest}")
    kind = _sniff(args.input)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.input.stem}_{channel.column}"

    if kind == "trial":
        signal = normalized_channel(args.input, channel, cfg.manifest)
        if args.kind == "signal":
            lines = ["index,value"] + [f"{i},{v!r}" for i, v in enumerate(signal.tolist())]
            target = out / f"{stem}_signal.csv"
            target.write_text("\n".join(lines) + "\n", encoding="utf-8")
            print(target)
            return 0
        diagram = threshold_diagram(sublevel_persistence(signal, cfg.essential, channel), cfg.threshold)
    elif args.kind == "signal":
        raise UsageError("kind=signal needs a trial CSV")
    elif kind == "diagram":
        diagram = read_diagram_csv(args.input)
    else:
        diagram = None

    if args.kind == "diagram":
        if diagram is None:
            raise UsageError("kind=diagram needs a trial or diagram CSV")
        target = out / f"{stem}_diagram.csv"
        write_diagram_csv(target, diagram)
        print(f"{target} ({len(diagram)} pairs)")
        return 0

    if diagram is not None:
        if channel not in cfg.images:
            raise UsageError(f"no image configuration for channel {channel.column}")
        pixels = rasterize(diagram, cfg.images[channel]).pixels
        write_image_csv(out / f"{stem}_image.csv", pixels)
    else:
        pixels = read_image_csv(args.input)
    target = out / f"{stem}_image.pgm"
    target.write_bytes(to_pgm(pixels))
    print(target)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "experiment": cmd_experiment,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except _INPUT_ERRORS as exc:
        print(f"topopark: error: {exc}", file=sys.stderr)
        return 2
    except TopoParkError as exc:
        print(f"topopark: pipeline error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
