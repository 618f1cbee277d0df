"""Command line entry point: simulate -> aec -> features -> evaluate.

Exit codes: 0 success, 2 usage or configuration error, 3 bad input data,
4 file system error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

from .audio_io import read_pair, read_wav, write_wav
from .config import RunConfig
from .controller import ControlConfig
from .errors import ConfigError, InputError
from .features import (EventRecord, evaluate_loo, extract_features, format_confusion,
                       read_features_csv, write_confusion_csv, write_features_csv)
from .pipeline import run_aec
from .simulator import EventLabel, make_dataset, read_manifest
from .stats import read_stats_csv, write_stats_csv

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _override_fields():
    """(owner, field name, type) for every scalar config field exposed as a flag."""
    run = [(None, f.name, type(f.default)) for f in fields(RunConfig)
           if f.name not in ("control", "smoother_seed")]
    ctl = [("control", f.name, type(f.default)) for f in fields(ControlConfig)]
    return run + ctl


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdmh-aec", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="JSON file with RunConfig fields (all optional)")
    g = p.add_argument_group("config overrides")
    for _, name, typ in _override_fields():
        g.add_argument(_flag(name), dest="cfg_" + name, type=typ, metavar=typ.__name__.upper())
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="render a labelled dataset of WAV pairs")
    s.add_argument("--out", type=Path, required=True, help="output directory")
    s.add_argument("--n-per-class", type=int, default=25)
    s.add_argument("--seed", type=int, default=0, help="dataset base seed")
    s.add_argument("--classes", help="comma-separated subset of " +
                   ",".join(lab.value for lab in EventLabel))
    s.add_argument("--duration", type=float, default=12.0, help="clip length in seconds")
    s.add_argument("--interferer", type=Path, help="WAV used instead of synthetic double talk")

    a = sub.add_parser("aec", help="run the canceller on one pair or a whole manifest")
    a.add_argument("ref", nargs="?", type=Path)
    a.add_argument("mic", nargs="?", type=Path)
    a.add_argument("--manifest", type=Path, help="process every pair listed in a manifest")
    a.add_argument("--out-dir", type=Path, default=Path("."))
    a.add_argument("--no-residual", action="store_true", help="skip residual synthesis")

    f = sub.add_parser("features", help="clip features from stats CSVs")
    f.add_argument("stats", nargs="+", type=Path)
    f.add_argument("--manifest", type=Path, help="look up label and seed by clip id")
    f.add_argument("--label", help="label for every file when no manifest is given")
    f.add_argument("-o", "--output", type=Path, default=Path("features.csv"))

    e = sub.add_parser("evaluate", help="leave-one-out k-NN over a features CSV")
    e.add_argument("features", type=Path)
    e.add_argument("-k", type=int, default=5)
    e.add_argument("--confusion-csv", type=Path)
    return p


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    top, ctl = {}, {}
    for owner, name, _ in _override_fields():
        value = getattr(args, "cfg_" + name)
        if value is not None:
            (ctl if owner == "control" else top)[name] = value
    if ctl:
        top["control"] = replace(cfg.control, **ctl)
    return replace(cfg, **top) if top else cfg


def cmd_simulate(args, cfg: RunConfig) -> None:
    classes = None
    if args.classes:
        try:
            classes = [EventLabel.parse(c.strip()) for c in args.classes.split(",") if c.strip()]
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        if not classes:
            raise UsageError("--classes is empty")
    interferer = read_wav(args.interferer, cfg.sample_rate) if args.interferer else None
    make_dataset(args.n_per_class, args.seed, args.out, classes, args.duration, interferer)
    print(args.out / "manifest.csv")


def _aec_one(ref, mic, cfg: RunConfig, stem: str, out_dir: Path, residual: bool) -> Path:
    x, d = read_pair(ref, mic, cfg.sample_rate)
    res = run_aec(x, d, cfg, synthesize=residual)
    if residual:
        write_wav(out_dir / f"{stem}residual.wav", res.residual, cfg.sample_rate)
    stats = out_dir / f"{stem}stats.csv"
    write_stats_csv(stats, res.recorded, res.first_recorded)
    return stats


def cmd_aec(args, cfg: RunConfig) -> None:
    if args.manifest is not None:
        if args.ref or args.mic:
            raise UsageError("give either REF MIC or --manifest, not both")
    elif args.ref is None or args.mic is None:
        raise UsageError("aec needs REF and MIC paths, or --manifest")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.manifest is None:
        print(_aec_one(args.ref, args.mic, cfg, "", args.out_dir, not args.no_residual))
        return
    for row in read_manifest(args.manifest):
        print(_aec_one(row.path_ref, row.path_mic, cfg, f"{row.id}_", args.out_dir,
                       not args.no_residual))


def cmd_features(args, cfg: RunConfig) -> None:
    if args.manifest is None and args.label is None:
        raise UsageError("features needs --manifest or --label")
    lookup = {}
    if args.manifest is not None:
        lookup = {r.id: r for r in read_manifest(args.manifest)}
    records = []
    for path in args.stats:
        _, traj = read_stats_csv(path)
        if args.manifest is not None:
            ident = path.stem[: -len("_stats")] if path.stem.endswith("_stats") else path.stem
            if ident not in lookup:
                raise InputError(f"{path}: clip id {ident!r} not in {args.manifest}")
            label, seed = lookup[ident].label, lookup[ident].seed
        else:
            try:
                label, seed = EventLabel.parse(args.label), 0
            except ConfigError as exc:
                raise UsageError(str(exc)) from None
        try:
            feats = extract_features(traj)
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from None
        records.append(EventRecord(label, feats, seed))
    write_features_csv(args.output, records)
    print(args.output)


def cmd_evaluate(args, cfg: RunConfig) -> None:
    records = read_features_csv(args.features)
    ev = evaluate_loo(records, k=args.k)
    print(f"records: {len(records)}  k: {args.k}  leave-one-out accuracy: {ev.accuracy:.4f}")
    print(format_confusion(ev.confusion))
    if args.confusion_csv is not None:
        write_confusion_csv(args.confusion_csv, ev.confusion)


COMMANDS = {"simulate": cmd_simulate, "aec": cmd_aec, "features": cmd_features,
            "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args)
        COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"sdmh-aec {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"sdmh-aec {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        msg = str(exc) if not getattr(exc, "filename", None) else f"{exc.filename}: {exc.strerror}"
        print(f"sdmh-aec {args.command}: I/O error: {msg}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
