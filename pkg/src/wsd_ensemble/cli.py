"""Command-line interface: ``wsd-ensemble {inspect,sample,run,classify}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from wsd_ensemble.corpus import (
    FORMATS,
    read_corpus,
    sense_distribution,
    uniform_subsample,
    write_corpus,
)
from wsd_ensemble.ensemble import VoteRule, classify_batch, read_manifest, write_manifest
from wsd_ensemble.errors import ConfigError, WSDError
from wsd_ensemble.evaluation import (
    MCNEMAR_METHODS,
    ExperimentConfig,
    run_experiment,
)
from wsd_ensemble.naive_bayes import DEFAULT_EPSILON, SCORING_MODES

log = logging.getLogger("wsd_ensemble")

DEFAULTS = {
    "format": "marked",
    "k": 5,
    "epsilon": DEFAULT_EPSILON,
    "vote": "majority",
    "per_sense": None,
    "report": ["text", "structured"],
    "stratify_halves": False,
    "mcnemar": "chi2",
    "scoring": "bernoulli",
    "ablation": [],
    "seed": None,
    "out": None,
    "corpus": None,
}
REPORT_FORMATS = ("text", "structured")
EXIT_USAGE = 2
EXIT_FAILURE = 1


def _vote_rule(text: str) -> str:
    try:
        VoteRule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _format_arg(parser: argparse.ArgumentParser, default=None) -> None:
    parser.add_argument(
        "--format", choices=FORMATS, default=default,
        help="corpus format: 'marked' (target wrapped as @@word@@) or "
             "'pretokenized' (normalized tokens plus a target-index column); default marked",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsd-ensemble",
        description="Naive Bayesian ensembles for word sense disambiguation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("inspect", help="print the sense distribution of a corpus",
                       description="Print per-sense instance counts and the total.")
    p.add_argument("corpus", help="path to a sense-tagged corpus file")
    _format_arg(p, "marked")

    p = sub.add_parser("sample", help="draw a uniformly distributed subset",
                       description="Sample the same number of instances from every sense "
                                   "and write them in the marked format.")
    p.add_argument("corpus", help="path to a sense-tagged corpus file")
    _format_arg(p, "marked")
    p.add_argument("--per-sense", type=_positive, required=True,
                   help="instances to draw from every sense")
    p.add_argument("--seed", type=int, required=True, help="random seed (random.Random)")
    p.add_argument("--out", required=True, help="output corpus path")

    p = sub.add_parser("run", help="run the cross-validated ensemble experiment",
                       description="Train the 81-classifier grid on each fold, select "
                                   "ensemble members on devtest and report test accuracy. "
                                   "Flags override values from --config, which override defaults.")
    p.add_argument("corpus", nargs="?", help="path to a sense-tagged corpus file")
    p.add_argument("--config", help="JSON file with any of the options below (underscored keys)")
    _format_arg(p)
    p.add_argument("--k", type=int, help="number of cross-validation folds (default 5)")
    p.add_argument("--seed", type=int, help="random seed for fold assignment and sampling (required)")
    p.add_argument("--epsilon", type=_probability,
                   help=f"probability substituted for zero estimates (default {DEFAULT_EPSILON:g})")
    p.add_argument("--vote", type=_vote_rule,
                   help="vote rule: majority (default), weighted, all81, or category=<L,R> "
                        "with L,R in narrow/medium/wide")
    p.add_argument("--ablation", action="append", type=_vote_rule, metavar="RULE",
                   help="also report test accuracy of this vote rule (repeatable)")
    p.add_argument("--per-sense", type=_positive,
                   help="first subsample this many instances per sense")
    p.add_argument("--out", help="output directory for reports and manifests (required)")
    p.add_argument("--report", action="append", choices=REPORT_FORMATS,
                   help="report format to write (repeatable; default both)")
    p.add_argument("--stratify-halves", action="store_true", default=None,
                   help="split each held-out fold into devtest/test halves by sense")
    p.add_argument("--mcnemar", choices=MCNEMAR_METHODS,
                   help="McNemar variant: chi2 (continuity corrected, default) or exact binomial")
    p.add_argument("--scoring", choices=SCORING_MODES,
                   help="bernoulli (default; absent words count) or presence (present words only)")

    p = sub.add_parser("classify", help="apply a saved ensemble to a corpus",
                       description="Print '<id> TAB <predicted sense>' for every instance.")
    p.add_argument("manifest", help="ensemble manifest.json written by 'run'")
    p.add_argument("corpus", help="path to a corpus file; sense labels are ignored")
    _format_arg(p, "marked")
    return parser


def resolve_run_options(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags."""
    options = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(from_file, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        options.update(from_file)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def _validated_config(options: dict) -> tuple[ExperimentConfig, Path, Path]:
    if options["corpus"] is None:
        raise ConfigError("a corpus path is required")
    if options["seed"] is None:
        raise ConfigError("--seed is required; there is no default seed")
    if options["out"] is None:
        raise ConfigError("--out is required")
    if options["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    reports = options["report"]
    if isinstance(reports, str):
        reports = [reports]
    if not reports or any(r not in REPORT_FORMATS for r in reports):
        raise ConfigError(f"report formats must be drawn from {REPORT_FORMATS}")
    options["report"] = list(dict.fromkeys(reports))
    per_sense = options["per_sense"]
    if per_sense is not None and (not isinstance(per_sense, int) or per_sense < 1):
        raise ConfigError("per_sense must be a positive integer")
    corpus_path = Path(options["corpus"])
    if not corpus_path.is_file():
        raise ConfigError(f"corpus file not found: {corpus_path}")
    try:
        config = ExperimentConfig(
            seed=options["seed"],
            k=options["k"],
            epsilon=options["epsilon"],
            vote=options["vote"],
            scoring=options["scoring"],
            stratify_halves=bool(options["stratify_halves"]),
            mcnemar=options["mcnemar"],
            ablations=tuple(options["ablation"] or ()),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return config, corpus_path, Path(options["out"])


def _publish(staging: Path, out: Path) -> None:
    """Move everything from ``staging`` into ``out``, replacing same-named entries."""
    out.mkdir(parents=True, exist_ok=True)
    for item in sorted(staging.iterdir()):
        target = out / item.name
        if target.is_dir() and not target.is_symlink():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        os.replace(item, target)


def cmd_inspect(args) -> int:
    corpus = read_corpus(args.corpus, args.format, allow_empty=True)
    counts = sense_distribution(corpus)
    width = max([len("total"), len("sense")] + [len(s) for s in counts])
    print(f"{'sense':<{width}}  count")
    for sense, n in counts.items():
        print(f"{sense:<{width}}  {n:>5}")
    print(f"{'total':<{width}}  {sum(counts.values()):>5}")
    return 0


def cmd_sample(args) -> int:
    corpus = read_corpus(args.corpus, args.format)
    sample = uniform_subsample(corpus, args.per_sense, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            write_corpus(sample, fh)
        os.replace(tmp, out)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    print(f"wrote {len(sample)} instances ({args.per_sense} per sense) to {out}")
    return 0


def cmd_run(args) -> int:
    options = resolve_run_options(args)
    config, corpus_path, out = _validated_config(options)
    corpus = read_corpus(corpus_path, options["format"])
    if options["per_sense"] is not None:
        corpus = uniform_subsample(corpus, options["per_sense"], config.seed)
    log.info("running %d-fold experiment on %d instances", config.k, len(corpus))
    report = run_experiment(corpus, config)

    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=out.parent, prefix=f".{out.name}.staging-"))
    try:
        if "text" in options["report"]:
            (staging / "report.txt").write_text(report.to_text(), encoding="utf-8")
        if "structured" in options["report"]:
            (staging / "report.json").write_text(report.to_json(), encoding="utf-8")
        for fold in report.folds:
            write_manifest(fold.ensemble, staging / f"fold_{fold.fold + 1}")
        _publish(staging, out)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    print(report.summary_line())
    return 0


def cmd_classify(args) -> int:
    ensemble = read_manifest(args.manifest)
    corpus = read_corpus(args.corpus, args.format)
    for inst, sense in zip(corpus, classify_batch(ensemble, corpus)):
        print(f"{inst.id}\t{sense}")
    return 0


COMMANDS = {
    "inspect": cmd_inspect,
    "sample": cmd_sample,
    "run": cmd_run,
    "classify": cmd_classify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stay quiet
        sys.stdout = open(os.devnull, "w")
        return EXIT_FAILURE
    except ConfigError as exc:
        print(f"wsd-ensemble {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WSDError, OSError) as exc:
        print(f"wsd-ensemble {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
