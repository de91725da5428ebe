"""Run extreme-value Monte Carlo experiments and the verification suite.

Usage::

    extremal spacing --family pareto --alpha 2 --sizes 100,1000,10000,100000 --seed 42
    extremal amplitude --rate 300 --lifetime-years 100
    extremal run previous_report.csv          # re-run from a config echo
    extremal reproduce-all --seed 42 --out summary.csv

Exit status: 0 success, 1 failed criteria (``reproduce-all``), 2 bad
arguments or config, 3 resource guard, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .acceptance import CRITERIA, reproduce_all
from .errors import ArgumentError, ConfigError, DomainError, InsufficientDataError, ResourceGuardError
from .experiments import EXPERIMENTS, ExperimentConfig, run
from .report import atomic_write, read_config_echo
from .rng import DEFAULT_SEED

log = logging.getLogger("extremal")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE, EXIT_DATA = 0, 1, 2, 3, 4
_COMMON = ("seed", "format", "experiment")


def parse_config_text(text: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment line.

    Reports produced by this tool are accepted too: their ``# config``
    echo block is read instead.
    """
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("# extremal report"):
        try:
            experiment, config = read_config_echo(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        if experiment:
            config["experiment"] = experiment
        return config
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {line!r}", lineno, col)
        key = key.strip()
        if not key.replace("_", "").replace("-", "").isalnum():
            raise ConfigError(f"invalid key {key!r}", lineno, col)
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno, col)
        out[key] = value.strip()
    return out


def _add_common(p: argparse.ArgumentParser, replicates=True):
    p.add_argument("--seed", default=None, help=f"unsigned 64-bit seed (default {DEFAULT_SEED})")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--threads", type=int, default=1, help="worker threads for replicates")
    p.add_argument("--timing", action="store_true", help="include wall-clock duration in the output")
    if replicates:
        p.add_argument("--replicates", default=None, help="number of replicates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extremal", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, exp in EXPERIMENTS.items():
        p = sub.add_parser(name, help=exp.help, description=exp.help)
        _add_common(p)
        p.add_argument("--config", default=None, help="key=value file or previous report")
        for pname, param in exp.params.items():
            if pname == "replicates":
                continue
            default = param.default if not isinstance(param.default, list) else ",".join(map(str, param.default))
            p.add_argument(f"--{pname.replace('_', '-')}", dest=pname, default=None,
                           help=f"{param.help} (default: {default})")
    p = sub.add_parser("run", help="run an experiment from a config file or earlier report")
    p.add_argument("config", help="key=value file or CSV/JSON report")
    _add_common(p)
    p = sub.add_parser("reproduce-all", help="run every verification criterion")
    _add_common(p, replicates=False)
    p.add_argument("--only", default=None, help="comma-separated criterion ids")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    given = {}
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        given.update(parse_config_text(text))
    experiment = args.command if args.command != "run" else given.get("experiment")
    if experiment is None:
        raise ConfigError("config does not name an experiment")
    if given.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {given['experiment']!r}, not {experiment!r}")
    given.pop("experiment", None)
    schema = EXPERIMENTS.get(experiment)
    if schema is None:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if args.command != "run":
        for pname in schema.params:
            value = getattr(args, pname, None)
            if value is not None:
                given[pname] = value
    if args.replicates is not None:
        key = "replicates" if "replicates" in schema.params else "samples" if "samples" in schema.params else None
        if key is None:
            raise ConfigError(f"{experiment} takes no replicate count")
        given[key] = args.replicates
    seed = args.seed if args.seed is not None else given.pop("seed", DEFAULT_SEED)
    given.pop("seed", None)
    fmt = args.format or given.pop("format", "csv")
    given.pop("format", None)
    return ExperimentConfig(experiment, seed, given, fmt, args.out, args.threads)


def _emit(text: str, out: str | None):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "reproduce-all":
            return _reproduce(args)
        config = _config_from_args(args)
        report = run(config)
        log.info("%s finished in %.2fs", config.experiment, report.duration_s)
        _emit(report.render(config.format, args.timing), config.output_path)
        if config.output_path:
            sys.stderr.write(report.table())
        return EXIT_OK
    except (ConfigError, ArgumentError, DomainError) as exc:
        print(f"extremal: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuardError as exc:
        print(f"extremal: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InsufficientDataError as exc:
        print(f"extremal: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA


def _reproduce(args) -> int:
    try:
        seed = int(args.seed) if args.seed is not None else DEFAULT_SEED
    except ValueError:
        raise ConfigError(f"invalid seed {args.seed!r}") from None
    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError:
            raise ConfigError(f"invalid --only {args.only!r}") from None
        unknown = only - {c.id for c in CRITERIA}
        if unknown:
            raise ConfigError(f"unknown criterion id(s): {sorted(unknown)}")
    report = reproduce_all(seed, threads=args.threads, only=only, log=sys.stderr)
    report.config["format"] = args.format or "csv"
    _emit(report.render(args.format or "csv", args.timing), args.out)
    failed = report.summary["total"] - report.summary["passed"]
    print(f"{report.summary['passed']}/{report.summary['total']} criteria passed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
