"""Command-line front end.

    qlimits run --config CFG --seed SEED --out DIR [--workers K]
    qlimits validate --config CFG
    qlimits list-presets

``CFG`` is a path to a JSON config or ``preset:NAME``.  Exit codes: 0 when
every non-vacuous verdict passes, 2 when a verdict fails, 1 on usage or
config errors.  The worker count defaults to ``$QLIMITS_WORKERS`` and then
to the number of logical cores.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from importlib import resources
from pathlib import Path

from .experiments import (
    WORKERS_ENV,
    ConfigError,
    default_workers,
    load_config,
    parse_experiment,
    run_experiment,
)
from .experiments.report import FORMAT_VERSION

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
PRESET_PREFIX = "preset:"


def preset_paths() -> dict[str, Path]:
    root = resources.files("qlimits") / "presets"
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


def _resolve_config(arg: str) -> Path:
    if arg.startswith(PRESET_PREFIX):
        name = arg[len(PRESET_PREFIX):]
        presets = preset_paths()
        if name not in presets:
            raise ConfigError(arg, f"unknown preset; choose from {sorted(presets)}")
        return presets[name]
    return Path(arg)


def _load(arg: str):
    path = _resolve_config(arg)
    cfg = load_config(path)
    return path, parse_experiment(cfg, base_dir=path.parent)


def _seed(text: str) -> int:
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def _positive(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        val = 0
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return val


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "probe"


def cmd_run(args) -> int:
    try:
        path, exp = _load(args.config)
        workers = args.workers if args.workers is not None else default_workers()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE

    start = time.perf_counter()
    report = run_experiment(exp, args.seed, workers)
    elapsed = time.perf_counter() - start

    (out / "report.json").write_text(report.to_json())
    for name, text in report.csv_tables().items():
        (out / f"{_safe_name(name)}.csv").write_text(text)
    manifest = {"format_version": FORMAT_VERSION, "config": str(path), "seed": args.seed,
                "out": str(out), "workers": workers, "wall_seconds": round(elapsed, 3),
                "backend": report.runtime.get("backend")}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")

    for p in report.probes:
        print(f"{p['name']:<24} {p['verdict']}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{exp.theorem}: {report.verdict} ({elapsed:.1f}s, {workers} worker(s))")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_validate(args) -> int:
    try:
        _, exp = _load(args.config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"ok: {exp.theorem}, {len(exp.probes)} probe(s), n_schedule={exp.n_schedule}, "
          f"replicas={exp.replicas}")
    return EXIT_OK


def cmd_list_presets(args) -> int:
    for name, path in preset_paths().items():
        theorem = json.loads(path.read_text())["theorem"]
        print(f"{name}\t{theorem}\t{path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlimits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write report.json plus CSVs")
    run.add_argument("--config", required=True, help="config path or preset:NAME")
    run.add_argument("--seed", required=True, type=_seed, help="master seed (unsigned 64-bit)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=_positive, default=None,
                     help=f"worker processes (default: ${WORKERS_ENV} or logical cores)")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True, help="config path or preset:NAME")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-presets", help="print the bundled preset configs")
    lst.set_defaults(func=cmd_list_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
