"""Command-line entry point: ``fdrelay run | report | validate``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .experiments import ConfigError, CurveSet, emit_report, format_report, load_config, run_experiment
from .model import OscillationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for p in pairs:
        if "=" not in p:
            raise ConfigError(f"--set expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _levels(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdrelay", description="Outage experiments for a power-splitting full-duplex AF relay.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep and write CSV curves")
    run.add_argument("config", help="key=value config file, or a preset name (inr, snr, position)")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a config entry")
    run.add_argument("-o", "--output", help="CSV path (default: the config's output entry, else stdout)")
    run.add_argument("--report", action="store_true", help="print the gain table after the run")

    rep = sub.add_parser("report", help="dB-gain table from a curve CSV")
    rep.add_argument("csv")
    rep.add_argument("--levels", type=_levels, default=(1e-1, 1e-2), help="comma-separated outage levels")
    rep.add_argument("--reference", default="full_csi")

    val = sub.add_parser("validate", help="run the cross-validation property checks")
    val.add_argument("--full", action="store_true", help="use acceptance-size samples (slow)")
    return ap


def _cmd_run(args) -> int:
    overrides = _overrides(args.overrides)
    if args.output:
        overrides["output"] = args.output
    cfg = load_config(args.config, overrides)
    curves = run_experiment(cfg)
    if cfg.output_path is None:
        sys.stdout.write(curves.to_csv())
    else:
        print(f"wrote {len(curves.rows)} rows to {cfg.output_path}", file=sys.stderr)
    if args.report:
        print(format_report(emit_report(curves)))
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        curves = CurveSet.from_csv(args.csv)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read curves from {args.csv}: {exc}") from None
    try:
        rows = emit_report(curves, args.levels, args.reference)
    except KeyError:
        raise ConfigError(f"reference scheme {args.reference!r} not in {args.csv}") from None
    print(format_report(rows))
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validate import run_all

    results = run_all("full" if args.full else "quick")
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "report": _cmd_report, "validate": _cmd_validate}[args.command]
    try:
        with np.errstate(over="ignore"):
            return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, OscillationError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
