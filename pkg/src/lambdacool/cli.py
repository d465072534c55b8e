"""Command-line interface: ``lambdacool <verb> [config] [--section.key value ...]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, NumericalError, UnknownFigure, ValidationError
from .config import load_config
from .oracle import oracle_check
from .sweep import FIGURES, reproduce, run_sweep, write_csv, format_cell

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

_VERB_OBSERVABLE = {
    "chi-eit": "chi_eit",
    "chi-rir": "chi_rir",
    "cool": "cooling",
}


def split_overrides(tokens):
    """Turn ``--section.key value`` / ``--section.key=value`` tokens into a dict."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(f"unrecognized argument {tok!r}")
        body = tok[2:]
        if "=" in body:
            key, value = body.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"{tok} needs a value")
            key, value = body, tokens[i + 1]
            i += 2
        out[key] = value
    return out


def build_parser():
    p = argparse.ArgumentParser(
        prog="lambdacool",
        description="Atomic Lambda-media susceptibilities and hybrid optomechanical cooling. "
                    "Any config key can be overridden with --section.key VALUE.")
    sub = p.add_subparsers(dest="verb", required=True)

    # every run verb evaluates its observable over [sweep] when the config has one
    def add_run(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="INI config file")
        s.add_argument("-o", "--output", help="CSV path (default: stdout)")
        s.add_argument("--plot-script", action="store_true", help="also write a matplotlib script")
        s.add_argument("--workers", type=int, help="worker processes (default LAMBDACOOL_THREADS)")
        return s

    add_run("chi-eit", "EIT susceptibility")
    add_run("chi-rir", "RIR susceptibility")
    add_run("field", "medium-dressed field (EIT cavity or RIR free space, from run.scheme)")
    add_run("cool", "cooling figures of merit at operating.delta_cm_tilde")
    add_run("sweep", "evaluate run.observable over the [sweep] grid")

    r = sub.add_parser("reproduce", help="regenerate a figure's data from its preset")
    r.add_argument("figure", help=f"one of {', '.join(FIGURES)}")
    r.add_argument("-o", "--output-dir", default=".", help="directory for CSV and sidecar")
    r.add_argument("--plot-script", action="store_true")
    r.add_argument("--workers", type=int)

    o = sub.add_parser("oracle-check", help="compare time-domain oracles with closed forms")
    o.add_argument("--n-eit", type=int, default=20)
    o.add_argument("--n-rir", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tol", type=float, default=1e-6)
    return p


def _observable_for(verb, cfg):
    if verb in _VERB_OBSERVABLE:
        return _VERB_OBSERVABLE[verb]
    if verb == "field":
        return "field_rir" if cfg.scheme == "rir_cascade" else "field_eit"
    return cfg.observable


def _run_config(args, overrides):
    cfg = load_config(args.config, overrides)
    obs = _observable_for(args.verb, cfg)
    if obs != cfg.observable:
        cfg = cfg.with_overrides({"run.observable": obs})
    columns, rows = run_sweep(cfg, args.workers)
    if args.output:
        write_csv(args.output, cfg, columns, rows, plot_script=args.plot_script)
    else:
        print(",".join(columns))
        for row in rows:
            print(",".join(format_cell(row[c]) for c in columns))
    failed = [r["error"] for r in rows if r["error"]]
    if failed and len(failed) == len(rows):
        print(f"error: {failed[0]}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _oracle_check(args):
    records = oracle_check(args.n_eit, args.n_rir, args.seed)
    worst = {}
    for rec in records:
        worst[rec.kind] = max(worst.get(rec.kind, 0.0), rec.error)
    ok = all(rec.error <= args.tol for rec in records)
    for kind, err in worst.items():
        status = "PASS" if err <= args.tol else "FAIL"
        n = sum(1 for r in records if r.kind == kind)
        print(f"{status} {kind}: {n} points, worst relative error {err:.3e} (tol {args.tol:g})")
    return EXIT_OK if ok else EXIT_ORACLE


def main(argv=None):
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    try:
        overrides = split_overrides(rest)
        if args.verb == "oracle-check":
            if overrides:
                raise ConfigError("oracle-check takes no config overrides")
            return _oracle_check(args)
        if args.verb == "reproduce":
            written = reproduce(args.figure, args.output_dir, overrides, args.workers,
                                args.plot_script)
            for path in written:
                print(path)
            return EXIT_OK
        return _run_config(args, overrides)
    except (ConfigError, ValidationError, UnknownFigure) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
