"""Command-line entry point.

Usage::

    qfridge steady --scenario scenarios/table1_circuit.toml --out report.json
    qfridge sweep --scenario scenarios/fig7a_ej_sweep.toml --format csv --workers 4

Exit status is 0 on success, 2 for scenario and usage errors and 3 for
engine errors. Errors are also written to stderr as one JSON record. A sweep
with failed grid points still writes its table (failed rows carry the error
code in ``status``) and then exits with 3.
"""

import argparse
import json
import sys

from .errors import QFridgeError, ScenarioError
from .runner import COMMANDS, resolve_workers, run_command
from .scenario import SCHEMA_VERSION, load_scenario

EXIT_USAGE = 2
EXIT_ENGINE = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="qfridge", description="Quantum refrigerator simulations.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "steady": "steady-state report",
        "evolve": "time evolution after switching the interaction on",
        "switch": "switch-on/switch-off transient cooling protocol",
        "sweep": "steady states over the scenario's [sweep] grid",
        "window": "tabulate the cooling window and Carnot bound",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", help="output path (default: emit.path from the scenario, else stdout)")
        p.add_argument("--format", choices=("json", "csv"), help="output format (default: emit.format)")
        p.add_argument("--workers", type=int, help="parallel sweep workers (or $QFRIDGE_WORKERS)")
        p.add_argument("--truncation", choices=("auto", "fixed"), default="auto",
                       help="grow 'auto' dims until occupations converge, or use dims as given")
    return parser


def error_record(exc):
    rec = {"schema_version": SCHEMA_VERSION, "error": {
        "code": getattr(exc, "code", "io" if isinstance(exc, OSError) else "internal"),
        "type": type(exc).__name__,
        "message": str(exc),
    }}
    path = getattr(exc, "path", None)
    if isinstance(exc, ScenarioError) and path:
        rec["error"]["path"] = path
    return rec


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_scenario(args.scenario)
        fmt = args.format or cfg.emit["format"]
        out = args.out or cfg.emit["path"]
        workers = resolve_workers(args.workers)
        result = run_command(args.command, cfg, truncation=args.truncation, workers=workers)
        text = result.render(fmt)
    except (ScenarioError, OSError) as exc:
        print(json.dumps(error_record(exc)), file=sys.stderr)
        return EXIT_USAGE
    except QFridgeError as exc:
        print(json.dumps(error_record(exc)), file=sys.stderr)
        return EXIT_ENGINE
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if result.failures:
        rec = {"schema_version": SCHEMA_VERSION, "error": {
            "code": "sweep_points_failed", "type": "SweepFailure",
            "message": f"{result.failures} of {len(result.rows)} grid points failed; see the status column",
        }}
        print(json.dumps(rec), file=sys.stderr)
        return EXIT_ENGINE
    return 0


if __name__ == "__main__":
    sys.exit(main())
