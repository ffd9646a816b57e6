"""Command line entry point.

    fracdyn run <config>
    fracdyn sweep <config>
    fracdyn validate <config>
    fracdyn scenarios list
    fracdyn scenarios export <name> [-o FILE]

Exit codes: 0 success, 2 configuration error, 3 numeric abort, 4 I/O error.
``FRACDYN_OUTPUT_DIR`` overrides ``output.dir``.
"""

import argparse
import logging
import sys
from importlib import resources

from . import config as config_mod
from .errors import ConfigError, DomainError, NonFiniteError, SingularityError
from .runner import run, sweep

log = logging.getLogger("fracdyn")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def scenario_names():
    files = resources.files("fracdyn").joinpath("scenarios").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".yaml"))


def scenario_text(name):
    if name not in scenario_names():
        raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(scenario_names())}")
    return resources.files("fracdyn").joinpath("scenarios", f"{name}.yaml").read_text()


def _cmd_run(args):
    m = run(config_mod.load(args.config))
    for name in m.outputs:
        print(name)
    return EXIT_OK


def _cmd_sweep(args):
    m = sweep(config_mod.load(args.config))
    for name in m.outputs:
        print(name)
    return EXIT_OK


def _cmd_validate(args):
    cfg = config_mod.load(args.config).validate()
    print(f"ok: {cfg.experiment} ({cfg.digest()[:12]})")
    return EXIT_OK


def _cmd_scenarios(args):
    if args.action == "list":
        for name in scenario_names():
            print(name)
        return EXIT_OK
    if not args.name:
        raise ConfigError("scenarios export needs a scenario name")
    text = scenario_text(args.name)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracdyn",
        description="Fractional stochastic, fuzzy and hybrid dynamics experiments.",
        epilog="Exit codes: 0 success, 2 configuration error, 3 numeric abort, 4 I/O error.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = (
        ("run", _cmd_run, "run one experiment and write its outputs"),
        ("sweep", _cmd_sweep, "run the config's ensemble and write a summary CSV"),
        ("validate", _cmd_validate, "check a config without running it"),
    )
    for name, fn, text in commands:
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="path to a YAML experiment config")
        p.set_defaults(func=fn)
    p = sub.add_parser("scenarios", help="list or export the bundled scenario configs")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("name", nargs="?", help="scenario to export")
    p.add_argument("-o", "--output", help="write to FILE instead of stdout")
    p.set_defaults(func=_cmd_scenarios)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteError, SingularityError, DomainError, ArithmeticError) as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        print(f"numeric abort{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
