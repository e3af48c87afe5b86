#!/usr/bin/env python3
"""
Quantum Groupoid Verifier - Command Line Interface
Exact symbolic checks of Hopf algebroids, twists and Lie bialgebroids
"""

import sys
import logging
import argparse
from pathlib import Path

from src.qgroupoid_verifier import __version__, list_checks, load_scenario, run_scenario
from src.utils.config_loader import get_config_loader
from src.utils.exceptions import ScenarioParseError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


def configure_logging(verbose: bool, quiet: bool):
    level_name = get_config_loader().get_value('system', 'LOG_LEVEL', 'WARNING')
    level = getattr(logging, str(level_name).upper(), logging.WARNING)
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")


def command_run(args) -> int:
    paths = []
    for target in args.paths:
        target = Path(target)
        paths.extend(sorted(target.glob("*.scn")) if target.is_dir() else [target])
    if not paths:
        print("❌ No scenario files given")
        return EXIT_USAGE

    report_format = args.report or get_config_loader().get_value('system', 'REPORT_FORMAT', 'text')
    include_timings = not args.no_timings
    exit_code = EXIT_OK
    frames = []
    machine = []

    for path in paths:
        try:
            scenario = load_scenario(path)
            if not args.quiet and report_format == 'text':
                print(f"🌱 {scenario.name} ({scenario.kind}, hbar^{args.order or scenario.order})")
            report, status = run_scenario(scenario, checks=args.check, order=args.order,
                                          max_degree=args.max_degree)
        except ScenarioParseError as e:
            print(f"❌ {path}: {e}")
            return EXIT_USAGE
        except OSError as e:
            print(f"❌ Cannot read {path}: {e}")
            return EXIT_USAGE

        exit_code = max(exit_code, status)
        frames.append(report.to_dataframe())
        if report_format == 'machine':
            machine.append(report.to_json(include_timings))
        else:
            text = report.to_text()
            machine.append(text)
            print(text)
            print()

    if report_format == 'machine':
        output = machine[0] if len(machine) == 1 else "[\n" + ",\n".join(machine) + "\n]"
        if not args.out:
            print(output)
    else:
        output = "\n\n".join(machine)

    if args.out:
        out_path = Path(args.out)
        write_text(out_path, output)
        print(f"Saved report: {out_path}")

    if args.output_csv:
        import pandas as pd
        df = pd.concat(frames, ignore_index=True)
        out_path = Path(args.output_csv)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(out_path, index=False)
        print(f"Saved CSV: {out_path}")

    if report_format == 'text':
        if exit_code == EXIT_OK:
            print("🎯 Every scenario met its expectation")
        else:
            print("❌ At least one scenario did not meet its expectation")
    return exit_code


def command_list_checks(args) -> int:
    rows = list_checks()
    width = max(len(name) for name, _, _ in rows)
    for name, families, description in rows:
        print(f"{name:<{width}}  [{families}]  {description}")
    return EXIT_OK


def command_version(args) -> int:
    print(f"qgroupoid-verifier {__version__}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Quantum Groupoid Verifier CLI")
    parser.add_argument('--config', type=str, help='Path to an alternative qgroupoid_config.json')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--quiet', action='store_true', help='Errors only')
    sub = parser.add_subparsers(dest='command')

    run = sub.add_parser('run', help='Run scenario files (or every *.scn in a directory)')
    run.add_argument('paths', nargs='+', help='Scenario files or directories')
    run.add_argument('--check', action='append', help='Run only this check (repeatable)')
    run.add_argument('--order', type=int, help='Override the truncation order')
    run.add_argument('--max-degree', type=int, help='Override the maximum probe coefficient degree')
    run.add_argument('--report', choices=['text', 'machine'], help='Report format')
    run.add_argument('--out', type=str, help='Write the report to this path')
    run.add_argument('--output-csv', type=str, help='Path to write CSV of per-check outcomes')
    run.add_argument('--no-timings', action='store_true', help='Omit timings from machine reports')
    run.set_defaults(handler=command_run)

    checks = sub.add_parser('list-checks', help='List every available check')
    checks.set_defaults(handler=command_list_checks)

    version = sub.add_parser('version', help='Print the version')
    version.set_defaults(handler=command_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if not getattr(args, 'handler', None):
        parser.print_help()
        return EXIT_USAGE

    try:
        if args.config:
            get_config_loader(args.config)
        configure_logging(args.verbose, args.quiet)
        for section, problems in get_config_loader().validate_config().items():
            logging.getLogger(__name__).warning("Configuration issues in %s: %s", section, problems)
        return args.handler(args)
    except (FileNotFoundError, ValueError) as e:
        print(f"❌ {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
