"""Command-line front end: ``levilab run <scenario>`` and ``levilab list``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ScenarioError
from .graphs import example_library
from .parallel import default_threads
from .scenario import bundled_scenarios, dumps, read_scenario, report_text, resolve_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def list_examples() -> str:
    """Sorted catalog of library examples and bundled scenarios."""
    lines = ["examples:"]
    for name, entry in example_library().items():
        lines.append(f"  {name:<16} {entry.kind:<7} {entry.description}")
    lines.append("scenarios:")
    for name in bundled_scenarios():
        lines.append(f"  {name}")
    return "\n".join(lines) + "\n"


def run(path: str, out: str | Path = "levilab-out", seed: int | None = None,
        threads: int | None = None) -> int:
    """Run a scenario file (or bundled scenario name) and write the reports."""
    try:
        scenario = read_scenario(resolve_scenario(path))
    except ScenarioError as exc:
        print(f"levilab: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if threads is None:
        threads = scenario.threads if scenario.threads is not None else default_threads()
    report, code = scenario.run(seed=seed, threads=threads, out_dir=out)
    (out / "report.json").write_text(dumps(report))
    text = report_text(report)
    (out / "report.txt").write_text(text)
    sys.stdout.write(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levilab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("run", help="run a scenario file or a bundled scenario by name")
    rp.add_argument("path")
    rp.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: scenario value, else all cores)")
    rp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    rp.add_argument("--out", default="levilab-out", help="output directory")
    sub.add_parser("list", help="list library examples and bundled scenarios")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(list_examples())
        return EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("levilab: --threads must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    return run(args.path, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
