"""
Command line interface.

    python -m jetlie solve samples/scalar_ode3.jlie --degree 3
    python -m jetlie verify-closed-forms --kappa 4
    python -m jetlie --format json manifold analyze samples/degenerate_plane.jlie

Exit codes: 0 success, 1 a check failed, 2 input or resource error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from colorama import Fore, Style, just_fix_windows_console

from .closed_forms import FORMULAS, MODES
from .config import Config, setup_logging
from .dsl import COMMANDS, JobSpec, parse_input
from .errors import JetlieError
from .runner import JobResult, input_digest, run
from .solve import SHAPES
from .symfields import FAMILIES

logger = logging.getLogger(__name__)


def _add_space(parser: argparse.ArgumentParser, kappa: bool = True) -> None:
    parser.add_argument("--n", type=int, default=1, help="number of independent variables")
    parser.add_argument("--m", type=int, default=1, help="number of dependent variables")
    if kappa:
        parser.add_argument("--kappa", type=int, help="system order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jetlie", description="Exact Lie point symmetries of completely integrable systems"
    )
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--no-log-file", action="store_true", help="log to the console only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prolong", help="prolongation coefficients of a vector field")
    _add_space(p)
    p.add_argument("--Q", action="append", help="x-coefficients, one per variable, in order")
    p.add_argument("--R", action="append", help="u-coefficients, one per variable, in order")

    p = sub.add_parser("determine", help="determining equations of a system")
    p.add_argument("input", type=Path)

    p = sub.add_parser("solve", help="polynomial symmetry algebra of a system")
    p.add_argument("input", type=Path)
    p.add_argument("--degree", type=int, help="ansatz degree (default: the system order)")
    p.add_argument("--shape", choices=SHAPES, help="compare with a tabulated solution shape")

    p = sub.add_parser("verify-closed-forms", help="compare prolongation with closed forms")
    _add_space(p)
    p.add_argument("--formula", choices=FORMULAS)
    p.add_argument("--mode", choices=MODES, default="corrected")
    p.add_argument("--exhaustive", action="store_true", help="all ordered index tuples")

    p = sub.add_parser("closure", help="bracket closure of a generator family")
    p.add_argument("--family", choices=FAMILIES, default="projective")
    _add_space(p)

    p = sub.add_parser("finite-check", help="finite transformations of a generator family")
    p.add_argument("--family", choices=FAMILIES, default="weighted")
    _add_space(p)

    p = sub.add_parser("manifold", help="submanifold-of-solutions calculus")
    msub = p.add_subparsers(dest="action", required=True)
    a = msub.add_parser("analyze", help="duality, solvability, degeneracy and covering")
    a.add_argument("input", type=Path)
    a.add_argument("--kmax", type=int, help="longest chain to try (default 2(m+2))")
    a.add_argument("--degree", type=int, help="degree of the degeneracy search")
    a.add_argument("--mu0", type=int, help="covering type, for the jet bound")

    p = sub.add_parser("bound", help="dimension bounds")
    p.add_argument("--theorem1", action="store_true", help="symmetry algebra of E0")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--kappa", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--l0", type=int)
    p.add_argument("--l0star", type=int)
    p.add_argument("--mu0", type=int)

    p = sub.add_parser("run", help="run the job block of an input file")
    p.add_argument("input", type=Path)

    p = sub.add_parser("batch", help="run every *.jlie file of a directory")
    p.add_argument("directory", nargs="?", type=Path, default=Config.SAMPLES_DIR)
    return parser


def _options(args: argparse.Namespace, keys: List[str]) -> Dict[str, Any]:
    options = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None or value is False:
            continue
        options[key] = int(value) if value is True else value
    return options


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise JetlieError(f"cannot read {path}: {exc}") from exc


def job_from_args(args: argparse.Namespace) -> tuple:
    """(JobSpec, digest) for every command except batch"""
    command = args.command
    if command in ("determine", "solve", "run") or command == "manifold":
        text = _read(args.input)
        parsed = parse_input(text)
        if command == "run":
            return parsed, input_digest(text)
        name = "manifold-analyze" if command == "manifold" else command
        keys = {"solve": ["degree", "shape"], "manifold-analyze": ["kmax", "degree", "mu0"]}
        options = dict(parsed.options) if parsed.command == name else {}
        options.update(_options(args, keys.get(name, [])))
        job = JobSpec(name, parsed.system, parsed.manifold, options)
        return job, input_digest(text)
    if command == "prolong":
        options = _options(args, ["n", "m", "kappa"])
        if args.Q:
            options["q"] = ",".join("".join(q.split()) for q in args.Q)
        if args.R:
            options["r"] = ",".join("".join(r.split()) for r in args.R)
        return JobSpec(command, options=options), None
    keys = {
        "verify-closed-forms": ["n", "m", "kappa", "formula", "mode", "exhaustive"],
        "closure": ["family", "n", "m", "kappa"],
        "finite-check": ["family", "n", "m", "kappa"],
        "bound": ["n", "m", "p", "l0", "l0star", "mu0", "kappa", "theorem1"],
    }
    if command not in COMMANDS:
        raise JetlieError(f"unknown command {command!r}")
    return JobSpec(command, options=_options(args, keys[command])), None


def _status_word(ok: bool) -> str:
    word = "PASS" if ok else "FAIL"
    if not sys.stdout.isatty():
        return word
    color = Fore.GREEN if ok else Fore.RED
    return f"{color}{word}{Style.RESET_ALL}"


def render_text(result: JobResult) -> str:
    lines = [f"jetlie {result.command}: {_status_word(result.ok)}"]
    lines += result.lines
    return "\n".join(lines)


def render_json(result: JobResult) -> str:
    return json.dumps(result.document, indent=2, ensure_ascii=False, sort_keys=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    just_fix_windows_console()
    setup_logging(verbose=args.verbose, log_to_file=not args.no_log_file)

    try:
        if args.command == "batch":
            from .batch import run_batch

            return run_batch(args.directory)
        job, digest = job_from_args(args)
        result = run(job, digest)
    except JetlieError as exc:
        logger.error(f"❌ {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return 2

    print(render_json(result) if args.format == "json" else render_text(result))
    return result.exit_code
