# src/cli.py

import argparse
import logging
import secrets
from typing import Any, Dict, List, Optional, Sequence

from src import config
from src.handlers.common import run_command
from src.handlers.utils import FORMATS, print_error
from src.middlewares.run_manifest import RANDOMIZED_COMMANDS, RunManifestMiddleware, load_manifest
from src.modules.limits.service import STRATEGIES
from src.modules.montecarlo.service import STATISTICS

logger = logging.getLogger(__name__)


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got '{text}'")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def float_grid(text: str) -> List[float]:
    """`0.5`, `0.5,1,2` or `start:stop:step`."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int((stop - start) / step + 1e-9) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number list or start:stop:step, got '{text}'")


def int_list(text: str) -> List[int]:
    return [positive_int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--out", default=None, help="output file; stdout when omitted")
    common.add_argument("--workers", type=positive_int, default=config.WORKERS)
    common.add_argument("--seed", type=non_negative_int, default=None,
                        help="falls back to SPARSELIMIT_SEED, otherwise a seed is generated and recorded")

    parser = argparse.ArgumentParser(prog="sparselimit",
                                     description="Sparse random relational structures and their FO limit laws")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw one structure of the sparse random model")
    p.add_argument("--vocab", required=True)
    p.add_argument("--n", type=positive_int, required=True)
    density = p.add_mutually_exclusive_group(required=True)
    density.add_argument("--beta", help="'1.5' or 'E=1.5,F=2'; p = β/n^(a-1)")
    density.add_argument("--p", help="explicit edge probability per relation")
    p.add_argument("--index", type=non_negative_int, default=0, help="sample index within the seeded run")

    p = sub.add_parser("check", parents=[common], help="evaluate sentences on a structure file")
    p.add_argument("--vocab", default=None)
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", action="append", required=True)
    p.add_argument("--compare", default=None, help="second structure for an EF game")
    p.add_argument("--rounds", type=non_negative_int, default=None)

    p = sub.add_parser("tree-types", parents=[common], help="enumerate (k, r) tree types")
    p.add_argument("--vocab", required=True)
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--r", type=non_negative_int, required=True)
    p.add_argument("--cap", type=positive_int, default=None)
    p.add_argument("--beta", default=None, help="add limiting probabilities at this density")

    p = sub.add_parser("limit", parents=[common], help="symbolic limit probability of a sentence")
    p.add_argument("--vocab", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--override-r", type=non_negative_int, default=None)
    p.add_argument("--cycle-edge-cap", type=positive_int, default=None)
    p.add_argument("--beta-grid", default="1", help="a:b:step, or E=a:b:step,F=c")
    p.add_argument("--strategy", choices=STRATEGIES, default="grouped")
    p.add_argument("--per-class", action="store_true")
    p.add_argument("--no-verify", action="store_true", help="skip the richness check of planted classes")

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo validation of a statistic")
    p.add_argument("--vocab", required=True)
    p.add_argument("--stat", choices=STATISTICS, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--n", type=int_list, required=True, help="one n, or a comma list for simple-fraction")
    p.add_argument("--samples", type=positive_int, required=True)
    p.add_argument("--k", type=positive_int, default=1)
    p.add_argument("--r", type=non_negative_int, default=1)
    p.add_argument("--formula", default=None)
    p.add_argument("--override-r", type=non_negative_int, default=None)
    p.add_argument("--cycle-edge-cap", type=positive_int, default=None)

    for name, help_text in (("sat-scan", "empirical Pr(sat) of F(l, n, β)"),
                            ("cert-scan", "empirical Pr(F(l, n, β) ⊨ φ)")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--l", type=positive_int, default=3)
        p.add_argument("--beta", type=float_grid, required=True)
        p.add_argument("--n", type=int_list, required=True)
        p.add_argument("--samples", type=positive_int, required=True)
        p.add_argument("--max-decisions", type=positive_int, default=None)
        if name == "cert-scan":
            p.add_argument("--formula", default=None, help="defaults to the built-in certificate")
            p.add_argument("--check-dpll", action="store_true")

    p = sub.add_parser("cnf", parents=[common], help="draw F(l, n, β) as DIMACS, or solve a DIMACS file")
    p.add_argument("--l", type=positive_int, default=3)
    p.add_argument("--beta", type=float_grid, default=[1.0])
    p.add_argument("--n", type=int_list, default=[100])
    p.add_argument("--solve", default=None)
    p.add_argument("--max-decisions", type=positive_int, default=None)

    p = sub.add_parser("validate-vocab", parents=[common], help="validate a preset or vocabulary file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--n", type=positive_int, default=10)
    p.add_argument("--export", default=None, help="write the vocabulary as JSON")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write to this file instead of the recorded output")
    return parser


def resolve_seed(args: argparse.Namespace) -> None:
    if args.command not in RANDOMIZED_COMMANDS or args.seed is not None:
        return
    if config.SPARSELIMIT_SEED is not None:
        args.seed = int(config.SPARSELIMIT_SEED)
        logger.info(f"Using SPARSELIMIT_SEED={args.seed}")
    else:
        args.seed = secrets.randbelow(2 ** 31)
        logger.warning(f"No --seed given; generated seed {args.seed} (recorded in the manifest)")


def replay_argv(manifest_file: str, out: Optional[str]) -> List[str]:
    manifest = load_manifest(manifest_file)
    argv = list(manifest.argv)
    if manifest.seed is not None:
        argv += ["--seed", str(manifest.seed)]
    if out:
        argv += ["--out", out]
    logger.info(f"Replaying '{manifest.subcommand}' from {manifest_file}")
    return argv


async def dispatch(argv: Sequence[str], data: Optional[Dict[str, Any]] = None,
                   middleware: Optional[RunManifestMiddleware] = None) -> int:
    """Exit code 0 on success, 1 on a domain error, 2 on a usage error."""
    data = dict(data or {})
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "replay":
        try:
            argv = replay_argv(args.manifest, args.out)
        except (OSError, ValueError) as e:
            print_error({"code": "UsageError", "message": f"Cannot read manifest: {e}"}, data.get("stderr"))
            return 2
        return await dispatch(argv, data, middleware)
    resolve_seed(args)
    data["argv"] = list(argv)
    middleware = middleware or RunManifestMiddleware()
    await middleware(run_command, args, data)
    return data["manifest"].exit_code if "manifest" in data else 1
