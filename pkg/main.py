#!/usr/bin/env python3
"""
nominal_ua - Nominal algebra through uniform theories

Command-line front end for the uniform-theory toolchain: theory files are
parsed and checked for uniformity, uniform equations are compiled into
many-sorted (UA) equations, finite models are checked against theories,
abstracted (delta A), and the lambda-calculus demo is run end to end.

Subcommands:
- check-signature: uniformity report for a theory's signature
- translate: UA equations generated from one uniform equation
- gen-eop: the equivariance equations E_Op of a signature
- check-model: presheaf, E_Op and theory satisfaction report for a model
- abstract-model: write delta A, optionally comparing it with translations
- lambda-demo: alpha-class counts and the eta pipeline

Exit codes:
- 0: everything checked holds
- 1: a validation failure (report on stdout)
- 2: parse or usage error
- 3: invariant breach or internal error
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from config import Config
from errors import InvariantBreach, NominalUAError, ScopeError, SignatureError, TheoryParseError
from lambda_demo import build_lambda_model, demo_report, format_demo_report
from model import (SatisfactionResult, abstract_algebra, check_abstraction_equivalence,
                   check_equivariance, load_algebra, satisfies_all, satisfies_implication, save_algebra)
from names import NameSet, canonical_names, format_name_set, parse_name_set, subsets
from presheaf import validate_presheaf
from theory import UniformEquation, UniformSignature, check_uniform_signature
from theory_parser import Theory, format_equation, load_theory
from translation import (frontend_nominal_judgment, gen_equivariance_equations, translate_by_set,
                         translate_family, translate_implication)

# Module logger
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    """Bad flag values detected after argument parsing"""


# Records carry their own [VALIDATE] / [TRANSLATE] / ... tag in the message
FILE_LOG_FORMAT = '%(asctime)s %(levelname)-7s %(module)-14s %(message)s'
CONSOLE_LOG_FORMAT = 'nominal_ua %(levelname)s: %(message)s'


def setup_logging(log_file: Optional[str] = None, console_level: str = "WARNING"):
    """
    Send every record to the log file and warnings (or console_level) to stderr

    Args:
        log_file: Path to log file (default: ~/.nominal_ua/nominal_ua.log)
        console_level: Minimum level shown on stderr (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        The log file path
    """
    if log_file is None:
        log_file_path = Path(os.path.expanduser("~/.nominal_ua")) / "nominal_ua.log"
    else:
        log_file_path = Path(log_file)
    log_file_path.parent.mkdir(parents=True, exist_ok=True)

    console_level_int = getattr(logging, console_level.upper(), logging.WARNING)

    # Replace handlers installed by an earlier call
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in list(root_logger.handlers):
        if getattr(handler, "_nominal_ua", False):
            root_logger.removeHandler(handler)
            handler.close()

    file_handler = logging.FileHandler(log_file_path)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(FILE_LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    file_handler._nominal_ua = True
    root_logger.addHandler(file_handler)

    # stderr, so reports on stdout stay clean
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(console_level_int)
    console_handler.setFormatter(logging.Formatter(CONSOLE_LOG_FORMAT))
    console_handler._nominal_ua = True
    root_logger.addHandler(console_handler)

    logger.info(f"[SESSION]  Log file {log_file_path}, console level {logging.getLevelName(console_level_int)}")

    return str(log_file_path)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def emit(data: Dict[str, Any], text: str, fmt: str) -> None:
    """Print a report on stdout as text or JSON"""
    if fmt == "structured":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text)


def parse_names(text: str) -> NameSet:
    """b,c or {b,c}"""
    text = text.strip()
    if not text.startswith("{"):
        text = "{" + text + "}"
    try:
        return parse_name_set(text)
    except ValueError as e:
        raise UsageError(f"Bad name list {text!r}: {e}") from e


def universe_from(count: Optional[int], config: Dict[str, Any], default: Optional[NameSet] = None) -> NameSet:
    """The first `count` names, bounded by max_universe_size"""
    if count is None:
        if default is not None:
            return default
        count = config["universe_size"]
    if count < 0 or count > config["max_universe_size"]:
        raise UsageError(f"Universe size {count} outside 0..{config['max_universe_size']}")
    return frozenset(canonical_names(count))


def find_equation(theory: Theory, sig: UniformSignature, eq_id: str):
    """Equation, elaborated judgment or implication with the given id"""
    for eq in theory.equations:
        if eq.id == eq_id:
            return eq
    for judgment in theory.judgments:
        if judgment.id == eq_id:
            return frontend_nominal_judgment(sig, judgment)
    for imp in theory.implications:
        if imp.id == eq_id:
            return imp
    raise UsageError(f"No equation, judgment or implication named {eq_id} in {theory.source}")


def uniform_equations(theory: Theory, sig: UniformSignature) -> List[UniformEquation]:
    """Theory equations followed by the elaborated judgments"""
    return list(theory.equations) + [frontend_nominal_judgment(sig, j) for j in theory.judgments]


def implication_translations(sig: UniformSignature, imp) -> list:
    result = []
    for names in subsets(sig.universe - imp.sort):
        try:
            result.append(translate_implication(sig, imp, names))
        except SignatureError as e:
            logger.debug(f"[TRANSLATE]  {imp.id} by {format_name_set(names)} leaves the universe: {e}")
    return result


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check_signature(args, config: Dict[str, Any]) -> int:
    theory = load_theory(Path(args.file))
    report = check_uniform_signature(theory.signature, config["use_threads"], config["max_workers"])
    data = {"theory": theory.source, "universe": format_name_set(theory.universe), **report.to_dict()}
    emit(data, report.format_text(), args.format)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_translate(args, config: Dict[str, Any]) -> int:
    theory = load_theory(Path(args.file))
    sig = theory.signature
    target = find_equation(theory, sig, args.eq)

    if isinstance(target, UniformEquation):
        if args.names is None:
            translated = translate_family(sig, target)
        else:
            translated = [translate_by_set(sig, target, parse_names(args.names))]
        lines = [format_equation(eq) for eq in translated]
        data = {"source": target.id, "equations": [{"id": eq.id, "equation": format_equation(eq)}
                                                    for eq in translated]}
    else:
        if args.names is None:
            translated = implication_translations(sig, target)
        else:
            translated = [translate_implication(sig, target, parse_names(args.names))]
        lines, entries = [], []
        for imp in translated:
            premises = [format_equation(p) for p in imp.premises]
            lines.append(f"// {imp.id}")
            lines.extend(f"// if {p}" for p in premises)
            lines.append(format_equation(imp.conclusion))
            entries.append({"id": imp.id, "premises": premises, "conclusion": format_equation(imp.conclusion)})
        data = {"source": target.id, "implications": entries}

    emit(data, "\n".join(lines), args.format)
    return EXIT_OK


def cmd_gen_eop(args, config: Dict[str, Any]) -> int:
    theory = load_theory(Path(args.file))
    universe = universe_from(args.universe, config, default=theory.universe)
    sig = theory.signature_at(universe)
    equations = gen_equivariance_equations(sig)
    lines = [f"{format_equation(eq)}  // {eq.origin}" for eq in equations]
    data = {"universe": format_name_set(universe),
            "equations": [{"id": eq.id, "origin": eq.origin, "equation": format_equation(eq)} for eq in equations]}
    emit(data, "\n".join(lines), args.format)
    return EXIT_OK


def _results_block(title: str, results: Sequence[SatisfactionResult]) -> List[str]:
    failures = [r for r in results if not r.holds]
    lines = [f"{title}: {len(results)} equation(s), "
             + ("all hold" if not failures else f"{len(failures)} fail")]
    lines.extend(f"  {r.describe()}" for r in results)
    return lines


def cmd_check_model(args, config: Dict[str, Any]) -> int:
    theory = load_theory(Path(args.theory))
    model = load_algebra(Path(args.model), verify=False)
    model.use_threads, model.max_workers = config["use_threads"], config["max_workers"]
    universe = universe_from(args.universe, config, default=model.universe)
    if universe != model.universe:
        raise UsageError(f"Model universe {format_name_set(model.universe)} differs from "
                         f"{format_name_set(universe)}")
    sig = theory.signature_at(universe)
    if not sig.same_symbols(model.signature):
        data = {"model": model.label, "ok": False, "error": "signature mismatch"}
        emit(data, f"model {model.label}: signature differs from {theory.source}", args.format)
        return EXIT_VALIDATION

    validation = validate_presheaf(model.carrier, config["use_threads"], config["max_workers"])
    eop = check_equivariance(model)
    results: List[SatisfactionResult] = []
    for eq in uniform_equations(theory, sig):
        if not eq.sort <= universe:
            logger.warning(f"Skipping {eq.id}: sort {format_name_set(eq.sort)} outside the universe")
            continue
        results.extend(satisfies_all(model, translate_family(sig, eq)))
    for imp in theory.implications:
        if imp.sort <= universe:
            results.extend(satisfies_implication(model, ua) for ua in implication_translations(sig, imp))

    ok = validation.ok and all(r.holds for r in eop) and all(r.holds for r in results)
    lines = [f"model {model.label} (universe {format_name_set(universe)})", validation.format_text()]
    lines.extend(_results_block("equivariance", eop))
    lines.extend(_results_block("theory", results))
    lines.append(f"result: {'OK' if ok else 'FAIL'}")
    data = {
        "model": model.label,
        "universe": format_name_set(universe),
        "presheaf": validation.to_dict(),
        "equivariance": [r.to_dict() for r in eop],
        "theory": [r.to_dict() for r in results],
        "ok": ok,
    }
    emit(data, "\n".join(lines), args.format)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_abstract_model(args, config: Dict[str, Any]) -> int:
    model = load_algebra(Path(args.model))
    model.use_threads, model.max_workers = config["use_threads"], config["max_workers"]
    abstraction = abstract_algebra(model)
    save_algebra(abstraction, Path(args.output))
    lines = [f"{abstraction.label}: universe {format_name_set(abstraction.universe)}, "
             f"{abstraction.carrier.total_size()} element(s) -> {args.output}"]
    checks = []
    if args.theory:
        theory = load_theory(Path(args.theory))
        for eq in uniform_equations(theory, model.signature):
            try:
                check = check_abstraction_equivalence(model, eq, abstraction)
            except ScopeError as e:
                lines.append(f"  {eq.id}: skipped ({e})")
                continue
            checks.append(check)
            lines.append(f"  {check.describe()}")
    data = {
        "abstraction": abstraction.label,
        "universe": format_name_set(abstraction.universe),
        "elements": abstraction.carrier.total_size(),
        "output": str(args.output),
        "checks": [c.to_dict() for c in checks],
    }
    emit(data, "\n".join(lines), args.format)
    return EXIT_OK


def cmd_lambda_demo(args, config: Dict[str, Any]) -> int:
    universe = universe_from(args.universe, config)
    depth = config["lambda_depth"] if args.depth is None else args.depth
    if depth < 0:
        raise UsageError(f"Depth must be non-negative, got {depth}")
    report = demo_report(universe, depth)
    if args.write_model:
        algebra = build_lambda_model(universe, depth, eta=args.eta)
        save_algebra(algebra, Path(args.write_model))
    emit(report, format_demo_report(report), args.format)
    ok = (all(row["quotient"] for row in report["eta"]) and report["validator"]["plain"]
          and report["validator"]["eta"])
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "check-signature": cmd_check_signature,
    "translate": cmd_translate,
    "gen-eop": cmd_gen_eop,
    "check-model": cmd_check_model,
    "abstract-model": cmd_abstract_model,
    "lambda-demo": cmd_lambda_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nominal_ua",
        description="nominal_ua - Uniform theories, their UA translations and finite models",
        epilog="""
Examples:
  %(prog)s check-signature theories/non_uniform.theory
  %(prog)s translate theories/eta.theory --eq eta --names b
  %(prog)s gen-eop theories/lambda.theory --universe 2
  %(prog)s lambda-demo --universe 3 --depth 3 --write-model lambda.json
  %(prog)s check-model theories/eta.theory lambda.json

Configuration is read from: ~/.nominal_ua/config.json
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--log-file",
                        help="Path to log file (default: ~/.nominal_ua/nominal_ua.log)")
    parser.add_argument("--console-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Minimum log level for console output (default: WARNING)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "structured"],
                        help="Report format (overrides config)")
    common.add_argument("--no-threads", action="store_true",
                        help="Run checks sequentially (overrides config)")

    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("check-signature", parents=[common], help="Check a signature for uniformity")
    p.add_argument("file", help="Theory file")

    p = sub.add_parser("translate", parents=[common], help="Print the UA translations of an equation")
    p.add_argument("file", help="Theory file")
    p.add_argument("--eq", required=True, help="Equation, judgment or implication id")
    p.add_argument("--names", help="Names to translate by, e.g. b,c (default: every admissible set)")

    p = sub.add_parser("gen-eop", parents=[common], help="Print the equivariance equations")
    p.add_argument("file", help="Theory file")
    p.add_argument("--universe", type=int, help="Universe size (default: the theory's universe)")

    p = sub.add_parser("check-model", parents=[common], help="Check a model against a theory")
    p.add_argument("theory", help="Theory file")
    p.add_argument("model", help="Model file (JSON)")
    p.add_argument("--universe", type=int, help="Universe size (default: the model's universe)")

    p = sub.add_parser("abstract-model", parents=[common], help="Write the abstraction delta A of a model")
    p.add_argument("model", help="Model file (JSON)")
    p.add_argument("-o", "--output", required=True, help="Output model file")
    p.add_argument("--theory", help="Compare delta A with the translations of this theory's equations")

    p = sub.add_parser("lambda-demo", parents=[common], help="Run the lambda-calculus demo")
    p.add_argument("--universe", type=int, help="Universe size (overrides config)")
    p.add_argument("--depth", type=int, help="Term depth bound (overrides config)")
    p.add_argument("--write-model", help="Write the lambda model to this file")
    p.add_argument("--eta", action="store_true", help="Write the eta-quotient instead of the plain model")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    # Set up logging
    setup_logging(log_file=args.log_file, console_level=args.console_level)

    # Load configuration, then apply command-line overrides
    config = Config.load()
    if args.format:
        config["report_format"] = args.format
    if args.no_threads:
        config["use_threads"] = False
    args.format = config["report_format"]

    try:
        return COMMANDS[args.command](args, config)
    except (TheoryParseError, UsageError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantBreach as e:
        logger.error(f"Invariant breach: {e}")
        print(f"invariant breach: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except NominalUAError as e:
        logger.error(str(e))
        print(f"validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.debug("Internal error", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
