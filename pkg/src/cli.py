"""
Command-line entry point.

    vassclass analyze models/rw1.vass --format json
    vassclass mc-classify models/rw1.vass
    vassclass simulate models/rw1.vass --target length --n-list 32,64,128
    vassclass decompose models/expo1.vass
    vassclass mec models/disconnected.vass
    vassclass validate models/rw1.vass

Exit codes: 0 success, 1 input or configuration error, 2 precondition
failure, 3 cap reached or unresolved items, 4 internal consistency failure.
"""

import argparse
import logging
import os
import sys
from fractions import Fraction

from src import __version__
from src.classifier import classify_markov_chain, classify_observable, full_classification
from src.components import conical_decomposition, make_multicomponent
from src.constraints import maximal_solution_i
from src.errors import (
    ConfigError,
    DecompositionError,
    DichotomyError,
    ModelError,
    PreconditionError,
    SelectionLimitError,
    SimulationError,
    SingularSystemError,
)
from src.graph import mec_decomposition
from src.model import FORMAT_VERSION, load_model, parse_model, parse_observable, validate_model
from src.reporting import (
    decomposition_to_dict,
    estimate_to_dict,
    mec_to_dict,
    model_check_to_dict,
    render_json,
    render_text,
    report_to_dict,
    simulation_to_dict,
)
from src.settings import load_config
from src.simulator import estimate_fp, load_strategy


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_UNFINISHED = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_output(sub):
    sub.add_argument("--format", choices=("text", "json"), default=None, help="Report format.")
    sub.add_argument("--out", default=None, help="Write the report to this path instead of stdout.")


def build_parser():
    parser = _Parser(prog="vassclass", description="Asymptotic complexity analysis of VASS MDPs.")
    parser.add_argument(
        "--version",
        action="version",
        version=f"vassclass {__version__} (model format {FORMAT_VERSION})",
    )
    parser.add_argument("--config", default=None, help="Path to a config.yaml.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)

    analyze = commands.add_parser("analyze", help="Classify a strongly connected VASS MDP.")
    analyze.add_argument("file")
    analyze.add_argument("--max-k", type=int, default=None, help="Largest degree examined.")
    analyze.add_argument("--zb-mode", choices=("literal", "bounded"), default=None)
    analyze.add_argument("--target", default=None, help="Only this observable: length, counter:<c>, transition:<t>.")
    _add_output(analyze)

    mc = commands.add_parser("mc-classify", help="Three-way classification of a VASS Markov chain.")
    mc.add_argument("file")
    _add_output(mc)

    simulate = commands.add_parser("simulate", help="Estimate fixed-probability bounds by simulation.")
    simulate.add_argument("file")
    simulate.add_argument("--target", default="length")
    simulate.add_argument("--p", type=float, default=None)
    simulate.add_argument("--n-list", type=_int_list, default=None)
    simulate.add_argument("--trials", type=int, default=None)
    simulate.add_argument("--max-steps", type=int, default=None)
    simulate.add_argument("--strategy", default="uniform", help="uniform, cmd:<file> or phased:<file>.")
    simulate.add_argument("--start", default=None, help="Start state (default: the first declared state).")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--workers", type=int, default=None)
    _add_output(simulate)

    decompose = commands.add_parser("decompose", help="Conical decomposition of a multi-component.")
    decompose.add_argument("file")
    decompose.add_argument("--flow", default=None, help="File of tid=value pairs (default: maximal system (I) solution).")
    _add_output(decompose)

    mec = commands.add_parser("mec", help="Maximal end component decomposition.")
    mec.add_argument("file")
    _add_output(mec)

    validate = commands.add_parser("validate", help="Parse and check model invariants.")
    validate.add_argument("file")
    _add_output(validate)
    return parser


def _emit(data, args, config):
    fmt = args.format or config["output"]["format"]
    text = render_json(data) if fmt == "json" else render_text(data)
    if args.out:
        folder = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(folder, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _read_flow(m, path):
    """Read ``tid=value`` pairs (one per line or comma-separated, ``#`` comments)."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    values = {}
    for line_no, raw in enumerate(lines, start=1):
        for part in raw.split("#", 1)[0].split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise ModelError(f"expected transition=value, got {part.strip()!r}", line=line_no)
            tid, value = (piece.strip() for piece in part.split("=", 1))
            if tid not in m.transition_index:
                raise ModelError(f"unknown transition {tid!r}", line=line_no)
            if tid in values:
                raise ModelError(f"duplicate flow value for {tid!r}", line=line_no)
            try:
                values[tid] = Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ModelError(f"bad flow value {value!r} for {tid!r}", line=line_no) from None
    try:
        return make_multicomponent(m, [values.get(tid, 0) for tid in m.transition_ids])
    except ValueError as exc:
        raise ModelError(str(exc)) from exc


def _analyze(args, config):
    m = load_model(args.file)
    analysis = config["analysis"]
    cap = args.max_k if args.max_k is not None else analysis["max_k"]
    zb_mode = args.zb_mode or analysis["zb_mode"]
    if args.target:
        observable = parse_observable(args.target, m)
        est = classify_observable(m, observable, cap, zb_mode, analysis["selection_cap"])
        _emit(estimate_to_dict(observable, est), args, config)
        return EXIT_UNFINISHED if est.kind.value in ("cap-reached", "unresolved") else EXIT_OK
    report = full_classification(m, cap, True, zb_mode, analysis["selection_cap"])
    _emit(report_to_dict(report), args, config)
    return report.exit_status


def _mc_classify(args, config):
    verdict = classify_markov_chain(load_model(args.file))
    _emit(report_to_dict(verdict), args, config)
    return verdict.exit_status


def _simulate(args, config):
    m = load_model(args.file)
    sim = config["simulation"]
    fp = estimate_fp(
        m,
        load_strategy(m, args.strategy),
        parse_observable(args.target, m),
        args.p if args.p is not None else sim["p"],
        args.n_list or sim["n_list"],
        args.trials if args.trials is not None else sim["trials"],
        args.max_steps if args.max_steps is not None else sim["max_steps"],
        seed=args.seed if args.seed is not None else sim["seed"],
        workers=args.workers if args.workers is not None else sim["workers"],
        start=args.start,
    )
    _emit(simulation_to_dict(fp), args, config)
    return EXIT_OK


def _decompose(args, config):
    m = load_model(args.file)
    if args.flow:
        x = _read_flow(m, args.flow)
    else:
        x = make_multicomponent(m, maximal_solution_i(m).x)
    terms = conical_decomposition(x, cap=config["analysis"]["selection_cap"])
    _emit(decomposition_to_dict(x, terms), args, config)
    return EXIT_OK


def _mec(args, config):
    m = load_model(args.file)
    _emit(mec_to_dict(m, mec_decomposition(m)), args, config)
    return EXIT_OK


def _validate(args, config):
    with open(args.file, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        m = parse_model(text)
    except ModelError as exc:
        violations = exc.violations or [{"code": "parse", "message": exc.detail, "line": exc.line}]
        result = {"violations": violations, "summary": f"{len(violations)} violation(s)"}
        _emit(model_check_to_dict(result, args.file), args, config)
        return EXIT_INPUT
    result = validate_model(m)
    _emit(model_check_to_dict(result, args.file), args, config)
    return EXIT_INPUT if result["violations"] else EXIT_OK


COMMANDS = {
    "analyze": _analyze,
    "mc-classify": _mc_classify,
    "simulate": _simulate,
    "decompose": _decompose,
    "mec": _mec,
    "validate": _validate,
}


def dispatch(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    level = logging.DEBUG if args.verbose else getattr(logging, str(config["logging"]["level"]).upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        return COMMANDS[args.command](args, config)
    except (ModelError, ConfigError, SimulationError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PreconditionError, SelectionLimitError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (DecompositionError, DichotomyError, SingularSystemError) as exc:
        logger.debug("internal consistency failure", exc_info=True)
        print(f"Error: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(dispatch())
