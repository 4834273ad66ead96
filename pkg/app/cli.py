"""Command-line entry point.

Reports go to stdout as JSON, logs go to stderr. Exit codes: 0 when every audit passes,
1 when an audit fails, 2 for usage errors, bad fixtures and toolkit errors.
"""
import argparse
import logging
import sys
from fractions import Fraction
from typing import List, Optional

from pydantic import ValidationError

from . import audit
from .clopen import Region
from .config import settings
from .dugundji import drive, dugundji_Q, verify_dugundji
from .errors import PreconditionViolation, ToolkitError
from .fixtures import WHOLE, load_fixture
from .hyperspaces import ClosedName, FullClosedName, OpenName, full_to_negative
from .padic import RealValue, evaluate_expression
from .schemas import (
    AuditReport,
    BallSpec,
    PadicEvalResult,
    PieceDump,
    ReductionReport,
    RetractResult,
    SystemDump,
)
from .spaces import label_to_name, parse_rational, space_from_string, valuation
from .zerodim import dugundji_clopen, retraction_Ep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_USAGE = 2


def _emit(model, out: Optional[str] = None) -> None:
    text = model.model_dump_json(indent=2)
    if out:
        with open(out, "w") as handle:
            handle.write(text + "\n")
        logger.info("wrote %s", out)
    else:
        print(text)


def _status(report: AuditReport) -> int:
    return EXIT_OK if report.passed else EXIT_AUDIT_FAILED


def _ambient(A: FullClosedName) -> ClosedName:
    if A.oracle is not None:
        return ClosedName.from_region(A.oracle)
    if A.is_whole():
        return ClosedName.whole(A.space)
    return full_to_negative(A)


# dugundji
def cmd_dugundji(args) -> int:
    space = space_from_string(args.space)
    A = load_fixture(args.fixture, space)
    if args.clopen:
        D = dugundji_clopen(A)
        eps = Fraction(1)
    else:
        eps = parse_rational(args.eps)
        D = dugundji_Q(eps, A)
    checks = verify_dugundji(D, A, args.depth, settings.audit_stage_limit)
    report = AuditReport(command="dugundji", seed=args.seed, space=space.name).add(checks)

    pieces_found, _ = drive(D, Region.whole(space).minus(A.oracle), settings.audit_stage_limit)
    grouped = {}
    for index, cell in pieces_found:
        grouped.setdefault(index, []).append(cell)
    radius_of = space.radius
    pieces = [
        PieceDump(
            index=index,
            balls=[BallSpec(center=space.format_label(c.rep), radius=str(radius_of(c.depth))) for c in sorted(cells)],
            anchor=space.format_label(D.anchor(index).label(args.depth)),
        )
        for index, cells in sorted(grouped.items())
    ]
    dump = SystemDump(
        space=space.name,
        eps=str(eps),
        coefficient=str(D.coefficient),
        depth=args.depth,
        pieces=pieces,
        report=report,
    )
    _emit(dump, args.out)
    return _status(report)


# retract
def cmd_retract(args) -> int:
    space = space_from_string(args.space)
    A = load_fixture(args.A, space)
    B = load_fixture(args.B, space)
    if isinstance(A, OpenName) or isinstance(B, OpenName):
        raise PreconditionViolation("closed fixtures", "retract needs closed sets A and B")
    point = space.parse_center(args.point)
    if A.oracle is not None and not A.oracle.contains_point(point):
        raise PreconditionViolation("x ∈ A", f"{args.point} lies outside A")
    ambient = _ambient(A)
    f = retraction_Ep(ambient, B)
    value = f.evaluate(label_to_name(space, point)).label(args.prec)
    checks = audit.retraction_checks(ambient, B, f, args.prec, args.prec, samples=args.samples)
    report = AuditReport(command="retract", seed=args.seed, space=space.name).add(checks)
    result = RetractResult(
        space=space.name,
        point=args.point,
        precision=args.prec,
        value=space.format_label(value),
        report=report,
    )
    _emit(result)
    return _status(report)


# padic
def _describe(value, p: int, precision: int, text: str) -> PadicEvalResult:
    if isinstance(value, RealValue):
        approximants = [str(value.name.approx(i)) for i in range(precision)]
        exact = value.exact
        shown = exact if exact is not None else value.name.approx(precision)
        return PadicEvalResult(
            expression=text, p=p, precision=precision, value=str(shown),
            exact=None if exact is None else str(exact), approximants=approximants,
        )
    approximants = [str(a) for a in value.approximants(precision + 1)]
    exact = value.exact
    return PadicEvalResult(
        expression=text,
        p=p,
        precision=precision,
        value=str(exact if exact is not None else value.approx(precision)),
        exact=None if exact is None else str(exact),
        valuation=None if exact is None else valuation(exact, p),
        approximants=approximants,
    )


def cmd_padic(args) -> int:
    space_from_string(f"qp:{args.p}")
    value = evaluate_expression(args.expression, args.p)
    result = _describe(value, args.p, args.prec, args.expression)
    if args.json:
        _emit(result)
    else:
        print(result.value)
    return EXIT_OK


# reduce
def cmd_reduce(args) -> int:
    space = space_from_string(args.space)
    witness, _, source = audit.reduction_setup(args.which, space)
    if args.fixture:
        instance = tuple(_ambient(load_fixture(path, space)) for path in args.fixture)
        if len(instance) != 3:
            raise PreconditionViolation("instance", "--fixture takes A, B and Y")
        instances, names = [instance], list(args.fixture)
    else:
        instances = audit.sample_instances(space, source)
        names = [f"sample-{i}" for i in range(len(instances))]
    checks = audit.reduction_checks(args.which, space, instances)
    report = AuditReport(command=f"reduce {args.which}", seed=args.seed, space=space.name).add(checks)
    _emit(ReductionReport(which=args.which, strong=witness.strong, fixtures=names, report=report))
    return _status(report)


# verify
def cmd_verify(args) -> int:
    report = audit.run_suite(args.suite, args.seed, args.trials, args.p)
    _emit(report)
    return _status(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultraretract", description="Computable retractions on ultrametric spaces")
    parser.add_argument("--log-level", default=None, help="override LOG_LEVEL")
    parser.add_argument("--seed", type=int, default=settings.seed, help="seed recorded in every report")
    commands = parser.add_subparsers(dest="command", required=True)

    dug = commands.add_parser("dugundji", help="build and audit a Dugundji system")
    dug.add_argument("--space", required=True)
    dug.add_argument("--eps", default="1")
    dug.add_argument("--fixture", required=True, help="closed fixture JSON for A")
    dug.add_argument("--depth", type=int, default=3)
    dug.add_argument("--clopen", action="store_true", help="use the disjoint clopen construction")
    dug.add_argument("--out", default=None)
    dug.set_defaults(handler=cmd_dugundji)

    ret = commands.add_parser("retract", help="approximate f(x) for the retraction of A onto B")
    ret.add_argument("--space", required=True)
    ret.add_argument("--A", default=WHOLE)
    ret.add_argument("--B", required=True)
    ret.add_argument("--point", required=True)
    ret.add_argument("--prec", type=int, default=3)
    ret.add_argument("--samples", type=int, default=16)
    ret.set_defaults(handler=cmd_retract)

    pad = commands.add_parser("padic", help="evaluate an expression in Q_p")
    pad.add_argument("--p", type=int, required=True)
    pad.add_argument("--prec", type=int, default=8)
    pad.add_argument("--json", action="store_true")
    pad.add_argument("action", choices=["eval"])
    pad.add_argument("expression")
    pad.set_defaults(handler=cmd_padic)

    red = commands.add_parser("reduce", help="run a reduction witness and audit its output")
    red.add_argument("--which", required=True, choices=["n-to-n0", "n0-to-n", "n0-to-s"])
    red.add_argument("--space", default="cantor")
    red.add_argument("--fixture", nargs="*", default=None, help="closed fixtures A B Y")
    red.set_defaults(handler=cmd_reduce)

    ver = commands.add_parser("verify", help="run a named audit suite")
    ver.add_argument("--suite", required=True, choices=list(audit.SUITES) + ["all"])
    ver.add_argument("--p", type=int, default=None, help="one prime instead of the default set")
    ver.add_argument("--trials", type=int, default=None)
    ver.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    settings.configure_logging(args.log_level)
    try:
        return args.handler(args)
    except ValidationError as exc:
        logger.error("invalid input: %s", exc.errors()[0]["msg"] if exc.errors() else exc)
        print(f"error: invalid input ({exc.error_count()} problems)", file=sys.stderr)
        return EXIT_USAGE
    except ToolkitError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
