"""
Command-line entry point for the multiloop / EALA engine.

Exit codes: 0 pass, 1 fail or not found, 2 error. Reports go to stdout,
logs to stderr.
"""

import argparse
import json
import sys
import time
from typing import Callable, List, Optional, Sequence, Tuple, Type

from app.api.commands import COMMANDS, run
from app.core.config import configure, get_settings
from app.core.exceptions import (
    AlgebraException,
    CertificateException,
    EalaException,
    FieldArithmeticException,
    GradingException,
    InputException,
    MultiloopError,
)
from app.core.logging import get_logger, setup_logging
from app.models.schemas import ErrorPayload
from app.services.formatters import render_text, report_json

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiloop",
        description="Multiloop Lie algebras, Lie tori, support-isomorphism certificates and EALAs.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="What to run")
    parser.add_argument("specs", nargs="+", help="Spec files (report-all also takes directories)")
    parser.add_argument("--certificate", default=None, help="Certificate file for iso-verify")
    parser.add_argument("--json", action="store_true", help="Canonical JSON report on stdout")
    parser.add_argument("--window", type=int, default=None, help="Z^n window radius")
    parser.add_argument("--gamma-window", type=int, default=None, help="Gamma window radius")
    parser.add_argument("--bound", type=int, default=None, help="Search bound for P and certificates")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every pseudorandom choice")
    parser.add_argument("--field-order", type=int, default=None, help="Session cyclotomic order")
    parser.add_argument("--probe", action="store_true", help="iso-verify: also compare the EALA frames")
    return parser


def _split_certificate(command: str, specs: Sequence[str], certificate: Optional[str]) -> Tuple[List[str], Optional[str]]:
    """iso-verify accepts the certificate as a third positional argument."""
    specs = list(specs)
    if command == "iso-verify" and certificate is None and len(specs) == 3:
        return specs[:2], specs[2]
    return specs, certificate


# ---------------------------------------------------------------------------
# Error handlers
# ---------------------------------------------------------------------------


def _emit_error(exc: MultiloopError) -> int:
    settings = get_settings()
    payload = ErrorPayload(
        error=type(exc).__name__,
        error_code=exc.error_code,
        message=exc.message,
        debug_info=exc.debug_info if settings.debug and exc.debug_info else None,
    )
    sys.stdout.write(json.dumps(payload.model_dump(exclude_none=True), indent=2, sort_keys=True, default=str) + "\n")
    return exc.exit_code


def handle_field_error(exc: FieldArithmeticException) -> int:
    logger.error(f"Field arithmetic error: {exc.error_code} (order {exc.debug_info.get('order', '?')})")
    return _emit_error(exc)


def handle_algebra_error(exc: AlgebraException) -> int:
    logger.error(f"Algebra error: {exc.error_code} - {exc.message}", extra={"witness": exc.debug_info.get("witness")})
    return _emit_error(exc)


def handle_grading_error(exc: GradingException) -> int:
    logger.error(f"Grading error: {exc.error_code} (component {exc.debug_info.get('component', '?')})")
    return _emit_error(exc)


def handle_certificate_error(exc: CertificateException) -> int:
    logger.error(f"Certificate error: {exc.error_code} at step {exc.debug_info.get('step', '?')}")
    return _emit_error(exc)


def handle_eala_error(exc: EalaException) -> int:
    logger.error(f"EALA error: {exc.error_code} (condition {exc.debug_info.get('condition', '?')})")
    return _emit_error(exc)


def handle_input_error(exc: InputException) -> int:
    logger.error(f"Input error: {exc.error_code} (field {exc.debug_info.get('field', '?')}) - {exc.message}")
    return _emit_error(exc)


def handle_engine_error(exc: MultiloopError) -> int:
    logger.error(f"Engine error: {exc.error_code} - {exc.message}")
    return _emit_error(exc)


EXCEPTION_HANDLERS: List[Tuple[Type[MultiloopError], Callable[..., int]]] = [
    (FieldArithmeticException, handle_field_error),
    (AlgebraException, handle_algebra_error),
    (GradingException, handle_grading_error),
    (CertificateException, handle_certificate_error),
    (EalaException, handle_eala_error),
    (InputException, handle_input_error),
    (MultiloopError, handle_engine_error),
]


def handle_exception(exc: MultiloopError) -> int:
    for category, handler in EXCEPTION_HANDLERS:
        if isinstance(exc, category):
            return handler(exc)
    return handle_engine_error(exc)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure(
        window_radius=args.window,
        gamma_window=args.gamma_window,
        search_bound=args.bound,
        certificate_bound=args.bound,
        seed=args.seed,
        field_order=args.field_order,
    )
    setup_logging()
    specs, certificate = _split_certificate(args.command, args.specs, args.certificate)
    flags = {"window": args.window, "gamma_window": args.gamma_window, "bound": args.bound, "seed": args.seed}
    start = time.time()
    try:
        report = run(args.command, specs, certificate, flags, probe=args.probe)
    except MultiloopError as exc:
        return handle_exception(exc)
    except Exception as exc:
        logger.error(f"Unhandled exception: {type(exc).__name__} - {exc}", exc_info=True)
        payload = ErrorPayload(error=type(exc).__name__, error_code="INTERNAL_001", message=str(exc))
        sys.stdout.write(json.dumps(payload.model_dump(exclude_none=True), indent=2, sort_keys=True) + "\n")
        return 2
    logger.info(f"{args.command} finished in {time.time() - start:.2f}s: {'pass' if report.passed else 'fail'}")
    sys.stdout.write(report_json(report) if args.json else render_text(report))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
