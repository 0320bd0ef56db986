"""
Custom exception classes for the multiloop / EALA engine.

Every error carries an error code, a prefixed message, the process exit code
used by the CLI and a ``debug_info`` dict holding the witness of the failure.
"""

from typing import Any, Dict, Optional


class MultiloopError(Exception):
    """Base exception class for all engine errors."""

    def __init__(
        self,
        error_code: str,
        message: str,
        exit_code: int = 2,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        self.error_code = error_code
        self.message = message
        self.exit_code = exit_code
        self.debug_info = debug_info or {}
        super().__init__(message)

    def to_payload(self, include_debug: bool = True) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "error": type(self).__name__,
            "error_code": self.error_code,
            "message": self.message,
        }
        if include_debug and self.debug_info:
            payload["debug_info"] = self.debug_info
        return payload


# ---------------------------------------------------------------------------
# Cyclotomic field arithmetic
# ---------------------------------------------------------------------------


class FieldArithmeticException(MultiloopError):
    """Exception for cyclotomic field arithmetic errors."""

    code = "FIELD_000"
    prefix = "Field arithmetic error"

    def __init__(
        self,
        message: str,
        order: Optional[int] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if order is not None:
            debug_info["order"] = order
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class NotDivisibleError(FieldArithmeticException):
    code = "FIELD_001"
    prefix = "Order not divisible"


class DivisionByZeroError(FieldArithmeticException):
    code = "FIELD_002"
    prefix = "Division by zero"


class FieldTooSmallError(FieldArithmeticException):
    code = "FIELD_003"
    prefix = "Field too small"


# ---------------------------------------------------------------------------
# Lie algebras and automorphisms
# ---------------------------------------------------------------------------


class AlgebraException(MultiloopError):
    """Exception for structure-constant, linear algebra and automorphism errors."""

    code = "ALG_000"
    prefix = "Algebra error"

    def __init__(
        self,
        message: str,
        witness: Optional[Dict[str, Any]] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if witness:
            debug_info["witness"] = witness
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class DimensionMismatchError(AlgebraException):
    code = "ALG_001"
    prefix = "Dimension mismatch"


class UnsupportedError(AlgebraException):
    code = "ALG_002"
    prefix = "Unsupported"


class NotInvertibleError(AlgebraException):
    code = "ALG_003"
    prefix = "Not invertible"


class NotBracketPreservingError(AlgebraException):
    code = "ALG_004"
    prefix = "Not bracket preserving"


class OrderBoundExceededError(AlgebraException):
    code = "ALG_005"
    prefix = "Order bound exceeded"


class NotUnimodularError(AlgebraException):
    code = "ALG_006"
    prefix = "Not unimodular"


class NotNilpotentError(AlgebraException):
    code = "ALG_007"
    prefix = "Not nilpotent"


class NotCommutingError(AlgebraException):
    code = "ALG_008"
    prefix = "Automorphisms do not commute"


class NotDiagonalizableError(AlgebraException):
    code = "ALG_009"
    prefix = "Not diagonalizable"


# ---------------------------------------------------------------------------
# Gradings, roots and tori
# ---------------------------------------------------------------------------


class GradingException(MultiloopError):
    """Exception for grading, root-system and toralization errors."""

    code = "GRADE_000"
    prefix = "Grading error"

    def __init__(
        self,
        message: str,
        component: Optional[str] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if component is not None:
            debug_info["component"] = component
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class GradeViolationError(GradingException):
    code = "GRADE_001"
    prefix = "Grade violation"


class EmptyComponentError(GradingException):
    code = "GRADE_002"
    prefix = "Empty component"


class ZeroFixedAlgebraError(GradingException):
    code = "GRADE_003"
    prefix = "Zero fixed algebra"


class IsotropicRootError(GradingException):
    code = "ROOT_001"
    prefix = "Isotropic root"


class UnclassifiedTypeError(GradingException):
    code = "ROOT_002"
    prefix = "Unclassified root system"


class SearchExhaustedError(GradingException):
    code = "TORUS_001"
    prefix = "Search exhausted"


# ---------------------------------------------------------------------------
# Certificates and regradings
# ---------------------------------------------------------------------------


class CertificateException(MultiloopError):
    """Exception for isomorphism certificates and regrading views."""

    code = "CERT_000"
    prefix = "Certificate error"

    def __init__(
        self,
        message: str,
        step: Optional[str] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if step is not None:
            debug_info["step"] = step
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class CertificateInvalidError(CertificateException):
    code = "CERT_001"
    prefix = "Certificate invalid"


class NotMonomorphismError(CertificateException):
    code = "CERT_002"
    prefix = "Not a monomorphism"


class DomainMismatchError(CertificateException):
    code = "CERT_003"
    prefix = "Domain mismatch"


class CertificateRequiredError(CertificateException):
    code = "CERT_004"
    prefix = "Certificate required"


# ---------------------------------------------------------------------------
# EALA construction
# ---------------------------------------------------------------------------


class EalaException(MultiloopError):
    """Exception for frame construction and EALA computations."""

    code = "EALA_000"
    prefix = "EALA error"

    def __init__(
        self,
        message: str,
        condition: Optional[str] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if condition is not None:
            debug_info["condition"] = condition
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class L1ViolationError(EalaException):
    code = "EALA_L1"
    prefix = "L1 violation"


class L2ViolationError(EalaException):
    code = "EALA_L2"
    prefix = "L2 violation"


class L3ViolationError(EalaException):
    code = "EALA_L3"
    prefix = "L3 violation"


class L4ViolationError(EalaException):
    code = "EALA_L4"
    prefix = "L4 violation"


class EvNotInjectiveError(EalaException):
    code = "EALA_001"
    prefix = "Evaluation map not injective"


class CocycleInvalidError(EalaException):
    code = "EALA_002"
    prefix = "Cocycle invalid"


class FrameMismatchError(EalaException):
    code = "EALA_003"
    prefix = "Frame mismatch"


# ---------------------------------------------------------------------------
# Input files
# ---------------------------------------------------------------------------


class InputException(MultiloopError):
    """Exception for spec / certificate file problems."""

    code = "INPUT_000"
    prefix = "Input error"

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        debug_info: Optional[Dict[str, Any]] = None,
    ):
        if debug_info is None:
            debug_info = {}
        if field:
            debug_info["field"] = field
        super().__init__(
            error_code=self.code,
            message=f"{self.prefix}: {message}",
            debug_info=debug_info,
        )


class ParseError(InputException):
    code = "INPUT_001"
    prefix = "Parse error"


class ValidationError(InputException):
    code = "INPUT_002"
    prefix = "Validation error"
