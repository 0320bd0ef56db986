"""
Pydantic models for spec files, certificates and command reports.
Exact values travel as strings ("p/q" rationals, cyclotomic coefficient lists).
"""

from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field


# ---------------------------------------------------------------------------
# Input files
# ---------------------------------------------------------------------------


class AlgebraSpec(BaseModel):
    """Either a Chevalley type or an explicit structure table."""

    type: Optional[str] = Field(default=None, description="Cartan type letter (A, B, C, D, G)")
    rank: Optional[int] = Field(default=None, description="Rank for a Chevalley type", ge=1)
    dim: Optional[int] = Field(default=None, description="Dimension of an explicit algebra", ge=1)
    structure: Optional[List[List[Any]]] = Field(
        default=None,
        description="Sparse triples [i, j, k, value] meaning c_ij^k = value",
    )
    labels: Optional[List[str]] = Field(default=None, description="Basis labels")


class AutomorphismSpec(BaseModel):
    """An explicit matrix or a named constructor."""

    named: Optional[str] = Field(
        default=None,
        description="identity | chevalley_involution | diagram | torus",
    )
    argument: Optional[List[Any]] = Field(
        default=None,
        description="Permutation (diagram, 1-based) or rational weights (torus)",
    )
    matrix: Optional[List[List[Any]]] = Field(
        default=None,
        description="Row-major matrix of cyclotomic numbers; columns are images",
    )


class TauEntry(BaseModel):
    """One value tau(d_i, d_j)(d_k) of the cocycle table."""

    i: int = Field(ge=0)
    j: int = Field(ge=0)
    k: int = Field(ge=0)
    value: Any = Field(description="Cyclotomic number")


class FrameSpec(BaseModel):
    """Ingredients (D, tau) of the EALA construction."""

    D: Union[str, List[Dict[str, Any]]] = Field(
        default="degree0",
        description='"degree0", "scder_window:k" or a list of {mu, theta} derivations',
    )
    tau: List[TauEntry] = Field(default_factory=list, description="Cocycle table, default 0")


class SpecOptions(BaseModel):
    window: Optional[int] = Field(default=None, description="Z^n window radius", ge=0)
    gamma_window: Optional[int] = Field(default=None, description="Gamma window radius", ge=0)
    bound: Optional[int] = Field(default=None, description="Search bound", ge=0)
    seed: Optional[int] = Field(default=None, description="Seed for pseudorandom choices")
    frame: Optional[FrameSpec] = Field(default=None, description="EALA frame ingredients")


class SpecFile(BaseModel):
    """A multiloop algebra L_m(g, sigma, h) on disk."""

    schema_version: int = Field(default=1, alias="schema", description="Spec schema version")
    cyclotomic_order: int = Field(default=1, description="Session cyclotomic order", ge=1)
    algebra: AlgebraSpec
    automorphisms: List[AutomorphismSpec] = Field(min_length=1)
    m: Optional[List[int]] = Field(default=None, description="Grading periods, default ord(sigma)")
    options: SpecOptions = Field(default_factory=SpecOptions)

    class Config:
        populate_by_name = True


class CertificateFile(BaseModel):
    """Support-isomorphism certificate (s, P, phi)."""

    schema_version: int = Field(default=1, alias="schema")
    s: Dict[str, List[str]] = Field(
        default_factory=dict, description="Values of s on the base roots a1..ar"
    )
    P: List[List[int]] = Field(description="Matrix in GL_n(Z)")
    phi: Union[str, List[List[Any]]] = Field(
        default="identity", description='"identity" or a row-major matrix'
    )

    class Config:
        populate_by_name = True


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class CheckResult(BaseModel):
    """One pass/fail check with its witness."""

    name: str
    passed: bool
    detail: str = Field(default="", description="Short human-readable summary")
    witness: Dict[str, Any] = Field(default_factory=dict)


class RootSystemReport(BaseModel):
    cartan_type: str = Field(description="Classified type, e.g. A1, BC1, G2")
    rank: int
    reduced: bool
    irreducible: bool
    seed: int = Field(description="Seed used for the Cartan subalgebra")
    roots: List[str] = Field(description="Roots as coordinates in the base")
    cartan_matrix: List[List[int]]
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class TorusReport(BaseModel):
    a0: CheckResult
    a1: CheckResult
    a2: CheckResult
    a3: CheckResult
    is_torus: bool


class VerificationResult(BaseModel):
    """Outcome of a certificate verification, with the first failure."""

    passed: bool
    step: str = Field(default="", description="Name of the failing step")
    witness: Dict[str, Any] = Field(default_factory=dict)


class AxiomReport(BaseModel):
    window: int
    gamma_window: int
    checks: Dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())


class ProbeReport(BaseModel):
    checks: List[CheckResult]
    scalar: Optional[List[str]] = Field(
        default=None, description="Form ratio between transported and target frames"
    )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class ReportParameters(BaseModel):
    window: int
    gamma_window: int
    search_bound: int
    certificate_bound: int
    seed: int
    field_order: Optional[int] = None


class Report(BaseModel):
    """Top-level JSON document written by every command."""

    schema_version: int = Field(default=1, alias="schema")
    command: str
    inputs_digest: str = Field(description="SHA-256 of the canonical input JSON")
    parameters: ReportParameters
    passed: bool
    results: Dict[str, Any] = Field(default_factory=dict)

    class Config:
        populate_by_name = True


class ErrorPayload(BaseModel):
    error: str
    error_code: str
    message: str
    debug_info: Optional[Dict[str, Any]] = None
