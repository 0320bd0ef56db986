"""
Command registry for the multiloop CLI.

Each command takes parsed spec files (and optionally a certificate), runs
the matching services and returns (passed, results). ``run`` wraps the
outcome in a Report with the parameters and the digest of the inputs.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError as SchemaError

from app.core.config import get_settings
from app.core.exceptions import (
    AlgebraException,
    GradingException,
    MultiloopError,
    ParseError,
    ValidationError,
    ZeroFixedAlgebraError,
)
from app.core.logging import get_logger
from app.models.schemas import CertificateFile, Report, ReportParameters, SpecFile
from app.services import lattice
from app.services.autos import AutTuple, Automorphism, check_automorphism, from_named
from app.services.cycfield import CycNum, lcm
from app.services.eala import build_frame, eala_equivalence_probe, form_uniqueness, verify_axioms
from app.services.formatters import inputs_digest
from app.services.liecore import LieAlgebra, chevalley
from app.services.multiloop import (
    MultiloopLieAlgebra,
    central_grading_group,
    support_group,
    zn_support,
)
from app.services.roots import verify_root_system
from app.services.supportiso import (
    IsoCertificate,
    chain_from_certificate,
    search_certificate,
    verify_supp_certificate,
)
from app.services.torus import check_reflections, check_root_components, check_torus, toralize

logger = get_logger(__name__)

Results = Dict[str, Any]


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def load_json(path: str) -> Any:
    """
    Raises:
        ParseError: for a missing file or malformed JSON, with line and column
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", field="path") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: {exc.msg}",
            field="json",
            debug_info={"line": exc.lineno, "column": exc.colno},
        ) from exc


def _schema_error(path: str, exc: SchemaError) -> ParseError:
    first = exc.errors()[0]
    location = ".".join(str(x) for x in first["loc"])
    return ParseError(f"{path}: {location}: {first['msg']}", field=location, debug_info={"errors": exc.error_count()})


@dataclass
class ParsedSpec:
    """A validated spec file: the algebra, the tuple and the options."""

    path: str
    document: Dict[str, Any]
    spec: SpecFile
    algebra: LieAlgebra
    sigma: AutTuple
    order: int
    _algebras: Dict[int, MultiloopLieAlgebra] = field(default_factory=dict, repr=False)

    @property
    def options(self) -> Any:
        return self.spec.options

    def multiloop(self, seed: int) -> MultiloopLieAlgebra:
        if seed not in self._algebras:
            self._algebras[seed] = MultiloopLieAlgebra(self.sigma, seed=seed)
        return self._algebras[seed]


def _build_algebra(spec: SpecFile, order: int) -> LieAlgebra:
    a = spec.algebra
    if a.type is not None:
        if a.rank is None:
            raise ParseError("a Chevalley type needs a rank", field="algebra.rank")
        return chevalley(a.type, a.rank)
    if a.dim is None or a.structure is None:
        raise ParseError("give either type and rank or dim and structure", field="algebra")
    triples = []
    for index, entry in enumerate(a.structure):
        if len(entry) != 4:
            raise ParseError(f"structure entry {index} must be [i, j, k, value]", field=f"algebra.structure[{index}]")
        i, j, k = (int(x) for x in entry[:3])
        if max(i, j, k) >= a.dim or min(i, j, k) < 0:
            raise ParseError(f"structure entry {index} indexes outside 0..{a.dim - 1}", field=f"algebra.structure[{index}]")
        triples.append((i, j, k, CycNum.from_json(entry[3], order)))
    return LieAlgebra.from_triples(a.dim, triples, a.labels, name=f"lie({a.dim})")


def _check_field(spec: SpecFile, order: int) -> int:
    """Torus weights must live in Q(zeta_order); auto-extension lifts the order instead."""
    settings = get_settings()
    for index, auto in enumerate(spec.automorphisms):
        if auto.named != "torus":
            continue
        for w in auto.argument or []:
            q = lattice.parse_fraction(w)
            if order % q.denominator == 0:
                continue
            if not settings.auto_extend_field:
                raise ValidationError(
                    f"weight {q} needs zeta_{q.denominator}, outside Q(zeta_{order})",
                    field=f"automorphisms[{index}].argument",
                )
            order = lcm(order, q.denominator)
            logger.info(f"session field extended to Q(zeta_{order}) for weight {q}")
    return order


def _build_automorphism(g: LieAlgebra, spec: SpecFile, index: int, order: int) -> Automorphism:
    auto = spec.automorphisms[index]
    if auto.named is not None:
        return from_named(g, auto.named, auto.argument)
    if auto.matrix is None:
        raise ParseError("give either named or matrix", field=f"automorphisms[{index}]")
    matrix = [tuple(CycNum.from_json(x, order) for x in row) for row in auto.matrix]
    return check_automorphism(g, matrix, f"sigma_{index + 1}")


def parse_spec(path: str) -> ParsedSpec:
    """
    Load and validate a spec file.

    Raises:
        ParseError: malformed JSON or schema violations
        ValidationError: well-formed input that does not define a valid tuple
    """
    document = load_json(path)
    try:
        spec = SpecFile.model_validate(document)
    except SchemaError as exc:
        raise _schema_error(path, exc) from exc
    settings = get_settings()
    order = settings.field_order or spec.cyclotomic_order
    order = _check_field(spec, order)
    g = _build_algebra(spec, order)
    try:
        autos = [_build_automorphism(g, spec, i, order) for i in range(len(spec.automorphisms))]
        sigma = AutTuple(autos, spec.m)
    except (AlgebraException, GradingException) as exc:
        raise ValidationError(f"{path}: {exc.message}", field="automorphisms", debug_info=exc.debug_info) from exc
    logger.info(f"parsed {path}: {g.name}, orders {list(sigma.orders)}, m={list(sigma.m)}")
    return ParsedSpec(path, document, spec, g, sigma, order)


def load_certificate(path: str, order: int) -> Tuple[Dict[str, Any], IsoCertificate]:
    document = load_json(path)
    try:
        data = CertificateFile.model_validate(document)
    except SchemaError as exc:
        raise _schema_error(path, exc) from exc
    return document, IsoCertificate.from_file(data, order)


# ---------------------------------------------------------------------------
# Parameters and context
# ---------------------------------------------------------------------------


@dataclass
class RunParameters:
    window: int
    gamma_window: int
    search_bound: int
    certificate_bound: int
    seed: int
    field_order: Optional[int] = None

    @classmethod
    def resolve(cls, flags: Dict[str, Optional[int]], spec: Optional[ParsedSpec]) -> "RunParameters":
        """Command-line flags win over spec options, which win over settings."""
        settings = get_settings()
        options = spec.options if spec is not None else None

        def pick(flag: str, option: str, default: int) -> int:
            if flags.get(flag) is not None:
                return int(flags[flag])  # type: ignore[arg-type]
            value = getattr(options, option, None) if options is not None else None
            return default if value is None else int(value)

        return cls(
            window=pick("window", "window", settings.window_radius),
            gamma_window=pick("gamma_window", "gamma_window", settings.gamma_window),
            search_bound=pick("bound", "bound", settings.search_bound),
            certificate_bound=pick("bound", "bound", settings.certificate_bound),
            seed=pick("seed", "seed", settings.seed),
            field_order=settings.field_order,
        )

    def to_model(self) -> ReportParameters:
        return ReportParameters(
            window=self.window,
            gamma_window=self.gamma_window,
            search_bound=self.search_bound,
            certificate_bound=self.certificate_bound,
            seed=self.seed,
            field_order=self.field_order,
        )


@dataclass
class CommandContext:
    specs: List[ParsedSpec]
    params: RunParameters
    certificate: Optional[IsoCertificate] = None
    probe: bool = False

    def algebra(self, index: int = 0) -> MultiloopLieAlgebra:
        return self.specs[index].multiloop(self.params.seed)


Handler = Callable[[CommandContext], Tuple[bool, Results]]


@dataclass
class Command:
    name: str
    handler: Handler
    min_specs: int
    max_specs: Optional[int]
    certificate: str = "no"  # no | optional | required
    description: str = ""


def _key(degree: Sequence[int]) -> str:
    return ",".join(str(x) for x in degree)


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def run_grade(ctx: CommandContext) -> Tuple[bool, Results]:
    L = ctx.algebra()
    generators, dims = central_grading_group(L, verify=True)
    zero = (0,) * L.n
    consistent = all(d == (1 if mu == zero else 0) for mu, d in dims.items())
    results = {
        "m": list(L.m),
        "n": L.n,
        "orders": list(L.sigma.orders),
        "fixed_dimension": len(L.fixed),
        "dimensions": {_key(cls): d for cls, d in sorted(L.dimensions().items())},
        "central_grading_group": [list(g) for g in generators],
        "centroid_dimensions": {_key(mu): d for mu, d in sorted(dims.items())},
        "support_rank": lattice.lattice_rank(support_group(L), L.n),
        "support_window_size": len(zn_support(L, ctx.params.window)),
    }
    return consistent, results


def run_roots(ctx: CommandContext) -> Tuple[bool, Results]:
    L = ctx.algebra()
    if L.rootdatum is None:
        raise ZeroFixedAlgebraError("g^sigma = 0; there is no root grading")
    report = verify_root_system(L.rootdatum)
    components = check_root_components(L)
    reflections = check_reflections(L)
    results = {
        "root_system": report.model_dump(mode="json"),
        "root_components": components.model_dump(mode="json"),
        "reflections": reflections.model_dump(mode="json"),
    }
    return report.passed and components.passed and reflections.passed, results


def run_torus_check(ctx: CommandContext) -> Tuple[bool, Results]:
    report = check_torus(ctx.algebra())
    return report.is_torus, {"torus": report.model_dump(mode="json")}


def _toralize_results(L: MultiloopLieAlgebra, params: RunParameters) -> Tuple[bool, Results]:
    cert = toralize(L, params.search_bound)
    rd = L.rootdatum
    assert rd is not None
    verification = verify_supp_certificate(L, cert.result, cert.certificate)
    chain = chain_from_certificate(cert.certificate, L, cert.result)
    chain_result = chain.verify(params.window)
    results = {
        "base": [rd.label(a) for a in cert.base],
        "lambda_choices": {rd.label(a): list(v) for a, v in cert.lambda_choices.items()},
        "P": [list(row) for row in cert.P],
        "result_m": list(cert.result.m),
        "torus": cert.report.model_dump(mode="json"),
        "certificate": cert.certificate.to_file().model_dump(by_alias=True, mode="json"),
        "verification": verification.model_dump(mode="json"),
        "chain": chain.describe(),
        "chain_verification": chain_result.model_dump(mode="json"),
    }
    return cert.report.is_torus and verification.passed and chain_result.passed, results


def run_toralize(ctx: CommandContext) -> Tuple[bool, Results]:
    return _toralize_results(ctx.algebra(), ctx.params)


def run_iso_verify(ctx: CommandContext) -> Tuple[bool, Results]:
    L, L_prime = ctx.algebra(0), ctx.algebra(1)
    assert ctx.certificate is not None
    result = verify_supp_certificate(L, L_prime, ctx.certificate)
    results: Results = {"verification": result.model_dump(mode="json")}
    passed = result.passed
    if passed:
        chain = chain_from_certificate(ctx.certificate, L, L_prime)
        chain_result = chain.verify(ctx.params.window)
        results["chain"] = chain.describe()
        results["chain_verification"] = chain_result.model_dump(mode="json")
        passed = chain_result.passed
    if passed and ctx.probe:
        probe = eala_equivalence_probe(L, L_prime, ctx.certificate, window=ctx.params.window)
        results["eala_probe"] = probe.model_dump(mode="json")
        passed = probe.passed
    return passed, results


def run_iso_search(ctx: CommandContext) -> Tuple[bool, Results]:
    L, L_prime = ctx.algebra(0), ctx.algebra(1)
    cert = search_certificate(L, L_prime, ctx.params.certificate_bound)
    if cert is None:
        return False, {"found": False, "bound": ctx.params.certificate_bound}
    return True, {"found": True, "certificate": cert.to_file().model_dump(by_alias=True, mode="json")}


def _frame(ctx: CommandContext, index: int = 0) -> Any:
    spec = ctx.specs[index]
    frame_spec = spec.options.frame
    L = ctx.algebra(index)
    if frame_spec is None:
        return build_frame(L, "degree0", order=spec.order)
    return build_frame(L, frame_spec.D, frame_spec.tau, order=spec.order)


def run_eala_build(ctx: CommandContext) -> Tuple[bool, Results]:
    frame = _frame(ctx)
    return True, {"frame": frame.describe()}


def run_eala_verify(ctx: CommandContext) -> Tuple[bool, Results]:
    frame = _frame(ctx)
    report = verify_axioms(frame, window=ctx.params.window, seed=ctx.params.seed)
    uniqueness = form_uniqueness(frame.L, window=ctx.params.window)
    results = {
        "frame": frame.describe(),
        "axioms": report.model_dump(mode="json"),
        "form_solution_dimension": uniqueness,
    }
    return report.passed and uniqueness == 1, results


def _spec_summary(spec: ParsedSpec, params: RunParameters) -> Tuple[bool, Results]:
    ctx = CommandContext([spec], params)
    L = ctx.algebra()
    entry: Results = {}
    passed, entry["grade"] = run_grade(ctx)
    ok, entry["torus"] = run_torus_check(ctx)
    entry["torus"]["is_torus"] = ok
    if L.fixed:
        ok, entry["roots"] = run_roots(ctx)
        passed = passed and ok
    try:
        ok, entry["toralize"] = _toralize_results(L, params)
        passed = passed and ok and bool(L.fixed)
    except ZeroFixedAlgebraError as exc:
        entry["toralize"] = exc.to_payload(include_debug=False)
        passed = passed and not L.fixed
    except MultiloopError as exc:
        entry["toralize"] = exc.to_payload(include_debug=False)
        passed = False
    return passed, entry


def run_report_all(ctx: CommandContext) -> Tuple[bool, Results]:
    results: Results = {}
    passed = True
    for spec in ctx.specs:
        ok, entry = _spec_summary(spec, ctx.params)
        results[Path(spec.path).stem] = entry
        passed = passed and ok
    return passed, results


COMMANDS: Dict[str, Command] = {
    c.name: c
    for c in [
        Command("grade", run_grade, 1, 1, description="grading components and central grading group"),
        Command("roots", run_roots, 1, 1, description="root system of g relative to h"),
        Command("torus-check", run_torus_check, 1, 1, description="conditions A0-A3"),
        Command("toralize", run_toralize, 1, 1, description="support-isomorphic Lie torus with certificate"),
        Command("iso-verify", run_iso_verify, 2, 2, certificate="required", description="verify a certificate"),
        Command("iso-search", run_iso_search, 2, 2, description="bounded certificate search"),
        Command("eala-build", run_eala_build, 1, 1, description="validate an EALA frame"),
        Command("eala-verify", run_eala_verify, 1, 1, description="EALA axioms on a window"),
        Command("report-all", run_report_all, 1, None, description="grade, roots, torus and toralize per spec"),
    ]
}


def expand_paths(paths: Sequence[str]) -> List[str]:
    """Directories expand to their *.json files in sorted order."""
    out: List[str] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            out.extend(str(x) for x in sorted(path.glob("*.json")))
        else:
            out.append(p)
    return out


def run(
    command: str,
    spec_paths: Sequence[str],
    certificate_path: Optional[str] = None,
    flags: Optional[Dict[str, Optional[int]]] = None,
    probe: bool = False,
) -> Report:
    """
    Parse the inputs, run one command and build its report.

    Raises:
        ParseError: unknown command or wrong number of inputs
        MultiloopError: whatever the services raise
    """
    if command not in COMMANDS:
        raise ParseError(f"unknown command {command!r}", field="command")
    entry = COMMANDS[command]
    paths = expand_paths(spec_paths) if entry.max_specs is None else list(spec_paths)
    if len(paths) < entry.min_specs or (entry.max_specs is not None and len(paths) > entry.max_specs):
        raise ParseError(
            f"{command} takes {entry.min_specs}..{entry.max_specs or 'n'} spec files, got {len(paths)}", field="specs"
        )
    if entry.certificate == "required" and certificate_path is None:
        raise ParseError(f"{command} needs a certificate file", field="certificate")
    specs = [parse_spec(p) for p in paths]
    documents: List[Any] = [s.document for s in specs]
    certificate = None
    if certificate_path is not None:
        cert_document, certificate = load_certificate(certificate_path, specs[0].order)
        documents.append(cert_document)
    params = RunParameters.resolve(flags or {}, specs[0] if len(specs) == 1 else None)
    ctx = CommandContext(specs, params, certificate, probe)
    logger.info(f"running {command} on {[s.path for s in specs]}")
    passed, results = entry.handler(ctx)
    return Report(
        command=command,
        inputs_digest=inputs_digest(documents),
        parameters=params.to_model(),
        passed=passed,
        results=results,
    )
