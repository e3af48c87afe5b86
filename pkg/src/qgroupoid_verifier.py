"""
Scenario Verifier

Reads scenario files, builds the instance a scenario names, runs its checks
(concurrently, reported in order) and renders text, JSON or tabular reports.

A scenario is a line-oriented key/value document:

    name = moyal-plane
    expected = pass
    order = 3

    [base]
    coordinates = x, p

    [instance]
    kind = twist:moyal
    pi = [[0, 1], [-1, 0]]

    [probes]
    max_coefficient_degree = 2

    [checks]
    twistor
    coassociativity

See docs/SCENARIO_FORMAT.md for every key.
"""

from __future__ import annotations

import logging
import re
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .data.structures import (
    CheckOutcome,
    LieAlgebraData,
    ResidualReport,
    ScenarioReport,
    StandardAlgebras,
    combine_reports,
)
from .models.algebra_core import base_ring, parse_coefficient, to_rational
from .models.classical_limit import classical_limit_report, quantize_flat_triangular, round_trip_report
from .models.diffop import vector_field
from .models.dynamical_r import (
    AltConvention,
    DynamicalR,
    calibrate_alt_convention,
    casimir_tensor,
    check_cdybe,
    check_equivariance,
    example41_lambda,
    perturbed_sl2_fixture,
    rational_sl2_fixture,
    symmetric_part_check,
)
from .models.hopf_classical import (
    HopfAlgebroidInstance,
    ProbeBounds,
    check_coassociativity,
    check_cocommutativity,
    check_compatibility,
    check_counit,
    check_source_target,
    corrupted_dp_instance,
    dp_instance,
    ug_instance,
)
from .models.lie_algebroid import Multivector, bivector_from_matrix, regularity_rank, tangent_algebroid
from .models.star_twist import (
    DeformedInstance,
    Twist,
    check_associativity,
    check_deformed_coassociativity,
    check_deformed_compatibility,
    check_deformed_counit,
    check_deformed_multiplicativity,
    check_deformed_source_target,
    check_eq11,
    check_mod_hbar,
    check_poisson,
    check_twistor,
    check_unital,
    commuting_frame_twist,
    deformed_instance,
    explicit_twist,
    moyal_twist,
    StarAlgebra,
)
from .utils.config_loader import get_config_loader
from .utils.exceptions import QGroupoidError, ScenarioParseError

logger = logging.getLogger(__name__)

__version__ = "0.3.0"

KINDS = (
    "classical-dp",
    "classical-ug",
    "twist:moyal",
    "twist:commuting-frame",
    "twist:explicit",
    "triangular:flat",
    "dynamical-r",
)

KIND_FAMILIES = {
    "classical-dp": ("classical",),
    "classical-ug": ("classical",),
    "twist:moyal": ("deformed",),
    "twist:commuting-frame": ("deformed",),
    "twist:explicit": ("deformed",),
    "triangular:flat": ("deformed", "triangular"),
    "dynamical-r": ("dynamical",),
}

REPEATED_KEYS = {"term", "entry"}


# =========================
# Matrix and list literals
# =========================


def parse_matrix(text: str, entry: Callable[[str], Any] = to_rational) -> List[List[Any]]:
    """'[[0, 1], [-1, 0]]' -> rows; entries go through ``entry``."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"matrix must be written as [[...], ...], got {text!r}")
    inner = text[1:-1].strip()
    rows = re.findall(r"\[([^\[\]]*)\]", inner)
    if not rows or re.sub(r"\[[^\[\]]*\]", "", inner).replace(",", "").strip():
        raise ValueError(f"malformed matrix {text!r}")
    matrix = [[entry(v.strip()) for v in row.split(",") if v.strip()] for row in rows]
    widths = {len(row) for row in matrix}
    if len(widths) != 1:
        raise ValueError(f"matrix rows have different lengths in {text!r}")
    return matrix


def parse_index(text: str) -> Tuple[int, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"multi-index must be written as [i, j, ...], got {text!r}")
    return tuple(int(v) for v in text[1:-1].split(",") if v.strip())


def _is_square_antisymmetric(matrix: List[List[Any]]) -> Optional[str]:
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        return f"matrix must be square, got {n} rows of length {len(matrix[0])}"
    bad = [(i, j) for i in range(n) for j in range(n) if matrix[i][j] + matrix[j][i]]
    if bad:
        return f"matrix is not antisymmetric at {bad[:3]}"
    return None


# =========================
# Scenario model
# =========================


def _probe_default(key: str, default: int) -> int:
    return get_config_loader().get_value('probes', key, default)


class Scenario(BaseModel):
    """A validated scenario; ``parameters`` keeps the raw [instance] values."""
    model_config = ConfigDict(frozen=True)

    name: str
    expected: Literal["pass", "fail"] = "pass"
    order: int = Field(default_factory=lambda: get_config_loader().get_value('deformed', 'DEFAULT_ORDER', 3), ge=0)
    coordinates: Tuple[str, ...] = ()
    coefficient_field: Literal["poly", "ratfun"] = "poly"
    kind: Literal[KINDS]  # type: ignore[valid-type]
    parameters: Dict[str, Any] = Field(default_factory=dict)
    max_coefficient_degree: int = Field(default_factory=lambda: _probe_default("MAX_COEFFICIENT_DEGREE", 2), gt=0)
    max_operator_order: int = Field(default_factory=lambda: _probe_default("MAX_OPERATOR_ORDER", 2), gt=0)
    pbw_degree: int = Field(default_factory=lambda: _probe_default("PBW_DEGREE", 3), gt=0)
    checks: List[str]
    description: str = ""

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, checks: List[str]) -> List[str]:
        if not checks:
            raise ValueError("a scenario needs at least one check")
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ValueError(f"unknown check {unknown[0]!r}")
        return checks

    @field_validator("coordinates")
    @classmethod
    def _distinct_coordinates(cls, coordinates: Tuple[str, ...]) -> Tuple[str, ...]:
        if len(set(coordinates)) != len(coordinates):
            raise ValueError(f"repeated coordinate names in {coordinates}")
        for name in coordinates:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise ValueError(f"coordinate name {name!r} is not an identifier")
        return coordinates

    @model_validator(mode="after")
    def _applicable_checks(self) -> "Scenario":
        families = KIND_FAMILIES[self.kind]
        for name in self.checks:
            if not CHECKS[name].applies_to(families):
                raise ValueError(f"check {name!r} does not apply to kind {self.kind!r}")
        return self

    @property
    def bounds(self) -> ProbeBounds:
        configured = ProbeBounds.from_config(get_config_loader().get_probe_parameters())
        return ProbeBounds(
            max_coefficient_degree=self.max_coefficient_degree,
            max_operator_order=self.max_operator_order,
            pbw_degree=self.pbw_degree,
            max_exhaustive_pairs=configured.max_exhaustive_pairs,
        )

    def param(self, key: str, default: Any = None) -> Any:
        return self.parameters.get(key, default)


@dataclass
class _Line:
    number: int
    key: str
    value: str


def _tokenize(text: str) -> Tuple[Dict[str, List[_Line]], List[Tuple[int, str]], List[Tuple[int, str]]]:
    """Split into sections of key/value lines and the check list; collect syntax issues."""
    sections: Dict[str, List[_Line]] = {"": []}
    checks: List[Tuple[int, str]] = []
    issues: List[Tuple[int, str]] = []
    current = ""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = re.fullmatch(r"\[([A-Za-z_]+)\]", line)
        if header:
            current = header.group(1).lower()
            if current not in ("base", "instance", "probes", "checks"):
                issues.append((number, f"unknown section [{current}]"))
            sections.setdefault(current, [])
            continue
        if current == "checks":
            checks.extend((number, name.strip()) for name in line.split(",") if name.strip())
            continue
        if "=" not in line:
            issues.append((number, f"expected 'key = value', got {line!r}"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        sections.setdefault(current, []).append(_Line(number, key.lower(), value))
    return sections, checks, issues


TOP_KEYS = {"name", "expected", "order", "description"}
BASE_KEYS = {"coordinates", "dimension", "field"}
PROBE_KEYS = {"max_coefficient_degree", "max_operator_order", "pbw_degree"}


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse and validate scenario text; every problem is reported with its line."""
    sections, check_lines, issues = _tokenize(text)
    data: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    parameters: Dict[str, Any] = {}
    parameter_lines: Dict[str, int] = {}

    def take(entry: _Line, allowed: set, section: str):
        if entry.key not in allowed:
            issues.append((entry.number, f"unknown key {entry.key!r} in [{section or 'top'}]"))
            return
        if entry.key in lines:
            issues.append((entry.number, f"duplicate key {entry.key!r}"))
            return
        lines[entry.key] = entry.number
        data[entry.key] = entry.value

    for entry in sections.get("", []):
        take(entry, TOP_KEYS, "")
    for entry in sections.get("base", []):
        take(entry, BASE_KEYS, "base")
    for entry in sections.get("probes", []):
        take(entry, PROBE_KEYS, "probes")
    for entry in sections.get("instance", []):
        if entry.key == "kind":
            take(entry, {"kind"}, "instance")
        elif entry.key in REPEATED_KEYS:
            parameters.setdefault(entry.key, []).append((entry.number, entry.value))
            parameter_lines.setdefault(entry.key, entry.number)
        elif entry.key in parameters:
            issues.append((entry.number, f"duplicate key {entry.key!r}"))
        else:
            parameters[entry.key] = entry.value
            parameter_lines[entry.key] = entry.number

    if "coordinates" in data:
        data["coordinates"] = tuple(c.strip() for c in data.pop("coordinates").split(",") if c.strip())
    elif "dimension" in data:
        try:
            n = int(data.pop("dimension"))
            data["coordinates"] = ("x",) if n == 1 else tuple(f"x{k + 1}" for k in range(n))
        except ValueError:
            issues.append((lines["dimension"], "dimension must be an integer"))
    data.pop("dimension", None)
    if "field" in data:
        data["coefficient_field"] = data.pop("field")
        lines["coefficient_field"] = lines["field"]
    for key in ("order",) + tuple(PROBE_KEYS):
        if key in data:
            try:
                data[key] = int(data[key])
            except ValueError:
                issues.append((lines[key], f"{key} must be an integer"))
                data.pop(key)

    for number, name in check_lines:
        if name not in CHECKS:
            issues.append((number, f"unknown check {name!r}"))
    data["checks"] = [name for _, name in check_lines]
    data["parameters"] = parameters
    if "kind" not in data:
        issues.append((0, "[instance] needs a kind"))
    if "name" not in data:
        data["name"] = Path(source).stem if source != "<scenario>" else "unnamed"

    if issues:
        raise ScenarioParseError(sorted(issues))
    try:
        scenario = Scenario(**data)
    except ValidationError as exc:
        found = []
        for error in exc.errors():
            key = str(error["loc"][0]) if error["loc"] else ""
            line = lines.get(key, check_lines[0][0] if key == "checks" and check_lines else 0)
            found.append((line, f"{key}: {error['msg']}" if key else error["msg"]))
        raise ScenarioParseError(found)

    try:
        build_context(scenario, validate_only=True)
    except _ParameterIssue as exc:
        raise ScenarioParseError([(parameter_lines.get(exc.key, lines.get("kind", 0)), str(exc))])
    logger.info("parsed scenario %s (%s, %d checks)", scenario.name, scenario.kind, len(scenario.checks))
    return scenario


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))


# =========================
# Instance construction
# =========================


class _ParameterIssue(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


@dataclass
class ScenarioContext:
    scenario: Scenario
    classical: Optional[HopfAlgebroidInstance] = None
    twist_factory: Optional[Callable[[int], Twist]] = None
    deformed: Optional[DeformedInstance] = None
    algebroid_bivector: Optional[Multivector] = None
    algebra: Optional[LieAlgebraData] = None
    r: Optional[DynamicalR] = None
    _twists: Dict[int, Twist] = field(default_factory=dict)

    def twist(self, order: int) -> Twist:
        if order not in self._twists:
            self._twists[order] = self.twist_factory(order)
        return self._twists[order]

    @property
    def star_order(self) -> int:
        floor = get_config_loader().get_value('algebra', 'DEFAULT_TRUNCATION_ORDER', 4)
        return max(self.scenario.order, floor)


def _required(scenario: Scenario, key: str) -> str:
    value = scenario.param(key)
    if value is None:
        raise _ParameterIssue(key, f"kind {scenario.kind} needs '{key}' in [instance]")
    return value


def _matrix(scenario: Scenario, key: str, antisymmetric: bool = False) -> List[List[Any]]:
    text = _required(scenario, key)
    try:
        matrix = parse_matrix(text)
    except (ValueError, TypeError) as exc:
        raise _ParameterIssue(key, f"{key}: {exc}")
    if antisymmetric:
        problem = _is_square_antisymmetric(matrix)
        if problem:
            raise _ParameterIssue(key, f"{key}: {problem}")
    return matrix


def _coordinates(scenario: Scenario, n: int) -> Tuple[str, ...]:
    if scenario.coordinates:
        if len(scenario.coordinates) != n:
            raise _ParameterIssue("kind", f"{n} coordinates expected, got {scenario.coordinates}")
        return scenario.coordinates
    return ("x", "p") if n == 2 else tuple(f"x{k + 1}" for k in range(n))


def _algebra(scenario: Scenario) -> LieAlgebraData:
    try:
        return StandardAlgebras.by_name(scenario.param("algebra", "sl2"))
    except (KeyError, ValueError) as exc:
        raise _ParameterIssue("algebra", str(exc))


def _dynamical_r(scenario: Scenario, g: LieAlgebraData) -> DynamicalR:
    fixture = scenario.param("fixture")
    entries = scenario.param("entry", [])
    if fixture and entries:
        raise _ParameterIssue("entry", "give either a fixture or explicit entries, not both")
    try:
        if fixture == "rational-sl2":
            r = rational_sl2_fixture(scenario.param("shift", "0"))
        elif fixture == "perturbed-sl2":
            r = perturbed_sl2_fixture()
        elif fixture == "zero" or (fixture is None and not entries):
            r = DynamicalR.zero(g)
        elif fixture is not None:
            raise _ParameterIssue("fixture", f"unknown fixture {fixture!r}")
        else:
            values = {}
            for number, text in entries:
                parts = [p.strip() for p in text.split(",", 2)]
                if len(parts) != 3:
                    raise _ParameterIssue("entry", f"line {number}: entry must be 'a, b, coefficient'")
                values[(parts[0], parts[1])] = parts[2]
            r = DynamicalR.from_entries(g, values)
        if r.algebra.basis != g.basis:
            raise _ParameterIssue("fixture", f"fixture lives on {r.algebra.name}, not {g.name}")
        casimir = scenario.param("casimir")
        if casimir is not None:
            r = r + casimir_tensor(g).scale(casimir)
        return r
    except _ParameterIssue:
        raise
    except (QGroupoidError, ValueError, TypeError, KeyError) as exc:
        raise _ParameterIssue("entry" if entries else "fixture", str(exc))


def _explicit_terms(scenario: Scenario, ring) -> List[Tuple[int, Any, Tuple[int, ...], Tuple[int, ...]]]:
    terms = []
    for number, text in scenario.param("term", []):
        parts = [p.strip() for p in text.split("|")]
        if len(parts) != 4:
            raise _ParameterIssue("term", f"line {number}: term must be 'k | coefficient | [I] | [J]'")
        try:
            first, second = parse_index(parts[2]), parse_index(parts[3])
            if len(first) != ring.ngens or len(second) != ring.ngens:
                raise ValueError(f"multi-indices need {ring.ngens} entries")
            terms.append((int(parts[0]), parse_coefficient(ring, parts[1]), first, second))
        except (QGroupoidError, ValueError, TypeError) as exc:
            raise _ParameterIssue("term", f"line {number}: {exc}")
    if not terms:
        raise _ParameterIssue("term", "twist:explicit needs at least one 'term' line")
    return terms


def build_context(scenario: Scenario, validate_only: bool = False) -> ScenarioContext:
    """Build the instance the scenario describes; with ``validate_only`` stop after parameter checks."""
    ctx = ScenarioContext(scenario)
    kind = scenario.kind
    bounds = scenario.bounds
    if kind == "classical-dp":
        coordinates = scenario.coordinates or ("x", "y")
        corrupted = str(scenario.param("corrupted", "false")).lower() in ("true", "yes", "1")
        if not validate_only:
            ctx.classical = (corrupted_dp_instance if corrupted else dp_instance)(coordinates, bounds)
        return ctx
    if kind == "classical-ug":
        g = _algebra(scenario)
        if not validate_only:
            ctx.classical = ug_instance(g, bounds)
        return ctx
    if kind == "dynamical-r":
        ctx.algebra = _algebra(scenario)
        ctx.r = _dynamical_r(scenario, ctx.algebra)
        return ctx

    if kind == "twist:moyal":
        pi = _matrix(scenario, "pi", antisymmetric=True)
        coordinates = _coordinates(scenario, len(pi))
        ctx.twist_factory = lambda order: moyal_twist(pi, order, coordinates)
    elif kind == "twist:commuting-frame":
        if not scenario.coordinates:
            raise _ParameterIssue("frame", "twist:commuting-frame needs [base] coordinates")
        ring = base_ring(scenario.coordinates)
        text = _required(scenario, "frame")
        try:
            rows = parse_matrix(text, lambda v: parse_coefficient(ring, v))
            frame = [vector_field(ring, row) for row in rows]
        except (QGroupoidError, ValueError, TypeError) as exc:
            raise _ParameterIssue("frame", f"frame: {exc}")
        c = _matrix(scenario, "c", antisymmetric=True)
        if len(c) != len(frame):
            raise _ParameterIssue("c", f"c must be {len(frame)}x{len(frame)} for {len(frame)} frame fields")
        ctx.twist_factory = lambda order: commuting_frame_twist(frame, c, order)
    elif kind == "twist:explicit":
        ring = base_ring(scenario.coordinates or ("x",))
        terms = _explicit_terms(scenario, ring)
        name = scenario.param("label", "explicit")
        ctx.twist_factory = lambda order: explicit_twist(ring, [t for t in terms if t[0] <= order], order, name)
    elif kind == "triangular:flat":
        lam = _matrix(scenario, "lambda", antisymmetric=True)
        coordinates = _coordinates(scenario, len(lam))
        A = tangent_algebroid(coordinates)
        ctx.algebroid_bivector = bivector_from_matrix(A, lam)
        ctx.twist_factory = lambda order: quantize_flat_triangular(A, ctx.algebroid_bivector, order)
    if not validate_only:
        ctx.twist(ctx.star_order)
        ctx.deformed = deformed_instance(ctx.twist(scenario.order), bounds)
    return ctx


# =========================
# Check registry
# =========================


Runner = Callable[[ScenarioContext], ResidualReport]


@dataclass(frozen=True)
class CheckSpec:
    name: str
    description: str
    runners: Dict[str, Runner]

    def applies_to(self, families: Sequence[str]) -> bool:
        return any(f in self.runners for f in families)

    def runner_for(self, families: Sequence[str]) -> Runner:
        for f in families:
            if f in self.runners:
                return self.runners[f]
        raise KeyError(self.name)


def _classical_limit(ctx: ScenarioContext) -> ResidualReport:
    limit = classical_limit_report(ctx.deformed)
    combined = combine_reports("classical-limit", limit.reports)
    if limit.bialgebroid is None:
        combined.record("assembly", "first-order data are not of bialgebroid type")
    return combined


def _round_trip(ctx: ScenarioContext) -> ResidualReport:
    result = round_trip_report(ctx.algebroid_bivector.algebroid, ctx.algebroid_bivector,
                               ctx.scenario.order, ctx.scenario.bounds)
    return combine_reports("round-trip", result.reports)


def _regularity(ctx: ScenarioContext) -> ResidualReport:
    rank = regularity_rank(ctx.algebroid_bivector)
    report = ResidualReport("regularity")
    report.record("constant rank", 0 if rank.regular else rank.summary())
    report.notes.append(rank.summary())
    return report


def _calibration(ctx: ScenarioContext) -> ResidualReport:
    result = calibrate_alt_convention()
    configured = AltConvention.from_config()
    report = ResidualReport("calibration")
    report.record("unique passing convention", 0 if result.unique else [c.label for c in result.passing])
    frozen = result.passing[0] if result.unique else None
    report.record(f"configured {configured.label}", 0 if frozen == configured else
                  f"calibrated {frozen.label if frozen else 'ambiguous'}")
    return report


def _lambda_square(ctx: ScenarioContext) -> ResidualReport:
    result = example41_lambda(ctx.algebra, ctx.r, require_preconditions=False)
    reports = {"lambda-square": result.reports["lambda-square"]}
    if "compatibility" in result.reports:
        reports["compatibility"] = result.reports["compatibility"]
    return combine_reports("lambda-square", reports)


def _star(ctx: ScenarioContext) -> StarAlgebra:
    return StarAlgebra(ctx.twist(ctx.star_order))


CHECKS: Dict[str, CheckSpec] = {spec.name: spec for spec in [
    CheckSpec("source-target", "alpha homomorphism, beta anti-homomorphism, commuting images", {
        "classical": lambda ctx: check_source_target(ctx.classical),
        "deformed": lambda ctx: check_deformed_source_target(ctx.deformed),
    }),
    CheckSpec("coassociativity", "(Delta x id) Delta = (id x Delta) Delta", {
        "classical": lambda ctx: check_coassociativity(ctx.classical),
        "deformed": lambda ctx: check_deformed_coassociativity(ctx.deformed),
    }),
    CheckSpec("compatibility", "Delta respects the bimodule structure and the product", {
        "classical": lambda ctx: check_compatibility(ctx.classical),
        "deformed": lambda ctx: check_deformed_compatibility(ctx.deformed),
    }),
    CheckSpec("multiplicativity", "Delta_hbar(x y) = Delta_hbar(x) Delta_hbar(y)", {
        "deformed": lambda ctx: check_deformed_multiplicativity(ctx.deformed),
    }),
    CheckSpec("counit", "counit identities and eps(1) = 1", {
        "classical": lambda ctx: check_counit(ctx.classical),
        "deformed": lambda ctx: check_deformed_counit(ctx.deformed),
    }),
    CheckSpec("cocommutativity", "flip o Delta = Delta", {
        "classical": lambda ctx: check_cocommutativity(ctx.classical),
    }),
    CheckSpec("twistor", "the twist cocycle identity through the star-check order", {
        "deformed": lambda ctx: check_twistor(ctx.twist(ctx.star_order)),
    }),
    CheckSpec("associativity", "(f * g) * h = f * (g * h) on monomials of degree <= 3", {
        "deformed": lambda ctx: check_associativity(_star(ctx)),
    }),
    CheckSpec("poisson", "the hbar^1 bracket is antisymmetric and satisfies Jacobi", {
        "deformed": lambda ctx: check_poisson(ctx.twist(ctx.scenario.order)),
    }),
    CheckSpec("unital", "phi_k(1, .) = phi_k(., 1) = 0 for k >= 1", {
        "deformed": lambda ctx: check_unital(ctx.twist(ctx.scenario.order)),
    }),
    CheckSpec("eq11", "phi . (beta(f) x 1 - 1 x alpha(f)) = 0 on base probes", {
        "deformed": lambda ctx: check_eq11(ctx.deformed.star, ctx.deformed.base_probes),
    }),
    CheckSpec("mod-hbar", "the deformed instance reduces to D(P) at hbar = 0", {
        "deformed": lambda ctx: check_mod_hbar(ctx.deformed),
    }),
    CheckSpec("classical-limit", "first-order data form a Lie bialgebroid with the hbar^1 bracket", {
        "deformed": _classical_limit,
    }),
    CheckSpec("round-trip", "quantize Lambda, take the classical limit, recover (Lambda, d)", {
        "triangular": _round_trip,
    }),
    CheckSpec("regularity", "Lambda has constant rank", {
        "triangular": _regularity,
    }),
    CheckSpec("cdybe", "classical dynamical Yang-Baxter residual", {
        "dynamical": lambda ctx: check_cdybe(ctx.algebra, ctx.r),
    }),
    CheckSpec("equivariance", "r has zero Cartan weight", {
        "dynamical": lambda ctx: check_equivariance(ctx.algebra, ctx.r),
    }),
    CheckSpec("symmetric-part", "r + r^21 is constant and ad-invariant", {
        "dynamical": lambda ctx: symmetric_part_check(ctx.r),
    }),
    CheckSpec("lambda-square", "[Lambda, Lambda] = 0 on T h* x g, then compatibility", {
        "dynamical": _lambda_square,
    }),
    CheckSpec("calibration", "exactly one Alt convention passes and it is the configured one", {
        "dynamical": _calibration,
    }),
]}


def list_checks() -> List[Tuple[str, str, str]]:
    return [(spec.name, ", ".join(spec.runners), spec.description) for spec in CHECKS.values()]


# =========================
# Runner
# =========================


class ScenarioRunner:
    """Runs a scenario's checks on a worker pool; outcomes keep scenario order."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or get_config_loader().max_workers()

    def _run_check(self, ctx: ScenarioContext, name: str) -> CheckOutcome:
        start = time.perf_counter()
        try:
            report = CHECKS[name].runner_for(KIND_FAMILIES[ctx.scenario.kind])(ctx)
            status = "pass" if report.passed else "fail"
            outcome = CheckOutcome(name, status, report.max_residual, detail="; ".join(report.notes))
        except Exception as exc:  # checker errors become failed checks
            logger.warning("%s: check %s raised %s", ctx.scenario.name, name, exc)
            outcome = CheckOutcome(name, "fail", f"{type(exc).__name__}: {exc}", detail=traceback.format_exc())
        outcome.millis = int((time.perf_counter() - start) * 1000)
        logger.info("%s: %s %s", ctx.scenario.name, name, outcome.status)
        return outcome

    def run(self, scenario: Scenario, checks: Optional[Sequence[str]] = None) -> ScenarioReport:
        names = list(checks) if checks else list(scenario.checks)
        report = ScenarioReport(scenario.name, scenario.expected)
        try:
            ctx = build_context(scenario)
        except Exception as exc:
            logger.warning("%s: instance construction failed: %s", scenario.name, exc)
            message = f"{type(exc).__name__}: {exc}"
            report.checks = [CheckOutcome(name, "fail", message) for name in names]
            return report
        workers = max(1, min(self.max_workers, len(names)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(self._run_check, ctx, name) for name in names]
            report.checks = [f.result() for f in futures]
        if not report.expectation_met:
            logger.warning("%s: verdict %s, expected %s", scenario.name, report.verdict, scenario.expected)
        return report


def run_scenario(scenario: Scenario, checks: Optional[Sequence[str]] = None, order: Optional[int] = None,
                 max_degree: Optional[int] = None, max_workers: Optional[int] = None) -> Tuple[ScenarioReport, int]:
    """Run with optional overrides; the exit status is 0 iff the verdict matches ``expected``."""
    updates: Dict[str, Any] = {}
    if order is not None:
        updates["order"] = order
    if max_degree is not None:
        updates["max_coefficient_degree"] = max_degree
    if updates:
        scenario = Scenario(**{**scenario.model_dump(), **updates})
    if checks:
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ScenarioParseError([(0, f"unknown check {unknown[0]!r}")])
        families = KIND_FAMILIES[scenario.kind]
        wrong = [c for c in checks if not CHECKS[c].applies_to(families)]
        if wrong:
            raise ScenarioParseError([(0, f"check {wrong[0]!r} does not apply to kind {scenario.kind!r}")])
    report = ScenarioRunner(max_workers).run(scenario, checks)
    return report, 0 if report.expectation_met else 1
