"""
Shared Data Classes: Lie Algebra Data, Residual Reports and Scenario Reports
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import QQ

from ..models.algebra_core import is_zero_value, residual_size, to_rational


# =========================
# Lie algebra data
# =========================


@dataclass
class LieAlgebraData:
    """Structure constants f^c_ab of g in a fixed ordered basis.

    ``structure_constants[a, b, c]`` holds f^c_ab, i.e. [e_a, e_b] = sum_c f^c_ab e_c.
    """
    name: str
    basis: Tuple[str, ...]
    structure_constants: np.ndarray
    cartan_indices: Tuple[int, ...] = ()
    simple: Optional[bool] = None  # recorded, never certified

    def __post_init__(self):
        m = len(self.basis)
        if self.structure_constants.shape != (m, m, m):
            raise ValueError(f"structure constants must have shape {(m, m, m)}")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        try:
            return self.basis.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a basis element of {self.name}")

    @classmethod
    def from_brackets(cls, name: str, basis: Sequence[str],
                      brackets: Dict[Tuple[str, str], Dict[str, Any]],
                      cartan: Sequence[str] = (), simple: Optional[bool] = None) -> "LieAlgebraData":
        """Build from the brackets [a, b] for listed pairs; [b, a] is filled by antisymmetry."""
        basis = tuple(basis)
        m = len(basis)
        f = np.empty((m, m, m), dtype=object)
        f.fill(QQ.zero)
        for (a, b), values in brackets.items():
            ia, ib = basis.index(a), basis.index(b)
            for c, value in values.items():
                q = to_rational(value)
                f[ia, ib, basis.index(c)] = q
                f[ib, ia, basis.index(c)] = -q
        return cls(name, basis, f, tuple(basis.index(h) for h in cartan), simple)

    def bracket(self, u: Sequence[Any], v: Sequence[Any]) -> List[Any]:
        """Bracket of two coefficient vectors over the basis."""
        out = [QQ.zero] * self.dim
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if not vb:
                    continue
                for c in range(self.dim):
                    coeff = self.structure_constants[a, b, c]
                    if coeff:
                        out[c] = out[c] + ua * vb * coeff
        return out

    def antisymmetry_residual(self) -> List[Tuple[int, int, int]]:
        f = self.structure_constants
        sym = f + np.transpose(f, (1, 0, 2))
        return [tuple(idx) for idx in np.argwhere(np.vectorize(bool)(sym))] if sym.size else []

    def jacobi_residual(self) -> Dict[Tuple[int, int, int], List[Any]]:
        """Nonzero components of [[a,b],c] + [[b,c],a] + [[c,a],b]."""
        f = self.structure_constants
        if not f.size:
            return {}
        t = np.tensordot(f, f, axes=([2], [0]))  # t[a,b,c,x] = sum_y f^y_ab f^x_yc
        cyclic = t + np.transpose(t, (2, 0, 1, 3)) + np.transpose(t, (1, 2, 0, 3))
        found = {}
        m = self.dim
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    component = list(cyclic[a, b, c])
                    if any(component):
                        found[(a, b, c)] = component
        return found

    def cartan_residual(self) -> List[Tuple[int, int]]:
        """Pairs of Cartan indices whose bracket does not vanish."""
        bad = []
        for h in self.cartan_indices:
            for k in self.cartan_indices:
                if any(self.structure_constants[h, k, :]):
                    bad.append((h, k))
        return bad

    def validate(self) -> Dict[str, list]:
        issues: Dict[str, list] = {}
        anti = self.antisymmetry_residual()
        if anti:
            issues.setdefault('antisymmetry', []).append(f'f^c_ab + f^c_ba nonzero at {anti[:3]}')
        jac = self.jacobi_residual()
        if jac:
            issues.setdefault('jacobi', []).append(f'Jacobi fails on {sorted(jac)[:3]}')
        cartan = self.cartan_residual()
        if cartan:
            issues.setdefault('cartan', []).append(f'Cartan subalgebra not abelian: {cartan}')
        return issues


class StandardAlgebras:
    """Default Lie algebras used by fixtures and scenarios."""

    @staticmethod
    def sl2() -> LieAlgebraData:
        return LieAlgebraData.from_brackets(
            "sl2", ("e", "f", "h"),
            {("e", "f"): {"h": 1}, ("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}},
            cartan=("h",), simple=True)

    @staticmethod
    def abelian(dim: int, cartan_dim: Optional[int] = None) -> LieAlgebraData:
        basis = tuple(f"h{k + 1}" for k in range(dim))
        cartan_dim = dim if cartan_dim is None else cartan_dim
        return LieAlgebraData.from_brackets(f"abelian{dim}", basis, {}, cartan=basis[:cartan_dim],
                                            simple=False)

    @staticmethod
    def by_name(name: str) -> LieAlgebraData:
        name = name.strip().lower()
        if name == "sl2":
            return StandardAlgebras.sl2()
        if name.startswith("abelian"):
            suffix = name[len("abelian"):].lstrip(":")
            return StandardAlgebras.abelian(int(suffix) if suffix else 1)
        raise KeyError(f"unknown Lie algebra {name!r}")


# =========================
# Residual reports
# =========================


@dataclass
class ResidualReport:
    """Exact residuals of one identity over a probe set."""
    check: str
    entries: List[Tuple[str, Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def record(self, label: str, residual: Any):
        self.entries.append((label, residual))

    def extend(self, other: "ResidualReport"):
        self.entries.extend(other.entries)
        self.notes.extend(other.notes)

    @property
    def failures(self) -> List[Tuple[str, Any]]:
        return [(label, r) for label, r in self.entries if not is_zero_value(r)]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> str:
        """Largest residual by term count, first one in probe order on ties."""
        worst = None
        worst_size = 0
        for label, residual in self.failures:
            size = residual_size(residual)
            if worst is None or size > worst_size:
                worst, worst_size = (label, residual), size
        if worst is None:
            return "0"
        return f"{worst[0]}: {worst[1]}"

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.check}: {status} ({len(self.entries)} probes, max residual {self.max_residual})"


def combine_reports(name: str, reports: Dict[str, ResidualReport]) -> ResidualReport:
    combined = ResidualReport(name)
    for key, report in reports.items():
        for label, residual in report.entries:
            combined.record(f"{key}[{label}]", residual)
        combined.notes.extend(report.notes)
    return combined


# =========================
# Scenario reports
# =========================


@dataclass
class CheckOutcome:
    name: str
    status: str  # pass | fail | error
    max_residual: str
    millis: int = 0
    detail: str = ""


@dataclass
class ScenarioReport:
    scenario: str
    expected: str
    checks: List[CheckOutcome] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.checks and all(c.status == "pass" for c in self.checks) else "fail"

    @property
    def expectation_met(self) -> bool:
        return self.verdict == self.expected

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        checks = []
        for outcome in self.checks:
            entry = {'name': outcome.name, 'status': outcome.status, 'max_residual': outcome.max_residual}
            if include_timings:
                entry['millis'] = outcome.millis
            checks.append(entry)
        return {'scenario': self.scenario, 'checks': checks, 'verdict': self.verdict}

    def canonical(self) -> str:
        """Machine report without timings: byte-identical across runs."""
        return json.dumps(self.to_dict(include_timings=False), indent=2, ensure_ascii=False)

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"Scenario: {self.scenario}", "=" * 50]
        for outcome in self.checks:
            mark = "✅" if outcome.status == "pass" else "❌"
            lines.append(f"{mark} {outcome.name}: {outcome.status} ({outcome.millis} ms)")
            if outcome.status != "pass":
                lines.append(f"   max residual: {outcome.max_residual}")
        met = "met" if self.expectation_met else "VIOLATED"
        lines.append(f"Verdict: {self.verdict} (expected {self.expected}, {met})")
        return "\n".join(lines)

    def to_dataframe(self) -> pd.DataFrame:
        """Convert the report to a pandas DataFrame, one row per check."""
        rows = []
        for order, outcome in enumerate(self.checks):
            rows.append({
                'Scenario': self.scenario,
                'Order': order,
                'Check': outcome.name,
                'Status': outcome.status,
                'Max_Residual': outcome.max_residual,
                'Millis': outcome.millis,
            })
        return pd.DataFrame(rows, columns=['Scenario', 'Order', 'Check', 'Status', 'Max_Residual', 'Millis'])
