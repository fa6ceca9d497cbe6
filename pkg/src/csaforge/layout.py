# csaforge/layout.py
"""Architecture checks for the 2D nearest-neighbor model and its modules.

Violations are returned as data. A circuit passes :func:`verify_architecture`
when every intra-module two-qubit gate acts on Chebyshev-adjacent qubits, no
qubit has more than ``max_degree`` distinct two-qubit partners, every layer is
homogeneous and support-disjoint, and every Teleport crosses modules.
"""

from __future__ import annotations

from collections import Counter, defaultdict

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from .circuit import Circuit, GateKind, QubitRef
from .config import get_settings
from .hier import HierCircuit
from .resources import ResourceReport, count_resources


class ArchitectureRules(BaseModel):
    """Limits of the 2D lattice and of module size."""

    model_config = ConfigDict(frozen=True)

    max_degree: int = Field(default=6, ge=1)
    module_linear_bound: float = Field(
        default=40.0, gt=0, description="Qubits per module <= c * register length"
    )

    @classmethod
    def from_settings(cls) -> ArchitectureRules:
        settings = get_settings()
        return cls(
            max_degree=settings.max_degree,
            module_linear_bound=settings.module_linear_bound,
        )

    @staticmethod
    def adjacent(a: tuple[int, int], b: tuple[int, int]) -> bool:
        return max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


class Violation(BaseModel):
    rule: str
    layer: int | None = None
    gate: str | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f"layer {self.layer}" if self.layer is not None else "circuit"
        gate = f" {self.gate}" if self.gate else ""
        return f"[{self.rule}] {where}{gate}: {self.detail}"


class ViolationReport(BaseModel):
    """Outcome of a check: the violations found and, for modules, the metrics."""

    subject: str
    violations: list[Violation] = Field(default_factory=list)
    resources: ResourceReport | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, rule: str) -> int:
        return sum(1 for v in self.violations if v.rule == rule)

    def text(self) -> str:
        if self.ok:
            return f"{self.subject}: no violations"
        lines = [f"{self.subject}: {len(self.violations)} violation(s)"]
        lines.extend(f"  {v}" for v in self.violations)
        return "\n".join(lines)


def verify_architecture(c: Circuit, rules: ArchitectureRules | None = None) -> ViolationReport:
    """Check a flat circuit against the lattice rules.

    Args:
        c: The circuit, with coordinates assigned.
        rules: Limits to apply; defaults to the configured ones.

    Returns:
        ViolationReport: Empty when the circuit conforms.
    """
    rules = rules or ArchitectureRules.from_settings()
    report = ViolationReport(subject=c.name)
    partners: dict[QubitRef, set[QubitRef]] = defaultdict(set)

    for index, layer in enumerate(c.layers):
        seen: set[QubitRef] = set()
        kinds = set()
        for gate in layer.gates:
            for q in gate.qubits:
                if q in seen:
                    report.violations.append(
                        Violation(rule="concurrency", layer=index, gate=str(gate), detail=f"{q} reused")
                    )
                seen.add(q)
            kinds.add(gate.kind is GateKind.TELEPORT)
            if gate.kind is GateKind.TELEPORT:
                if gate.qubits[0].module == gate.qubits[1].module:
                    report.violations.append(
                        Violation(
                            rule="teleport",
                            layer=index,
                            gate=str(gate),
                            detail="teleport within one module",
                        )
                    )
                continue
            if not gate.is_two_qubit:
                continue
            a, b = gate.qubits
            if a.module != b.module:
                report.violations.append(
                    Violation(
                        rule="adjacency",
                        layer=index,
                        gate=str(gate),
                        detail="two-qubit gate across modules",
                    )
                )
                continue
            ca, cb = c.coord_of(a), c.coord_of(b)
            if not rules.adjacent(ca, cb):
                report.violations.append(
                    Violation(
                        rule="adjacency",
                        layer=index,
                        gate=str(gate),
                        detail=f"{ca} and {cb} are not neighbors",
                    )
                )
            partners[a].add(b)
            partners[b].add(a)
        if len(kinds) > 1:
            report.violations.append(
                Violation(rule="timestep_kind", layer=index, detail="teleport mixed with intra gates")
            )

    for qubit, others in partners.items():
        if len(others) > rules.max_degree:
            report.violations.append(
                Violation(
                    rule="degree",
                    gate=str(qubit),
                    detail=f"{len(others)} distinct partners > {rules.max_degree}",
                )
            )
    if not report.ok:
        logger.warning(f"{c.name}: {len(report.violations)} architecture violation(s)")
    return report


def _module_sizes(h: HierCircuit | Circuit) -> Counter:
    if isinstance(h, Circuit):
        return Counter(q.module for q in h.qubits)
    sizes: Counter = Counter()
    for path, block, _ in h.walk():
        if block.leaf is None:
            continue
        prefix = "/".join(path)
        for module, count in Counter(q.module for q in block.leaf.qubits).items():
            key = f"{prefix}/{module}" if prefix else module
            sizes[key] = max(sizes[key], count)
    return sizes


def verify_modules(
    h: HierCircuit | Circuit, n: int, rules: ArchitectureRules | None = None
) -> ViolationReport:
    """Check that modules stay linear in the register length.

    Every module must hold at most ``c * (n + 2)`` qubits (registers are
    ``n + 2`` bits wide), and the whole block must satisfy
    ``W <= c * (n + 2) * Wbar``.

    Returns:
        ViolationReport: Violations plus the block's six metrics.
    """
    rules = rules or ArchitectureRules.from_settings()
    bound = rules.module_linear_bound * (n + 2)
    resources = count_resources(h)
    report = ViolationReport(subject=h.name, resources=resources)
    for module, size in sorted(_module_sizes(h).items()):
        if size > bound:
            report.violations.append(
                Violation(
                    rule="module_size",
                    gate=module,
                    detail=f"{size} qubits > {bound:g}",
                )
            )
    if resources.width > bound * max(1, resources.module_width):
        report.violations.append(
            Violation(
                rule="width_ratio",
                detail=f"W={resources.width} > {bound:g} * Wbar={resources.module_width}",
            )
        )
    if not report.ok:
        logger.warning(f"{h.name}: {len(report.violations)} module violation(s)")
    return report
