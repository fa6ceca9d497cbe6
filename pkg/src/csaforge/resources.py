# csaforge/resources.py
"""Resource accounting: the six circuit and module metrics.

Circuit depth, size and width (D, S, W) count timesteps, gates (measurements
included) and touched qubits. Module depth, size and width (D̄, S̄, W̄) count
teleport timesteps, teleported qubits and modules touched.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

from .circuit import Circuit, GateKind, LayerKind

if TYPE_CHECKING:
    from .hier import HierCircuit

METRICS = ("D", "S", "W", "Dbar", "Sbar", "Wbar")


class ResourceReport(BaseModel):
    """Counted resources of a circuit or hierarchical block."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    depth: int = Field(default=0, ge=0, alias="D", description="Circuit depth")
    size: int = Field(default=0, ge=0, alias="S", description="Circuit size")
    width: int = Field(default=0, ge=0, alias="W", description="Circuit width")
    module_depth: int = Field(
        default=0, ge=0, alias="Dbar", description="Consecutive teleport timesteps"
    )
    module_size: int = Field(
        default=0, ge=0, alias="Sbar", description="Qubits teleported between modules"
    )
    module_width: int = Field(
        default=0, ge=0, alias="Wbar", description="Modules touched"
    )

    def metrics(self) -> dict[str, int]:
        """The six metrics keyed by their short names (D, S, W, Dbar, Sbar, Wbar)."""
        return self.model_dump(by_alias=True)

    def size_bounds_hold(self) -> bool:
        """``D <= S <= D * W``, the relation every concrete circuit satisfies."""
        return self.depth <= self.size <= self.depth * self.width

    def then(self, other: ResourceReport) -> ResourceReport:
        """Sequential composition where the second block reuses freed qubits."""
        return ResourceReport(
            depth=self.depth + other.depth,
            size=self.size + other.size,
            width=max(self.width, other.width),
            module_depth=self.module_depth + other.module_depth,
            module_size=self.module_size + other.module_size,
            module_width=max(self.module_width, other.module_width),
        )

    def scaled_by(self, factor: int) -> ResourceReport:
        """``factor`` copies side by side."""
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return ResourceReport(
            depth=self.depth if factor else 0,
            size=self.size * factor,
            width=self.width * factor,
            module_depth=self.module_depth if factor else 0,
            module_size=self.module_size * factor,
            module_width=self.module_width * factor,
        )


def _count_circuit(circuit: Circuit) -> ResourceReport:
    teleport_layers = 0
    teleports = 0
    for layer in circuit.layers:
        if layer.kind is LayerKind.TELEPORT:
            teleport_layers += 1
            teleports += sum(1 for g in layer.gates if g.kind is GateKind.TELEPORT)
    return ResourceReport(
        depth=circuit.depth,
        size=circuit.size,
        width=circuit.width,
        module_depth=teleport_layers,
        module_size=teleports,
        module_width=len(circuit.modules),
    )


def count_resources(c: Circuit | HierCircuit) -> ResourceReport:
    """Count all six metrics of a flat circuit or roll up a hierarchy.

    Args:
        c: A :class:`~csaforge.circuit.Circuit` or a
            :class:`~csaforge.hier.HierCircuit`.

    Returns:
        ResourceReport: The counted resources.
    """
    if isinstance(c, Circuit):
        return _count_circuit(c)
    return c.rollup()
