# csaforge/hier.py
"""Hierarchical circuits: named blocks composed in stages.

A :class:`HierCircuit` is either a leaf wrapping a concrete
:class:`~csaforge.circuit.Circuit`, or a node made of sequential
:class:`Stage` objects. A stage runs its placed child blocks side by side,
after teleporting qubits along its :class:`Link` edges. A :func:`symbolic`
block stands in for a subtree by its resource report alone.

Resources roll up without flattening:

* depth adds the stage teleport timesteps and the deepest child of each stage;
* size adds every child copy and every teleported qubit;
* width sums one footprint per placement label. Placements that share a
  label reuse the same qubits, which is how uncompute stages and sequential
  reuse of freed ancillae are expressed;
* module depth and module size add the node's own teleports to the most
  expensive child, mirroring how the closed-form estimates compose;
* module width counts modules per label, an ``opaque`` child counting as one.

For instances small enough, :func:`flatten` produces the equivalent gate-level
circuit, with the same D, S and W.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from loguru import logger

from .circuit import Circuit, Gate, GateKind, Layer, LayerKind, QubitRef
from .exceptions import CircuitError
from .resources import ResourceReport, count_resources
from .types import QubitKey


@dataclass(frozen=True, slots=True)
class PortRef:
    """A qubit of a leaf below a node: instance labels down the tree, then the key."""

    path: tuple[str, ...]
    qubit: QubitKey


@dataclass(frozen=True, slots=True)
class Link:
    """One qubit teleported from ``src`` to ``dst`` between modules."""

    src: PortRef
    dst: PortRef


@dataclass(frozen=True)
class Placement:
    """``count`` copies of ``block`` in one stage under namespace ``label``."""

    block: HierCircuit
    count: int = 1
    label: str | None = None

    def __post_init__(self):
        if self.count < 1:
            raise CircuitError("placement count must be positive")
        if self.label is None:
            object.__setattr__(self, "label", self.block.name)

    def instance_labels(self) -> list[str]:
        if self.count == 1:
            return [self.label]
        return [f"{self.label}#{i}" for i in range(self.count)]


@dataclass(frozen=True)
class Stage:
    """One step of a node: inbound teleports, then the placed blocks in parallel.

    ``teleports`` and ``teleport_layers`` describe module traffic that is
    accounted for without explicit links (large trees); such stages cannot be
    flattened.
    """

    placements: tuple[Placement, ...] = ()
    links: tuple[Link, ...] = ()
    teleports: int = 0
    teleport_layers: int = 0

    @property
    def is_empty(self) -> bool:
        return not (self.placements or self.links or self.teleports)

    @cached_property
    def link_layers(self) -> int:
        return len(pack_links(self.links))


def pack_links(links: Sequence[Link]) -> list[list[Link]]:
    """Group teleports into support-disjoint timesteps, as early as possible."""
    ready: dict[tuple[tuple[str, ...], QubitKey], int] = {}
    layers: list[list[Link]] = []
    for link in links:
        ends = ((link.src.path, link.src.qubit), (link.dst.path, link.dst.qubit))
        layer = max(ready.get(end, 0) for end in ends)
        if layer == len(layers):
            layers.append([])
        layers[layer].append(link)
        for end in ends:
            ready[end] = layer + 1
    return layers


@dataclass(frozen=True, eq=False)
class HierCircuit:
    """A named block: a leaf circuit or a sequence of stages.

    Attributes:
        name: Block name.
        leaf: The concrete circuit for a leaf block.
        stages: Sequential stages for a composite block.
        kind: Key of the classical semantic used by ``run_semantic``.
        params: Parameters the semantic needs (modulus, schedules, ...).
        mirrored: True for the uncompute image of a block.
        opaque: Count this block as one module in its parents' module width.
        cost: Resources of a symbolic block that carries no circuit.
    """

    name: str
    leaf: Circuit | None = None
    stages: tuple[Stage, ...] = ()
    kind: str | None = None
    params: Mapping[str, Any] = field(default_factory=dict)
    mirrored: bool = False
    opaque: bool = False
    cost: ResourceReport | None = None

    def __post_init__(self):
        bodies = (self.leaf is not None) + bool(self.stages) + (self.cost is not None)
        if bodies == 0:
            raise CircuitError(f"block {self.name!r} has neither a leaf nor stages")
        if bodies > 1:
            raise CircuitError(
                f"block {self.name!r} needs exactly one of a leaf, stages or a cost"
            )
        for index, stage in enumerate(self.stages):
            if stage.is_empty:
                raise CircuitError(
                    f"stage {index} of {self.name!r} is empty",
                    context={"block": self.name, "stage": index},
                )

    def children(self) -> Iterator[Placement]:
        for stage in self.stages:
            yield from stage.placements

    def mirror(self) -> HierCircuit:
        """The uncompute image: same footprint and resources, run in reverse."""
        return HierCircuit(
            name=f"{self.name}.uncompute" if not self.mirrored else self.name[: -len(".uncompute")],
            leaf=self.leaf,
            stages=self.stages,
            kind=None,
            params=self.params,
            mirrored=not self.mirrored,
            opaque=self.opaque,
            cost=self.cost,
        )

    def as_opaque(self) -> HierCircuit:
        return HierCircuit(
            name=self.name,
            leaf=self.leaf,
            stages=self.stages,
            kind=self.kind,
            params=self.params,
            mirrored=self.mirrored,
            opaque=True,
            cost=self.cost,
        )

    @cached_property
    def _rollup(self) -> ResourceReport:
        if self.cost is not None:
            return self.cost
        if self.leaf is not None:
            return count_resources(self.leaf)
        depth = size = own_layers = own_teleports = 0
        widths: dict[str, int] = {}
        module_widths: dict[str, int] = {}
        deepest_module = costliest_module = 0
        for stage in self.stages:
            layers = stage.teleport_layers + stage.link_layers
            teleports = stage.teleports + len(stage.links)
            own_layers += layers
            own_teleports += teleports
            stage_depth = 0
            size += teleports
            for placement in stage.placements:
                child = placement.block.rollup()
                stage_depth = max(stage_depth, child.depth)
                size += placement.count * child.size
                child_modules = 1 if placement.block.opaque else child.module_width
                for label in placement.instance_labels():
                    widths[label] = max(widths.get(label, 0), child.width)
                    module_widths[label] = max(module_widths.get(label, 0), child_modules)
                deepest_module = max(deepest_module, child.module_depth)
                costliest_module = max(costliest_module, child.module_size)
            depth += layers + stage_depth
        return ResourceReport(
            depth=depth,
            size=size,
            width=sum(widths.values()),
            module_depth=own_layers + deepest_module,
            module_size=own_teleports + costliest_module,
            module_width=sum(module_widths.values()),
        )

    def rollup(self) -> ResourceReport:
        """Resources of this block computed from its children's reports."""
        return self._rollup

    def resolve(self, path: Sequence[str]) -> HierCircuit:
        """The block reached by following instance labels from this node."""
        node = self
        for label in path:
            for placement in node.children():
                if label in placement.instance_labels():
                    node = placement.block
                    break
            else:
                raise CircuitError(
                    f"no instance {label!r} below {node.name!r}",
                    context={"path": list(path)},
                )
        return node

    def walk(self, prefix: tuple[str, ...] = ()) -> Iterator[tuple[tuple[str, ...], HierCircuit, int]]:
        """Yield ``(path, block, multiplicity)`` for every placement, depth first."""
        yield prefix, self, 1
        for placement in self.children():
            path = (*prefix, placement.label)
            for sub_path, block, mult in placement.block.walk(path):
                yield sub_path, block, mult * (placement.count if sub_path == path else 1)


def compose(
    stages: Sequence[Sequence[tuple[HierCircuit, int]]], name: str = "composite"
) -> HierCircuit:
    """Compose blocks stage by stage.

    Each stage is a list of ``(block, multiplicity)``. The i-th entry of a
    stage is placed under label ``"<block name>.<i>"``, so a block repeated at
    the same position in consecutive stages reuses its qubits.

    Examples::

        compose([[(toffoli, 1)], [(toffoli, 1)]])  # D=16, S=30, W=3
        compose([[(csa, 4)]])  # D=33, S=220, W=20
    """
    built = []
    for stage in stages:
        if not stage:
            raise CircuitError("every stage needs at least one block")
        built.append(
            Stage(
                placements=tuple(
                    Placement(block, count, f"{block.name}.{i}")
                    for i, (block, count) in enumerate(stage)
                )
            )
        )
    return HierCircuit(name=name, stages=tuple(built))


def leaf(circuit: Circuit, kind: str | None = None, **params: Any) -> HierCircuit:
    return HierCircuit(name=circuit.name, leaf=circuit, kind=kind, params=params)


def symbolic(
    name: str, cost: ResourceReport, kind: str | None = None, **params: Any
) -> HierCircuit:
    """A block known only by its resources, for trees too large to build gate by gate."""
    return HierCircuit(name=name, cost=cost, kind=kind, params=params)


# --- Flattening ---


def _join(ns: str, part: str) -> str:
    return part if not ns else f"{ns}/{part}"


class _FlattenContext:
    def __init__(self):
        self.qubits: dict[QubitKey, QubitRef] = {}
        self.record = 0
        self.record_base: dict[str, int] = {}

    def ref(self, ns: str, qubit: QubitRef) -> QubitRef:
        key = (_join(ns, qubit.module), qubit.index)
        existing = self.qubits.get(key)
        if existing is None:
            existing = QubitRef(key[0], key[1], qubit.coord)
            self.qubits[key] = existing
        return existing


def _flatten_leaf(
    circuit: Circuit, ns: str, ctx: _FlattenContext, *, mirrored: bool
) -> list[tuple[LayerKind, list[Gate]]]:
    own_base = ctx.record
    ctx.record += circuit.record_size
    if mirrored:
        cond_base = ctx.record_base.get(ns, own_base)
        layers = reversed(circuit.layers)
    else:
        ctx.record_base[ns] = own_base
        cond_base = own_base
        layers = iter(circuit.layers)
    out = []
    for layer in layers:
        gates = []
        for gate in layer.gates:
            kind = gate.kind.adjoint() if mirrored else gate.kind
            slot = None if gate.slot is None else gate.slot + own_base
            gates.append(
                Gate(
                    kind,
                    tuple(ctx.ref(ns, q) for q in gate.qubits),
                    gate.cond.shifted(cond_base),
                    slot,
                )
            )
        out.append((layer.kind, gates))
    return out


def _merge_parallel(
    parts: Sequence[list[tuple[LayerKind, list[Gate]]]], name: str
) -> list[tuple[LayerKind, list[Gate]]]:
    merged: list[tuple[LayerKind, list[Gate]]] = []
    for part in parts:
        for index, (kind, gates) in enumerate(part):
            if index == len(merged):
                merged.append((kind, list(gates)))
            elif merged[index][0] is kind:
                merged[index][1].extend(gates)
            else:
                raise CircuitError(
                    f"parallel children of {name!r} disagree on the kind of a timestep",
                    context={"timestep": index},
                )
    return merged


def _link_layers(
    node: HierCircuit, links: Sequence[Link], ns: str, ctx: _FlattenContext, *, reverse: bool
) -> list[tuple[LayerKind, list[Gate]]]:
    def port(ref: PortRef) -> QubitRef:
        target = node.resolve(ref.path).leaf
        if target is None:
            raise CircuitError("links must end on leaf qubits", context={"path": ref.path})
        qubit = target.qubit_table.get(ref.qubit)
        if qubit is None:
            raise CircuitError(
                "link endpoint is not a qubit of its leaf",
                context={"path": ref.path, "qubit": ref.qubit},
            )
        return ctx.ref(_join(ns, "/".join(ref.path)), qubit)

    out = []
    for group in pack_links(links):
        gates = []
        for link in group:
            src, dst = port(link.src), port(link.dst)
            if reverse:
                src, dst = dst, src
            gates.append(Gate(GateKind.TELEPORT, (src, dst)))
        out.append((LayerKind.TELEPORT, gates))
    return out


def _flatten_node(
    node: HierCircuit, ns: str, ctx: _FlattenContext, *, mirrored: bool
) -> list[tuple[LayerKind, list[Gate]]]:
    if node.cost is not None:
        raise CircuitError(f"block {node.name!r} is symbolic and cannot be flattened")
    if node.leaf is not None:
        return _flatten_leaf(node.leaf, ns, ctx, mirrored=mirrored)
    out: list[tuple[LayerKind, list[Gate]]] = []
    stages = reversed(node.stages) if mirrored else node.stages
    for stage in stages:
        if stage.teleports or stage.teleport_layers:
            raise CircuitError(
                f"stage of {node.name!r} has symbolic teleports and cannot be flattened"
            )
        parts = []
        for placement in stage.placements:
            child_mirrored = mirrored != placement.block.mirrored
            for label in placement.instance_labels():
                parts.append(
                    _flatten_node(
                        placement.block, _join(ns, label), ctx, mirrored=child_mirrored
                    )
                )
        body = _merge_parallel(parts, node.name)
        links = _link_layers(node, stage.links, ns, ctx, reverse=mirrored)
        out.extend([*body, *links] if mirrored else [*links, *body])
    return out


def flatten(h: HierCircuit) -> Circuit:
    """Expand a hierarchy into one gate-level circuit.

    Module ids become ``"<instance path>/<module>"``. Mirrored leaves run
    their layers backwards with T and T† exchanged; their classical
    conditions read the record bits of the forward pass they undo.

    Raises:
        CircuitError: A stage carries symbolic teleports, or parallel
            children disagree on timestep kinds.
    """
    ctx = _FlattenContext()
    layers = _flatten_node(h, "", ctx, mirrored=h.mirrored)
    seen: dict[QubitRef, None] = {}
    for _, gates in layers:
        for gate in gates:
            for qubit in gate.qubits:
                seen.setdefault(qubit)
    circuit = Circuit(
        name=h.name,
        layers=tuple(Layer(tuple(gates), kind) for kind, gates in layers),
        qubits=tuple(seen),
        record_size=ctx.record,
        registers=h.leaf.registers if h.leaf is not None else {},
    )
    logger.debug(
        f"flattened {h.name}: depth={circuit.depth} size={circuit.size} width={circuit.width}"
    )
    return circuit
