# csaforge/circuit.py
"""Gate-level circuit model for the 2D nearest-neighbor architecture.

A :class:`Circuit` is an immutable sequence of :class:`Layer` objects. Every
layer is one timestep: its gates act on pairwise disjoint qubits and it is
either an intra-module layer (gates from the universal set) or a teleport
layer (only ``Teleport`` gates between different modules).

Circuits are normally produced by :class:`CircuitBuilder`, which places each
gate in the earliest timestep allowed by its qubits and by the measurements
its classical condition reads.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property

from loguru import logger

from .exceptions import (
    CircuitError,
    ConcurrencyViolation,
    GateArityError,
    TimestepKindViolation,
)
from .types import Coord, QubitKey


class GateKind(StrEnum):
    """The universal gate set plus the inter-module Teleport operation."""

    X = "X"
    Z = "Z"
    H = "H"
    T = "T"
    TDG = "Tdg"
    CNOT = "CNOT"
    MEASURE = "MeasureZ"
    TELEPORT = "Teleport"

    @property
    def arity(self) -> int:
        if self in (GateKind.CNOT, GateKind.TELEPORT):
            return 2
        return 1

    @property
    def is_pauli(self) -> bool:
        return self in (GateKind.X, GateKind.Z)

    def adjoint(self) -> GateKind:
        return _ADJOINT.get(self, self)


_ADJOINT = {GateKind.T: GateKind.TDG, GateKind.TDG: GateKind.T}


class LayerKind(StrEnum):
    INTRA = "intra"
    TELEPORT = "teleport"


@dataclass(frozen=True, slots=True)
class ParityExpr:
    """Classical condition: XOR of measurement-record bits plus a constant.

    ``ParityExpr()`` (no bits, constant 1) is the unconditional case.
    """

    bits: frozenset[int] = frozenset()
    const: int = 1

    @classmethod
    def on(cls, *bits: int) -> ParityExpr:
        """Condition that fires when the XOR of ``bits`` is 1."""
        expr = cls(frozenset(), 0)
        for bit in bits:
            expr = expr ^ cls(frozenset({bit}), 0)
        return expr

    def __xor__(self, other: ParityExpr) -> ParityExpr:
        return ParityExpr(self.bits ^ other.bits, self.const ^ other.const)

    def evaluate(self, record: Sequence[int]) -> int:
        value = self.const
        for bit in self.bits:
            value ^= record[bit]
        return value

    def shifted(self, offset: int) -> ParityExpr:
        if not offset:
            return self
        return ParityExpr(frozenset(b + offset for b in self.bits), self.const)

    @property
    def is_unconditional(self) -> bool:
        return not self.bits and self.const == 1

    @property
    def is_never(self) -> bool:
        return not self.bits and self.const == 0


ALWAYS = ParityExpr()
NEVER = ParityExpr(frozenset(), 0)


@dataclass(frozen=True, slots=True)
class QubitRef:
    """A qubit identified by (module, local index), placed at ``coord``.

    Equality and hashing ignore the coordinate; the owning circuit's qubit
    table is authoritative for positions.
    """

    module: str
    index: int
    coord: Coord = field(default=(0, 0), compare=False)

    @property
    def key(self) -> QubitKey:
        return (self.module, self.index)

    def __str__(self) -> str:
        return f"{self.module}[{self.index}]"


@dataclass(frozen=True, slots=True)
class Gate:
    kind: GateKind
    qubits: tuple[QubitRef, ...]
    cond: ParityExpr = ALWAYS
    slot: int | None = None

    def __post_init__(self):
        if len(self.qubits) != self.kind.arity:
            raise GateArityError(
                f"{self.kind} acts on {self.kind.arity} qubit(s)",
                context={"qubits": [str(q) for q in self.qubits]},
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise GateArityError(
                f"{self.kind} repeats a qubit",
                context={"qubits": [str(q) for q in self.qubits]},
            )
        if self.slot is not None and self.kind is not GateKind.MEASURE:
            raise GateArityError(f"{self.kind} cannot carry a record slot")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def __str__(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        text = f"{self.kind}({args})"
        if not self.cond.is_unconditional:
            text += f"^{{{sorted(self.cond.bits)}+{self.cond.const}}}"
        if self.slot is not None:
            text += f"->c{self.slot}"
        return text


@dataclass(frozen=True, slots=True)
class Layer:
    gates: tuple[Gate, ...]
    kind: LayerKind = LayerKind.INTRA

    def support(self) -> set[QubitRef]:
        return {q for gate in self.gates for q in gate.qubits}


def validate_layer(gates: Iterable[Gate]) -> LayerKind:
    """Check support-disjointness and timestep homogeneity of one layer.

    Returns:
        The kind of the layer.

    Raises:
        ConcurrencyViolation: Two gates share a qubit.
        TimestepKindViolation: Teleport gates are mixed with other gates, or a
            Teleport connects two qubits of the same module.
    """
    seen: set[QubitRef] = set()
    kinds: set[LayerKind] = set()
    for gate in gates:
        for qubit in gate.qubits:
            if qubit in seen:
                raise ConcurrencyViolation(
                    "gates of one layer share a qubit", context={"qubit": str(qubit)}
                )
            seen.add(qubit)
        if gate.kind is GateKind.TELEPORT:
            kinds.add(LayerKind.TELEPORT)
            if gate.qubits[0].module == gate.qubits[1].module:
                raise TimestepKindViolation(
                    "Teleport must connect two different modules",
                    context={"gate": str(gate)},
                )
        else:
            kinds.add(LayerKind.INTRA)
    if len(kinds) > 1:
        raise TimestepKindViolation("layer mixes Teleport and intra-module gates")
    return kinds.pop() if kinds else LayerKind.INTRA


@dataclass(frozen=True)
class Circuit:
    """An immutable, layered, layout-annotated circuit.

    Attributes:
        name: Block name used in reports and hierarchical composition.
        layers: Timesteps in order.
        qubits: Every qubit touched by some gate, in first-use order.
        record_size: Number of classical measurement-record bits.
        registers: Named bit-vectors of qubits; position ``i`` holds the
            qubit of significance ``i`` (``None`` where the bit is absent).
    """

    name: str
    layers: tuple[Layer, ...] = ()
    qubits: tuple[QubitRef, ...] = ()
    record_size: int = 0
    registers: Mapping[str, tuple[QubitRef | None, ...]] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def size(self) -> int:
        return sum(len(layer.gates) for layer in self.layers)

    @property
    def width(self) -> int:
        return len(self.qubits)

    @cached_property
    def qubit_table(self) -> dict[QubitKey, QubitRef]:
        return {q.key: q for q in self.qubits}

    @cached_property
    def modules(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(q.module for q in self.qubits))

    def coord_of(self, qubit: QubitRef) -> Coord:
        return self.qubit_table.get(qubit.key, qubit).coord

    def gates(self) -> Iterator[tuple[int, Gate]]:
        """Yield ``(layer index, gate)`` for every gate in time order."""
        for index, layer in enumerate(self.layers):
            for gate in layer.gates:
                yield index, gate

    def extent(self, module: str) -> Coord:
        """Bounding-box size ``(w, h)`` of a module's qubit coordinates."""
        coords = [q.coord for q in self.qubits if q.module == module]
        if not coords:
            return (0, 0)
        xs = [c[0] for c in coords]
        ys = [c[1] for c in coords]
        return (max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)

    def register(self, name: str) -> tuple[QubitRef | None, ...]:
        try:
            return self.registers[name]
        except KeyError as exc:
            raise CircuitError(
                f"circuit {self.name!r} has no register {name!r}",
                context={"registers": sorted(self.registers)},
            ) from exc

    def relocated(self, qubit: QubitRef, coord: Coord) -> Circuit:
        """Return a copy with ``qubit`` moved to ``coord`` everywhere."""
        moved = QubitRef(qubit.module, qubit.index, coord)

        def swap(q: QubitRef | None) -> QubitRef | None:
            return moved if q == qubit else q

        layers = tuple(
            Layer(
                tuple(
                    Gate(g.kind, tuple(swap(q) for q in g.qubits), g.cond, g.slot)
                    for g in layer.gates
                ),
                layer.kind,
            )
            for layer in self.layers
        )
        return Circuit(
            name=self.name,
            layers=layers,
            qubits=tuple(swap(q) for q in self.qubits),
            record_size=self.record_size,
            registers={k: tuple(swap(q) for q in v) for k, v in self.registers.items()},
        )


def append_layer(circuit: Circuit, gates: Iterable[Gate]) -> Circuit:
    """Append one timestep to ``circuit``.

    Measurements without a record slot get the next free slots in order.

    Raises:
        ConcurrencyViolation: Overlapping gate supports.
        TimestepKindViolation: Teleport mixed with intra-module gates.
    """
    gates = list(gates)
    kind = validate_layer(gates)
    record = circuit.record_size
    placed = []
    for gate in gates:
        for bit in gate.cond.bits:
            if bit >= circuit.record_size:
                raise CircuitError(
                    "condition reads a bit measured in the same or a later layer",
                    context={"gate": str(gate), "bit": bit},
                )
        if gate.kind is GateKind.MEASURE and gate.slot is None:
            gate = Gate(gate.kind, gate.qubits, gate.cond, record)
            record += 1
        elif gate.kind is GateKind.MEASURE:
            record = max(record, gate.slot + 1)
        placed.append(gate)
    known = set(circuit.qubits)
    new_qubits = list(circuit.qubits)
    for gate in placed:
        for qubit in gate.qubits:
            if qubit not in known:
                known.add(qubit)
                new_qubits.append(qubit)
    return Circuit(
        name=circuit.name,
        layers=(*circuit.layers, Layer(tuple(placed), kind)),
        qubits=tuple(new_qubits),
        record_size=record,
        registers=circuit.registers,
    )


class CircuitBuilder:
    """Incremental, as-soon-as-possible circuit construction.

    Each gate lands in the earliest layer after the last use of its qubits,
    after the measurements its condition reads, after the last
    :meth:`barrier`, and in a layer of the matching kind.

    Usage::

        b = CircuitBuilder("bell")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.cnot(q0, q1)
        b.h(q0)
        j, k = b.measure(q0), b.measure(q1)
        circuit = b.build()
    """

    def __init__(self, name: str, module: str = "m0"):
        self.name = name
        self.module = module
        self._next_index: dict[str, int] = {}
        self._by_coord: dict[str, dict[Coord, QubitRef]] = {}
        self._layers: list[list[Gate]] = []
        self._kinds: list[LayerKind] = []
        self._ready: dict[QubitRef, int] = {}
        self._slot_layer: list[int] = []
        self._floor = 0
        self._touched: dict[QubitRef, None] = {}
        self._registers: dict[str, tuple[QubitRef | None, ...]] = {}

    # --- Qubit allocation ---
    def qubit(self, coord: Coord, module: str | None = None) -> QubitRef:
        """Allocate a new qubit at ``coord``; the coordinate must be free."""
        module = module or self.module
        grid = self._by_coord.setdefault(module, {})
        if coord in grid:
            raise CircuitError(
                "coordinate already occupied",
                context={"module": module, "coord": coord},
            )
        index = self._next_index.get(module, 0)
        self._next_index[module] = index + 1
        ref = QubitRef(module, index, coord)
        grid[coord] = ref
        return ref

    def at(self, coord: Coord, module: str | None = None) -> QubitRef:
        """The qubit at ``coord``, allocating it if the site is still empty."""
        module = module or self.module
        existing = self._by_coord.get(module, {}).get(coord)
        return existing if existing is not None else self.qubit(coord, module)

    def register(self, name: str, qubits: Sequence[QubitRef | None]) -> None:
        self._registers[name] = tuple(qubits)

    # --- Gate placement ---
    def add(self, kind: GateKind, *qubits: QubitRef, cond: ParityExpr = ALWAYS) -> Gate:
        if cond.is_never:
            raise CircuitError("refusing to place a gate that can never fire")
        layer = self._floor
        for qubit in qubits:
            layer = max(layer, self._ready.get(qubit, 0))
        for bit in cond.bits:
            if bit >= len(self._slot_layer):
                raise CircuitError(
                    "condition reads an unallocated record bit", context={"bit": bit}
                )
            layer = max(layer, self._slot_layer[bit] + 1)
        wanted = LayerKind.TELEPORT if kind is GateKind.TELEPORT else LayerKind.INTRA
        while layer < len(self._kinds) and self._kinds[layer] is not wanted:
            layer += 1
        while layer >= len(self._layers):
            self._layers.append([])
            self._kinds.append(wanted)
        slot = None
        if kind is GateKind.MEASURE:
            slot = len(self._slot_layer)
            self._slot_layer.append(layer)
        gate = Gate(kind, tuple(qubits), cond, slot)
        if kind is GateKind.TELEPORT and qubits[0].module == qubits[1].module:
            raise TimestepKindViolation(
                "Teleport must connect two different modules",
                context={"gate": str(gate)},
            )
        self._layers[layer].append(gate)
        for qubit in qubits:
            self._ready[qubit] = layer + 1
            self._touched.setdefault(qubit)
        return gate

    def x(self, q: QubitRef, cond: ParityExpr = ALWAYS) -> Gate:
        return self.add(GateKind.X, q, cond=cond)

    def z(self, q: QubitRef, cond: ParityExpr = ALWAYS) -> Gate:
        return self.add(GateKind.Z, q, cond=cond)

    def h(self, q: QubitRef) -> Gate:
        return self.add(GateKind.H, q)

    def t(self, q: QubitRef) -> Gate:
        return self.add(GateKind.T, q)

    def tdg(self, q: QubitRef) -> Gate:
        return self.add(GateKind.TDG, q)

    def cnot(self, control: QubitRef, target: QubitRef, cond: ParityExpr = ALWAYS) -> Gate:
        return self.add(GateKind.CNOT, control, target, cond=cond)

    def swap(self, a: QubitRef, b: QubitRef) -> None:
        """Exchange two adjacent qubits with three CNOTs."""
        self.cnot(a, b)
        self.cnot(b, a)
        self.cnot(a, b)

    def measure(self, q: QubitRef) -> int:
        """Measure ``q`` in the Z basis and return its record slot."""
        return self.add(GateKind.MEASURE, q).slot

    def reset(self, q: QubitRef, slot: int) -> Gate:
        """Return a measured qubit to |0> by an X conditioned on its outcome."""
        return self.x(q, ParityExpr.on(slot))

    def teleport(self, src: QubitRef, dst: QubitRef) -> Gate:
        return self.add(GateKind.TELEPORT, src, dst)

    def hold(self, q: QubitRef, layer: int) -> None:
        """Keep ``q`` idle so its next gate lands no earlier than ``layer``."""
        self._ready[q] = max(self._ready.get(q, 0), layer)

    def barrier(self) -> None:
        """Later gates start no earlier than the current end of the circuit."""
        self._floor = len(self._layers)

    # --- Introspection ---
    @property
    def depth(self) -> int:
        return len(self._layers)

    @property
    def record_size(self) -> int:
        return len(self._slot_layer)

    def ready(self, q: QubitRef) -> int:
        return self._ready.get(q, 0)

    def build(self) -> Circuit:
        layers = tuple(
            Layer(tuple(gates), kind)
            for gates, kind in zip(self._layers, self._kinds, strict=True)
        )
        circuit = Circuit(
            name=self.name,
            layers=layers,
            qubits=tuple(self._touched),
            record_size=len(self._slot_layer),
            registers=dict(self._registers),
        )
        logger.debug(
            f"built {self.name}: depth={circuit.depth} size={circuit.size} "
            f"width={circuit.width} record={circuit.record_size}"
        )
        return circuit
