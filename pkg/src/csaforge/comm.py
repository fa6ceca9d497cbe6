# csaforge/comm.py
"""Constant-depth communication primitives.

Bell measurement, teleportation along a line, unbounded fanout and unbounded
unfanout, each with Pauli corrections resolved by the classical controller.

The ``emit_*`` functions write a primitive into an existing
:class:`~csaforge.circuit.CircuitBuilder` on caller-chosen qubits, so the
arithmetic tiles can lay fanout rails on their own lattice. The ``build_*``
functions wrap them into standalone circuits on a straight line of qubits.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from loguru import logger

from .circuit import NEVER, Circuit, CircuitBuilder, Gate, GateKind, ParityExpr, QubitRef
from .exceptions import AdjacencyError, UnsupportedLength
from .types import Coord


def chebyshev(a: Coord, b: Coord) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _require_adjacent(a: QubitRef, b: QubitRef) -> None:
    if a.module == b.module and chebyshev(a.coord, b.coord) != 1:
        raise AdjacencyError(
            "qubits are not nearest neighbors",
            context={"a": (str(a), a.coord), "b": (str(b), b.coord)},
        )


def _require_line(qubits: Sequence[QubitRef]) -> None:
    for a, c in zip(qubits, qubits[1:], strict=False):
        _require_adjacent(a, c)


@dataclass
class CorrectionPlan:
    """Pending Pauli frame: one X and one Z condition per target qubit."""

    frame: dict[QubitRef, tuple[ParityExpr, ParityExpr]] = field(default_factory=dict)

    def flip(
        self, target: QubitRef, *, x: ParityExpr = NEVER, z: ParityExpr = NEVER
    ) -> None:
        cur_x, cur_z = self.frame.get(target, (NEVER, NEVER))
        self.frame[target] = (cur_x ^ x, cur_z ^ z)

    def apply(self, b: CircuitBuilder, *, merged: bool = True) -> int:
        """Place the corrections and return the number of gates placed.

        Merged, every target gets at most one X and one Z. Unmerged, every
        record bit contributes its own gate, the way the cascade arises.
        """
        placed = 0
        for target, (x, z) in self.frame.items():
            for kind, expr in ((GateKind.X, x), (GateKind.Z, z)):
                if expr.is_never:
                    continue
                parts = [expr] if merged else [ParityExpr.on(bit) for bit in sorted(expr.bits)]
                for part in parts:
                    b.add(kind, target, cond=part)
                    placed += 1
        return placed


# --- Emitters ---


def emit_bell_measure(b: CircuitBuilder, q1: QubitRef, q2: QubitRef) -> tuple[int, int]:
    """Bell-basis measurement of two adjacent qubits.

    Returns:
        The record slots ``(j, k)``: ``j`` is the phase bit read from ``q1``
        and ``k`` is the parity ``q1 xor q2``.
    """
    _require_adjacent(q1, q2)
    b.cnot(q1, q2)
    b.h(q1)
    k = b.measure(q2)
    j = b.measure(q1)
    return j, k


def emit_teleport(
    b: CircuitBuilder,
    line: Sequence[QubitRef],
    *,
    reset: bool = False,
    merged: bool = True,
) -> QubitRef:
    """Teleport ``line[0]`` to ``line[-1]`` through Bell pairs laid on the line.

    Raises:
        UnsupportedLength: The line length is even or below 3.
    """
    n = len(line)
    if n < 3 or n % 2 == 0:
        raise UnsupportedLength(
            "teleportation chains must have odd length >= 3", context={"n": n}
        )
    _require_line(line)
    for i in range(1, n, 2):
        b.h(line[i])
    for i in range(1, n, 2):
        b.cnot(line[i], line[i + 1])
    js, ks = [], []
    for i in range(0, n - 1, 2):
        j, k = emit_bell_measure(b, line[i], line[i + 1])
        js.append(j)
        ks.append(k)
        if reset:
            b.reset(line[i], j)
            b.reset(line[i + 1], k)
    plan = CorrectionPlan()
    plan.flip(line[-1], x=ParityExpr.on(*ks), z=ParityExpr.on(*js))
    plan.apply(b, merged=merged)
    return line[-1]


def emit_fanout(
    b: CircuitBuilder,
    source: QubitRef,
    line: Sequence[QubitRef],
    *,
    reset: bool = False,
    merged: bool = True,
) -> list[QubitRef]:
    """Entangle ``n`` fresh qubits with ``source``: ``|x,0..0> -> |x..x>``.

    ``line`` is the adjacent path ``a1, l1, b2, a2, l2, ..., b(n-1), a(n-1),
    l(n-1), ln`` next to ``source``, ``3n - 3`` qubits long. Three-qubit cat
    segments ``(a_i, l_i, b_(i+1))`` are linked by Bell measurements and the
    result is attached to the source by one more Bell measurement, which
    consumes the source.

    Returns:
        The output qubits ``l1..ln``.

    Raises:
        UnsupportedLength: The line does not hold ``3n - 3`` qubits, ``n >= 2``.
    """
    if len(line) < 3 or len(line) % 3:
        raise UnsupportedLength(
            "fanout line must hold 3n-3 qubits for n >= 2", context={"line": len(line)}
        )
    n = len(line) // 3 + 1
    _require_adjacent(source, line[0])
    _require_line(line)
    a = [line[3 * i] for i in range(n - 1)]
    ells = [line[3 * i + 1] for i in range(n - 1)] + [line[-1]]
    links = [line[3 * i + 2] for i in range(n - 2)]

    for qubit in a:
        b.h(qubit)
    for i in range(n - 1):
        b.cnot(a[i], ells[i])
    for i in range(n - 2):
        b.cnot(ells[i], links[i])
    b.cnot(ells[n - 2], ells[n - 1])
    # source attaches with the link measurements, so depth is the same for every n
    b.hold(source, max(b.ready(q) for q in line))

    js, ks = [], []
    pairs = [(source, a[0])] + [(links[i - 1], a[i]) for i in range(1, n - 1)]
    for first, second in pairs:
        j, k = emit_bell_measure(b, first, second)
        js.append(j)
        ks.append(k)
        if reset:
            b.reset(first, j)
            b.reset(second, k)

    plan = CorrectionPlan()
    for i, ell in enumerate(ells):
        plan.flip(ell, x=ParityExpr.on(*ks[: min(i, n - 2) + 1]))
        if i < n - 1:
            plan.flip(ell, z=ParityExpr.on(js[i]))
    plan.apply(b, merged=merged)
    return ells


def emit_unfanout(
    b: CircuitBuilder, line: Sequence[QubitRef], *, reset: bool = False
) -> QubitRef:
    """Collapse a fanned-out register on an adjacent line onto its last qubit.

    The other qubits are measured; with ``reset`` they are returned to |0>.
    An even-length line first uncopies its first qubit with one CNOT.

    Raises:
        UnsupportedLength: Fewer than two qubits.
    """
    n = len(line)
    if n < 2:
        raise UnsupportedLength("unfanout needs at least two qubits", context={"n": n})
    _require_line(line)
    if n % 2 == 0:
        b.cnot(line[1], line[0])
        line = line[1:]
        n -= 1
    for qubit in line:
        b.h(qubit)
    for i in range(0, n - 1, 2):
        b.cnot(line[i], line[i + 1])
    for i in range(1, n - 1, 2):
        b.cnot(line[i], line[i + 1])
    slots = [b.measure(qubit) for qubit in line[:-1]]
    target = line[-1]
    b.h(target)
    # qubits 2, 4, ... counted from 1, without the next-to-last
    phase_bits = [slots[i] for i in range(1, n - 3, 2)]
    if phase_bits:
        b.z(target, ParityExpr.on(*phase_bits))
    if reset:
        for qubit, slot in zip(line[:-1], slots, strict=True):
            b.reset(qubit, slot)
    return target


# --- Standalone builders ---


def build_bell_measure(q1: Coord = (0, 0), q2: Coord = (1, 0)) -> Circuit:
    """Bell measurement of two qubits at ``q1`` and ``q2``.

    Raises:
        AdjacencyError: The coordinates are not nearest neighbors.
    """
    b = CircuitBuilder("bell")
    first, second = b.qubit(q1), b.qubit(q2)
    emit_bell_measure(b, first, second)
    b.register("q1", [first])
    b.register("q2", [second])
    return b.build()


def build_teleport(n: int, *, reset: bool = False, merged: bool = True) -> Circuit:
    """Teleport qubit 0 of an ``n``-qubit line to qubit ``n-1``.

    Args:
        n: Chain length (odd, at least 3).
        reset: Return measured qubits to |0>.
        merged: One X and one Z on the target; when False every Bell
            measurement contributes its own correction gates.

    Raises:
        UnsupportedLength: ``n`` is even or smaller than 3.
    """
    if n < 3 or n % 2 == 0:
        raise UnsupportedLength(
            "teleportation chains must have odd length >= 3", context={"n": n}
        )
    b = CircuitBuilder(f"teleport[{n}]")
    line = [b.qubit((x, 0)) for x in range(n)]
    emit_teleport(b, line, reset=reset, merged=merged)
    b.register("source", [line[0]])
    b.register("target", [line[-1]])
    return b.build()


def build_fanout(n: int, *, reset: bool = False, merged: bool = True) -> Circuit:
    """Fan one source qubit out to ``n`` entangled copies on a straight line.

    With ``merged=False`` the cascading corrections are emitted one gate per
    record bit; :func:`merge_corrections` folds them into the merged form.

    Raises:
        UnsupportedLength: ``n < 2``.
    """
    if n < 2:
        raise UnsupportedLength("fanout needs at least two copies", context={"n": n})
    b = CircuitBuilder(f"fanout[{n}]")
    source = b.qubit((0, 0))
    line = [b.qubit((x, 0)) for x in range(1, 3 * n - 2)]
    outputs = emit_fanout(b, source, line, reset=reset, merged=merged)
    b.register("source", [source])
    b.register("out", outputs)
    return b.build()


def build_unfanout(n: int, *, reset: bool = False) -> Circuit:
    """Unfanout of an ``n``-qubit line onto its last qubit.

    Raises:
        UnsupportedLength: ``n < 2``.
    """
    if n < 2:
        raise UnsupportedLength("unfanout needs at least two qubits", context={"n": n})
    b = CircuitBuilder(f"unfanout[{n}]")
    line = [b.qubit((x, 0)) for x in range(n)]
    target = emit_unfanout(b, line, reset=reset)
    b.register("in", line)
    b.register("target", [target])
    return b.build()


# --- Correction merging ---


def merge_corrections(c: Circuit) -> Circuit:
    """Fold runs of classically controlled X (and Z) on a qubit into one gate each.

    A run ends at the first non-Pauli gate on the qubit. The merged gate takes
    the XOR of the run's conditions and sits where the last gate of the run
    was; if it can never fire it is dropped. When anything merged the circuit
    is rescheduled as soon as possible, otherwise ``c`` is returned as is.
    """
    gates = [gate for _, gate in c.gates()]
    dropped: set[int] = set()
    replaced: dict[int, Gate] = {}
    pending: dict[tuple[QubitRef, GateKind], int] = {}
    for pos, gate in enumerate(gates):
        if gate.kind.is_pauli:
            q = gate.qubits[0]
            prev = pending.get((q, gate.kind))
            if prev is not None:
                cond = replaced.get(prev, gates[prev]).cond ^ gate.cond
                dropped.add(prev)
                replaced[pos] = Gate(gate.kind, gate.qubits, cond)
            pending[(q, gate.kind)] = pos
            continue
        for q in gate.qubits:
            pending.pop((q, GateKind.X), None)
            pending.pop((q, GateKind.Z), None)
    if not dropped:
        return c

    b = CircuitBuilder(c.name)
    slot_map: dict[int, int] = {}
    for pos, gate in enumerate(gates):
        if pos in dropped:
            continue
        gate = replaced.get(pos, gate)
        if gate.cond.is_never:
            continue
        cond = ParityExpr(frozenset(slot_map[bit] for bit in gate.cond.bits), gate.cond.const)
        placed = b.add(gate.kind, *gate.qubits, cond=cond)
        if gate.kind is GateKind.MEASURE:
            slot_map[gate.slot] = placed.slot
    for name, qubits in c.registers.items():
        b.register(name, qubits)
    merged = b.build()
    logger.debug(
        f"merged corrections in {c.name}: size {c.size} -> {merged.size}, "
        f"depth {c.depth} -> {merged.depth}"
    )
    return merged


def pauli_counts(c: Circuit) -> dict[QubitRef, dict[GateKind, int]]:
    """Number of X and Z gates placed on each qubit."""
    counts: dict[QubitRef, dict[GateKind, int]] = {}
    for _, gate in c.gates():
        if gate.kind.is_pauli:
            per = counts.setdefault(gate.qubits[0], {GateKind.X: 0, GateKind.Z: 0})
            per[gate.kind] += 1
    return counts
