# csaforge/arith.py
"""Carry-save arithmetic on the 2D lattice.

Builders for the Toffoli decomposition, the single-bit 3-2 and 2-2 adders, a
layer of parallel 3-2 adders, and the constant-depth modular adder (the CSA
tile).

Tile geometry (``N = n + 2`` bit positions, cell ``k`` in columns
``3k..3k+2``):

====  ==============================================
row   content
====  ==============================================
0     layer 1 inputs ``a_k, b_k, c_k``
1     layer 1 outputs ``u_k`` (x=3k+1), ``v_k`` (x=3k-1)
2     fanout rail for layer 2
3, 4  layer 2 inputs and outputs
5     fanout rail for layer 3
6, 7  layer 3 inputs and outputs
8     fanout rail for layer 4
9, 10 layer 4 inputs and outputs
====  ==============================================

Every reduction layer runs in six phases separated by barriers: move the
previous outputs across the rail row with two swaps each, fan the control
bit out along the rail, copy it into the residue positions, add, uncopy, and
collapse the rail back onto one qubit.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from .circuit import Circuit, CircuitBuilder, QubitRef
from .comm import emit_fanout, emit_teleport, emit_unfanout
from .exceptions import AdjacencyError, ParameterDomainError
from .hier import HierCircuit
from .oracle import (
    check_modulus,
    modular_adder_trace,
    oracle_modular_adder,
    residues,
)
from .sim import register_semantic
from .types import CarrySaveNumber, Coord
from .utils import bits_of

__all__ = [
    "ResidueTable",
    "build_csa_layer",
    "build_modular_adder",
    "build_single_bit_csa",
    "build_toffoli",
    "build_two_two_adder",
    "decode_csa",
    "emit_csa_cell",
    "emit_toffoli",
    "emit_two_two",
    "encode_csa",
    "modular_adder_block",
    "modular_adder_trace",
    "oracle_modular_adder",
    "tile_layout",
]


# --- Carry-save encoding ---


def encode_csa(x: int, width: int) -> CarrySaveNumber:
    """Canonical carry-save encoding ``u = x, v = 0``.

    Raises:
        ParameterDomainError: ``x`` does not fit in ``width`` bits.
    """
    if not 0 <= x < (1 << width):
        raise ParameterDomainError(
            f"value does not fit in {width} bits", context={"x": x, "width": width}
        )
    return CarrySaveNumber(u=x, v=0)


def decode_csa(c: CarrySaveNumber) -> int:
    return c.value


class ResidueTable(BaseModel):
    """Residues added back by the three reduction layers of the tile."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    m: int = Field(ge=3)
    r1: int = Field(description="2^(n+1) mod m, conditioned on v(n+1)")
    r2: int = Field(description="2^(n+1) mod m, conditioned on u(n+1)")
    r3: int = Field(description="2^(n+2) mod m, conditioned on v(n+2)")

    @classmethod
    def for_modulus(cls, n: int, m: int) -> ResidueTable:
        r1, r2, r3 = residues(n, m)
        return cls(n=n, m=m, r1=r1, r2=r2, r3=r3)


# --- Cells ---


def _require_mutually_adjacent(*qubits: QubitRef) -> None:
    for i, a in enumerate(qubits):
        for b in qubits[i + 1 :]:
            if max(abs(a.coord[0] - b.coord[0]), abs(a.coord[1] - b.coord[1])) != 1:
                raise AdjacencyError(
                    "qubits must be mutually adjacent",
                    context={"a": (str(a), a.coord), "b": (str(b), b.coord)},
                )


def emit_toffoli(b: CircuitBuilder, x: QubitRef, y: QubitRef, t: QubitRef) -> None:
    """Depth-8, 15-gate Clifford+T Toffoli with controls ``x, y`` and target ``t``."""
    _require_mutually_adjacent(x, y, t)
    b.tdg(x)
    b.tdg(y)
    b.h(t)
    b.cnot(t, x)
    b.t(x)
    b.cnot(y, t)
    b.cnot(y, x)
    b.t(t)
    b.tdg(x)
    b.cnot(y, t)
    b.cnot(t, x)
    b.t(x)
    b.tdg(t)
    b.cnot(y, x)
    b.h(t)


def emit_csa_cell(
    b: CircuitBuilder,
    a: QubitRef,
    bq: QubitRef,
    c: QubitRef,
    anc0: QubitRef,
    anc4: QubitRef,
) -> tuple[QubitRef, QubitRef]:
    """3-2 adder cell; returns ``(u, v)`` = ``(anc0, anc4)``.

    ``a`` ends in |0>, ``bq`` and ``c`` are preserved, ``anc0`` holds the
    parity and ``anc4`` the majority of the inputs.
    """
    emit_toffoli(b, bq, c, anc4)
    b.cnot(c, bq)
    emit_toffoli(b, a, bq, anc0)
    b.cnot(anc4, anc0)
    b.cnot(bq, a)
    b.cnot(c, bq)
    emit_toffoli(b, bq, c, anc4)
    b.swap(anc0, anc4)
    b.swap(anc0, a)
    return anc0, anc4


def emit_two_two(
    b: CircuitBuilder, x: QubitRef, y: QubitRef, anc0: QubitRef, anc4: QubitRef
) -> tuple[QubitRef, QubitRef]:
    """2-2 adder cell; ``x`` ends in |0>, ``y`` is preserved.

    Returns ``(anc0, anc4)`` holding ``x xor y`` and ``x and y``.
    """
    emit_toffoli(b, x, y, anc0)
    b.swap(anc0, anc4)
    b.cnot(y, x)
    b.swap(anc0, x)
    return anc0, anc4


def build_toffoli(
    a: Coord = (0, 0), bc: Coord = (1, 0), t: Coord = (0, 1)
) -> Circuit:
    """Standalone Toffoli on three mutually adjacent sites.

    Raises:
        AdjacencyError: The sites are not mutually adjacent.
    """
    builder = CircuitBuilder("toffoli")
    x, y, target = builder.qubit(a), builder.qubit(bc), builder.qubit(t)
    emit_toffoli(builder, x, y, target)
    builder.register("x", [x])
    builder.register("y", [y])
    builder.register("t", [target])
    return builder.build()


def _cell_sites(k: int, row: int) -> dict[str, Coord]:
    return {
        "a": (3 * k, row),
        "b": (3 * k + 1, row),
        "c": (3 * k + 2, row),
        "anc0": (3 * k + 1, row + 1),
        "anc4": (3 * k + 2, row + 1),
    }


def build_single_bit_csa() -> Circuit:
    """One 3-2 adder on five qubits."""
    builder = CircuitBuilder("csa_bit")
    q = {name: builder.qubit(site) for name, site in _cell_sites(0, 0).items()}
    u, v = emit_csa_cell(builder, q["a"], q["b"], q["c"], q["anc0"], q["anc4"])
    for name in ("a", "b", "c"):
        builder.register(name, [q[name]])
    builder.register("u", [u])
    builder.register("v", [v])
    return builder.build()


def build_two_two_adder() -> Circuit:
    """One 2-2 adder on four qubits: inputs ``a`` (zeroed) and ``b`` (kept)."""
    builder = CircuitBuilder("two_two")
    sites = _cell_sites(0, 0)
    a, bq = builder.qubit(sites["a"]), builder.qubit(sites["b"])
    anc0, anc4 = builder.qubit(sites["anc0"]), builder.qubit(sites["anc4"])
    u, v = emit_two_two(builder, a, bq, anc0, anc4)
    builder.register("a", [a])
    builder.register("b", [bq])
    builder.register("u", [u])
    builder.register("v", [v])
    return builder.build()


def build_csa_layer(width: int) -> Circuit:
    """``width`` 3-2 adders side by side: ``(a, b, c) -> (u, v)`` with ``u + v = a + b + c``.

    Registers ``a``, ``b``, ``c`` and ``u`` have ``width`` bits; ``v`` has
    ``width + 1`` positions with position 0 absent.

    Raises:
        ParameterDomainError: ``width < 1``.
    """
    if width < 1:
        raise ParameterDomainError("a CSA layer needs at least one bit", context={"width": width})
    builder = CircuitBuilder(f"csa_layer[{width}]")
    regs: dict[str, list[QubitRef | None]] = {"a": [], "b": [], "c": [], "u": [], "v": [None]}
    for k in range(width):
        q = {name: builder.qubit(site) for name, site in _cell_sites(k, 0).items()}
        u, v = emit_csa_cell(builder, q["a"], q["b"], q["c"], q["anc0"], q["anc4"])
        for name in ("a", "b", "c"):
            regs[name].append(q[name])
        regs["u"].append(u)
        regs["v"].append(v)
    for name, qubits in regs.items():
        builder.register(name, qubits)
    return builder.build()


# --- The CSA tile ---


def _rail_row(layer: int) -> int:
    return 3 * layer - 4


def _chain_sites(n: int) -> tuple[list[Coord], list[Coord]]:
    x = 3 * n
    chain3 = [(x + 4, 1), (x + 4, 2), (x + 3, 3), (x + 3, 4), (x + 2, 5)]
    chain4 = [
        (x + 5, 1), (x + 5, 2), (x + 5, 3), (x + 5, 4),
        (x + 4, 5), (x + 4, 6), (x + 3, 7), (x + 3, 8), (x + 2, 8),
    ]  # fmt: skip
    return chain3, chain4


class _TileBuilder:
    def __init__(self, n: int, m: int):
        self.n = n
        self.table = ResidueTable.for_modulus(n, m)
        self.b = CircuitBuilder(f"csa_tile[n={n},m={m}]", module="tile")

    def at(self, x: int, y: int) -> QubitRef:
        return self.b.at((x, y))

    def move(self, qubit: QubitRef, *path: Coord) -> QubitRef:
        """Carry a value along ``path`` with swaps through |0> sites."""
        for site in path:
            nxt = self.b.at(site)
            self.b.swap(qubit, nxt)
            qubit = nxt
        return qubit

    def layer_one(self):
        n, b = self.n, self.b
        regs: dict[str, list[QubitRef]] = {"a": [], "b": [], "c": []}
        u: dict[int, QubitRef] = {}
        v: dict[int, QubitRef] = {}
        for k in range(n + 2):
            q = {name: b.qubit(site) for name, site in _cell_sites(k, 0).items()}
            u[k], v[k + 1] = emit_csa_cell(b, q["a"], q["b"], q["c"], q["anc0"], q["anc4"])
            for name in ("a", "b", "c"):
                regs[name].append(q[name])
        for name, qubits in regs.items():
            b.register(name, qubits)
        b.barrier()
        return u, v

    def reduction(
        self,
        layer: int,
        u: dict[int, QubitRef],
        v: dict[int, QubitRef],
        control: QubitRef,
        residue: int,
    ) -> tuple[dict[int, QubitRef], dict[int, QubitRef], QubitRef]:
        """One residue-addition layer; returns the new ``u``, ``v`` and the rail end."""
        n, b = self.n, self.b
        rail = _rail_row(layer)
        inputs = rail + 1

        # dispatch: previous outputs cross the rail row
        a_slot: dict[int, QubitRef] = {}
        b_slot: dict[int, QubitRef] = {}
        for k in range(n + 1):
            if k >= 1:
                a_slot[k] = self.move(v[k], (3 * k, rail), (3 * k, inputs))
            b_slot[k] = self.move(u[k], (3 * k + 1, rail), (3 * k + 1, inputs))
        b.barrier()

        # fanout of the control along the rail
        line = [self.at(3 * n + 2 - j, rail) for j in range(1, 3 * n + 1)]
        ells = emit_fanout(b, control, line, reset=True)
        b.barrier()

        # load the residue
        bits = bits_of(residue, n)
        c_slot = {k: self.at(3 * k + 2, inputs) for k in range(n)}
        for k in range(n):
            if bits[k]:
                b.cnot(ells[n - k - 1], c_slot[k])
        b.barrier()

        # add
        out_u: dict[int, QubitRef] = {}
        out_v: dict[int, QubitRef] = {}
        for k in range(n + 1):
            sites = _cell_sites(k, inputs)
            anc0, anc4 = b.qubit(sites["anc0"]), b.qubit(sites["anc4"])
            if k == 0:
                out_u[k], out_v[k + 1] = emit_two_two(b, b_slot[0], c_slot[0], anc0, anc4)
            elif k == n:
                out_u[k], out_v[k + 1] = emit_two_two(b, a_slot[n], b_slot[n], anc0, anc4)
            else:
                out_u[k], out_v[k + 1] = emit_csa_cell(
                    b, a_slot[k], b_slot[k], c_slot[k], anc0, anc4
                )
        return out_u, out_v, self._release_rail(layer, ells, bits, c_slot)

    def _release_rail(self, layer, ells, bits, c_slot) -> QubitRef:
        n, b = self.n, self.b
        rail = _rail_row(layer)
        b.barrier()
        for k in range(n):
            if bits[k]:
                b.cnot(ells[n - k - 1], c_slot[k])
        b.barrier()
        # spread the copies over the whole rail, then collapse it
        for i in range(1, n + 1):
            b.cnot(self.at(3 * i, rail), self.at(3 * i + 1, rail))
        for i in range(2, n + 1):
            b.cnot(self.at(3 * i, rail), self.at(3 * i - 1, rail))
        low = 2
        if n % 2 == 0:
            b.cnot(self.at(2, rail), self.at(1, rail))
            low = 1
        b.barrier()
        line = [self.at(x, rail) for x in range(3 * n + 1, low - 1, -1)]
        end = emit_unfanout(b, line, reset=True)
        b.barrier()
        return end

    def build(self) -> Circuit:
        n, b = self.n, self.b
        u1, v1 = self.layer_one()
        chain3_sites, chain4_sites = _chain_sites(n)

        # control for layer 3 and 4 travel to their rail ends while layer 2 dispatches
        chain3 = [u1[n + 1], *(b.at(site) for site in chain3_sites[1:])]
        chain4 = [v1[n + 2], *(b.at(site) for site in chain4_sites[1:])]
        control3 = emit_teleport(b, chain3)
        control4 = emit_teleport(b, chain4)

        u2, v2, _ = self.reduction(2, u1, v1, v1[n + 1], self.table.r1)
        x = 3 * n + 3
        forwarded = self.move(v2[n + 1], (x, _rail_row(3)), (x, _rail_row(3) + 1))
        u3, v3, _ = self.reduction(3, u2, v2, control3, self.table.r2)
        b.cnot(v3[n + 1], forwarded)
        u4, v4, _ = self.reduction(4, u3, v3, control4, self.table.r3)

        b.register("u", [*(u4[k] for k in range(n + 1)), forwarded])
        b.register("v", [None, *(v4[k] for k in range(1, n + 2))])
        return b.build()


def build_modular_adder(n: int, m: int) -> Circuit:
    """The constant-depth modular adder on ``(n+2)``-bit carry-save registers.

    Inputs are registers ``a``, ``b`` and ``c``; the output is ``(u, v)``
    with ``u + v = a + b + c (mod m)`` and no bit of weight ``2^(n+2)``.
    Depth is the same for every ``n``.

    Raises:
        ModulusError: ``m`` is even or not an ``n``-bit number.
        ParameterDomainError: ``n < 2``.
    """
    check_modulus(n, m)
    return _TileBuilder(n, m).build()


def tile_layout(n: int, m: int | None = None) -> list[tuple[str, Coord]]:
    """Qubit sites of the tile as ``(role, coord)``, for drawing.

    Roles are ``"input"``, ``"output"``, ``"rail"`` and ``"work"``.
    """
    m = m if m is not None else (1 << n) - 1
    circuit = build_modular_adder(n, m)
    inputs = {q for name in ("a", "b", "c") for q in circuit.register(name)}
    outputs = {q for name in ("u", "v") for q in circuit.register(name) if q is not None}
    rails = {_rail_row(layer) for layer in (2, 3, 4)}
    rows = []
    for q in circuit.qubits:
        if q in inputs:
            role = "input"
        elif q in outputs:
            role = "output"
        elif q.coord[1] in rails:
            role = "rail"
        else:
            role = "work"
        rows.append((role, q.coord))
    return rows


def modular_adder_block(n: int, m: int, circuit: Circuit | None = None) -> HierCircuit:
    """The tile as a hierarchical leaf with the ``modular_adder`` semantic."""
    circuit = circuit if circuit is not None else build_modular_adder(n, m)
    return HierCircuit(
        name=circuit.name, leaf=circuit, kind="modular_adder", params={"n": n, "m": m}
    )


@register_semantic("modular_adder")
def _modular_adder_semantic(block: HierCircuit, inputs) -> CarrySaveNumber:
    n, m = block.params["n"], block.params["m"]
    u, v = oracle_modular_adder(inputs["a"], inputs["b"], inputs["c"], n, m)
    return CarrySaveNumber(u=u, v=v)
