# csaforge/mult.py
"""The modular multiplier: partial products and the modular multiple addition.

The multiplier computes ``x * y mod m`` in carry-save form in four steps:

1. partial-product creation (PPC) turns the input bits into ``t'`` numbers of
   ``n`` bits each whose sum is congruent to ``x * y``;
2. the numbers are teleported into the input registers of CSA tiles, bits of
   equal significance side by side;
3. a tree of tiles (the MMA) reduces three numbers to two per tile until one
   carry-save pair is left, which is copied out;
4. the tree and the PPC are uncomputed in reverse.

Inputs of the parallel variant are carry-save numbers held in ``2n+3``
qubits: ``u`` bits 0..n+1 and ``v`` bits 1..n+1. The serial variant takes a
conventional ``n``-bit ``x`` and a classical multiplier ``a``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Literal

from cachetools import LRUCache
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from .arith import emit_toffoli, modular_adder_block
from .circuit import Circuit, CircuitBuilder, QubitRef
from .comm import emit_fanout, emit_teleport
from .config import get_settings
from .exceptions import ParameterDomainError
from .formulas import FormulaId, evaluate_bound, ppc_rounds, t_prime
from .hier import HierCircuit, Link, Placement, PortRef, Stage, leaf, symbolic
from .oracle import check_modulus, oracle_modular_adder
from .resources import ResourceReport
from .sim import register_semantic
from .types import CarrySaveNumber
from .utils import set_bit_positions

Variant = Literal["parallel", "serial"]

# --- Planning ---


def cse_layout(n: int) -> list[tuple[str, int]]:
    """``(part, significance)`` of each of the ``2n+3`` qubits of a CSE input.

    The order is ``u0, u1, v1, u2, v2, ..., u(n+1), v(n+1)``.
    """
    order = [("u", 0)]
    for s in range(1, n + 2):
        order += [("u", s), ("v", s)]
    return order


class PartialProduct(BaseModel):
    """One product bit and the residue it contributes when set."""

    model_config = ConfigDict(frozen=True)

    pair: tuple[int, ...] = Field(description="(p, q) input positions, or (i,) when serial")
    significance: int
    residue: int = Field(description="Value added when the product bit is 1")
    module: str


class PartialProductPlan(BaseModel):
    """Where every partial product lives and how they form ``n``-bit numbers.

    A parallel plan holds one number per z-site plus ``2n+3`` numbers made
    only of single-bit products. Single-bit products that do not fit in those
    take free bit positions of z-site numbers (``z_site_fill``).
    """

    model_config = ConfigDict(frozen=True)

    n: int
    m: int
    variant: Variant
    a: int | None = None
    z_sites: list[PartialProduct]
    z_site_fill: list[list[PartialProduct]] = Field(default_factory=list)
    single_bit_groups: list[list[PartialProduct]] = Field(default_factory=list)

    @property
    def t_prime(self) -> int:
        """Number of ``n``-bit numbers handed to the MMA."""
        return len(self.z_sites) + len(self.single_bit_groups)

    @property
    def t_prime_bound(self) -> int:
        return t_prime(self.n) if self.variant == "parallel" else self.n

    def numbers(self) -> list[list[PartialProduct]]:
        """The products making up each number, z-sites first."""
        fill = self.z_site_fill or [[] for _ in self.z_sites]
        numbers = [[site, *extra] for site, extra in zip(self.z_sites, fill, strict=True)]
        return numbers + [list(g) for g in self.single_bit_groups]

    def evaluate(self, bits: dict[tuple[int, ...], int]) -> list[int]:
        """Values of the numbers given each product bit."""
        values = []
        for parts in self.numbers():
            values.append(sum(part.residue * bits[part.pair] for part in parts))
        return values


def _pack_singles(
    singles: Sequence[PartialProduct], z_sites: Sequence[PartialProduct], n: int
) -> tuple[list[list[PartialProduct]], list[list[PartialProduct]]]:
    # first fit into 2n+3 numbers, one bit per position; overflow goes to a
    # z-site number whose residue leaves that position clear
    groups: list[dict[int, PartialProduct]] = [{} for _ in range(2 * n + 3)]
    taken = [set(set_bit_positions(site.residue)) for site in z_sites]
    fill: list[list[PartialProduct]] = [[] for _ in z_sites]
    for part in sorted(singles, key=lambda p: (p.significance, p.pair)):
        s = part.significance
        group = next((g for g in groups if s not in g), None)
        if group is not None:
            group[s] = part
            continue
        index = next((i for i, used in enumerate(taken) if s not in used), None)
        if index is None:
            logger.warning(f"no free position {s} for {part.pair}; adding a number beyond t'")
            groups.append({s: part})
            continue
        taken[index].add(s)
        fill[index].append(part)
    return [list(g.values()) for g in groups], fill


_plan_cache: LRUCache | None = None


def plan_partial_products(
    n: int, m: int, variant: Variant = "parallel", a: int | None = None
) -> PartialProductPlan:
    """Precompute the residues and grouping of the partial products.

    Parallel: every pair of input qubits ``(p, q)`` with significance sum
    ``s`` gives one product bit. If ``2^s < 2^n`` the bit is added as is and
    packed with others into ``2n+3`` numbers of ``n`` bits, spilling into free
    positions of z-site numbers when those are full; otherwise it controls the
    residue ``2^s mod m`` at its own z-site. ``t'`` is then ``2n^2+16n+11``.

    Serial: bit ``i`` of ``x`` controls ``2^i * a mod m``.

    Raises:
        ModulusError: Invalid modulus.
        ParameterDomainError: Serial plan without ``a``, or unknown variant.
    """
    global _plan_cache
    if _plan_cache is None:
        _plan_cache = LRUCache(maxsize=get_settings().formula_cache_size)
    key = (n, m, variant, a)
    if key in _plan_cache:
        return _plan_cache[key]

    check_modulus(n, m)
    if variant == "parallel":
        layout = cse_layout(n)
        singles, z_sites = [], []
        for p, (_, sp) in enumerate(layout):
            for q, (_, sq) in enumerate(layout):
                s = sp + sq
                if s < n:
                    singles.append(
                        PartialProduct(pair=(p, q), significance=s, residue=1 << s, module=f"ppc.r{p}")
                    )
                else:
                    z_sites.append(
                        PartialProduct(
                            pair=(p, q), significance=s, residue=pow(2, s, m), module=f"ppc.r{p}"
                        )
                    )
        groups, fill = _pack_singles(singles, z_sites, n)
        plan = PartialProductPlan(
            n=n, m=m, variant=variant, z_sites=z_sites, z_site_fill=fill, single_bit_groups=groups
        )
    elif variant == "serial":
        if a is None:
            raise ParameterDomainError("the serial multiplier needs a classical operand a")
        z_sites = []
        for i in range(n):
            residue = pow(2, i, m) * a % m
            if residue:
                z_sites.append(
                    PartialProduct(pair=(i,), significance=i, residue=residue, module="ppc")
                )
        plan = PartialProductPlan(n=n, m=m, variant=variant, a=a, z_sites=z_sites)
    else:
        raise ParameterDomainError(f"unknown multiplier variant {variant!r}")

    logger.debug(
        f"partial products n={n} m={m} {variant}: {len(plan.z_sites)} z-sites, "
        f"{len(plan.single_bit_groups)} single-bit numbers, "
        f"{sum(map(len, plan.z_site_fill))} bits packed into z-sites"
    )
    _plan_cache[key] = plan
    return plan


class LatticeGeometry(BaseModel):
    """Size and round structure of the square routing lattice."""

    n: int
    side: int = Field(description="3 * (2n + 3) sites per side")
    rounds: int
    live_lines: list[int] = Field(description="Input lines spread after each round")
    intersections: list[int] = Field(description="Crossing sites per round")


def ppc_lattice_geometry(n: int) -> LatticeGeometry:
    """The routing lattice: each round doubles the live copies of every line."""
    if n < 1:
        raise ParameterDomainError("n must be at least 1", context={"n": n})
    lines = 2 * n + 3
    rounds = ppc_rounds(n)
    live = [min(2 ** (r + 1) - 1, lines) for r in range(rounds)]
    return LatticeGeometry(
        n=n,
        side=3 * lines,
        rounds=rounds,
        live_lines=live,
        intersections=[v * v for v in live],
    )


# --- Partial-product circuits ---


def _z_registers(
    b: CircuitBuilder, plan: PartialProductPlan, holders: dict[tuple[int, ...], list[QubitRef]]
) -> None:
    # holders[pair] carries one qubit per set bit of the residue, low bit first
    for index, parts in enumerate(plan.numbers()):
        reg: list[QubitRef | None] = [None] * plan.n
        for part in parts:
            for pos, qubit in zip(set_bit_positions(part.residue), holders[part.pair], strict=True):
                reg[pos] = qubit
        b.register(f"z{index}", reg)


def emit_copy_rounds(
    b: CircuitBuilder, homes: Sequence[QubitRef], rounds: int, offset: int
) -> None:
    """Copy ``homes[0]`` onto every home of the line in ``rounds`` rounds.

    Each round every live copy CNOTs into its neighbour and that copy is
    teleported to the middle of the copy's unfilled interval, so the live
    copies double. A chain steps once off the line, ``offset`` rows away,
    to get the odd length a teleport chain needs. Used qubits are reset.
    """
    size = len(homes)
    if 1 << rounds < size:
        raise ParameterDomainError(
            "too few rounds to reach every copy", context={"rounds": rounds, "copies": size}
        )
    module = homes[0].module
    for r in range(rounds):
        d = 1 << (rounds - 1 - r)
        for c in range(0, size - d, 2 * d):
            b.cnot(homes[c], homes[c + 1])
            if d == 1:
                continue
            x, y = homes[c + 2].coord
            detour = b.at((x, y + offset), module)
            emit_teleport(b, [homes[c + 1], detour, *homes[c + 2 : c + d + 1]], reset=True)


def build_partial_products(plan: PartialProductPlan) -> HierCircuit:
    """Gate-level parallel partial-product creation.

    Module ``ppc.in`` holds the inputs: ``x_p`` at ``(0, 2p)`` and ``y_q`` at
    ``(1, 2q)``. Every ``y_q`` is copied along its row in doubling rounds,
    one copy per row module. Row module ``ppc.r<p>`` receives ``x_p`` and
    copies it along its row 0 the same way; ``y_q`` lands at ``(q, +-1)``
    and a Toffoli writes ``x_p * y_q`` next to it. A product whose residue
    has ``k > 1`` set bits is fanned out to ``k`` qubits along its column.

    The numbers are exposed as registers ``z0, z1, ...`` (``n`` entries, absent
    bits ``None``); the inputs as ``xu``, ``xv``, ``yu``, ``yv``.

    Raises:
        ParameterDomainError: The plan is not a parallel plan.
    """
    if plan.variant != "parallel":
        raise ParameterDomainError("build_partial_products needs a parallel plan")
    n, m = plan.n, plan.m
    geometry = ppc_lattice_geometry(n)
    size = 2 * n + 3
    layout = cse_layout(n)
    b = CircuitBuilder(f"ppc[n={n},m={m}]", module="ppc.in")
    xs = [b.qubit((0, 2 * p)) for p in range(size)]
    copies = [[b.qubit((c + 1, 2 * q)) for c in range(size)] for q in range(size)]
    lines = [[b.qubit((q, 0), f"ppc.r{p}") for q in range(size)] for p in range(size)]
    for p, line in enumerate(lines):
        b.teleport(xs[p], line[0])
    for row in [*copies, *lines]:
        emit_copy_rounds(b, row, geometry.rounds, 1)

    slots: dict[tuple[int, int], tuple[QubitRef, QubitRef, int]] = {}
    for p, line in enumerate(lines):
        for q in range(size):
            side = 1 if q % 2 == 0 else -1
            y_slot = b.at((q, side), line[q].module)
            target = b.qubit((q + 1, side), line[q].module)
            b.teleport(copies[q][p], y_slot)
            slots[(p, q)] = (y_slot, target, side)
    products: dict[tuple[int, int], tuple[QubitRef, int]] = {}
    for (p, q), (y_slot, target, side) in slots.items():
        emit_toffoli(b, lines[p][q], y_slot, target)
        products[(p, q)] = (target, side)

    holders: dict[tuple[int, ...], list[QubitRef]] = {}
    for site in plan.z_sites:
        target, side = products[site.pair]
        k = len(set_bit_positions(site.residue))
        if k == 1:
            holders[site.pair] = [target]
            continue
        x = target.coord[0]
        rail = [b.qubit((x, side * (j + 2)), site.module) for j in range(3 * k - 3)]
        holders[site.pair] = emit_fanout(b, target, rail, reset=True)
    for parts in [*plan.single_bit_groups, *plan.z_site_fill]:
        for part in parts:
            holders[part.pair] = [products[part.pair][0]]

    _z_registers(b, plan, holders)
    for name, reg in (("x", xs), ("y", [row[0] for row in copies])):
        b.register(f"{name}u", [reg[p] for p, (part, _) in enumerate(layout) if part == "u"])
        b.register(f"{name}v", [None, *(reg[p] for p, (part, _) in enumerate(layout) if part == "v")])
    circuit = b.build()
    logger.debug(
        f"ppc n={n}: {geometry.rounds} copy rounds on a {geometry.side}-site lattice, "
        f"depth {circuit.depth}"
    )
    return leaf(circuit, "ppc", n=n, m=m, variant="parallel", a=None)


def build_serial_partial_products(plan: PartialProductPlan) -> HierCircuit:
    """Partial products of a quantum ``x`` and a classical ``a``.

    ``x_i`` sits at ``(i, 0)``. Its residue ``2^i * a mod m`` has ``k`` set
    bits: for ``k > 1`` the bit is fanned out upward along column ``i``; for
    ``k == 1`` it is copied once to ``(i, 1)``.

    Raises:
        ParameterDomainError: The plan is not a serial plan.
    """
    if plan.variant != "serial":
        raise ParameterDomainError("build_serial_partial_products needs a serial plan")
    n, m = plan.n, plan.m
    b = CircuitBuilder(f"ppc_serial[n={n},m={m},a={plan.a}]", module="ppc")
    xs = [b.qubit((i, 0)) for i in range(n)]
    holders: dict[tuple[int, ...], list[QubitRef]] = {}
    for site in plan.z_sites:
        (i,) = site.pair
        k = len(set_bit_positions(site.residue))
        if k == 1:
            copy = b.qubit((i, 1))
            b.cnot(xs[i], copy)
            holders[site.pair] = [copy]
        else:
            rail = [b.qubit((i, j + 1)) for j in range(3 * k - 3)]
            holders[site.pair] = emit_fanout(b, xs[i], rail, reset=True)
    _z_registers(b, plan, holders)
    b.register("x", xs)
    circuit = b.build()
    return leaf(circuit, "ppc", n=n, m=m, variant="serial", a=plan.a)


# --- Modular multiple addition ---


@dataclass(frozen=True)
class TileSpec:
    """One tile of the MMA tree: three numbers in, a carry-save pair out."""

    label: str
    stage: int
    inputs: tuple[int, int, int]
    outputs: tuple[int, int]


@dataclass(frozen=True)
class MmaSchedule:
    """Tiles per stage, by number id.

    Ids ``0..t-1`` are the external inputs; each tile appends two ids for its
    ``u`` and ``v`` outputs.
    """

    t: int
    stages: tuple[tuple[TileSpec, ...], ...]
    result: tuple[int, int]

    @property
    def height(self) -> int:
        return len(self.stages)

    @property
    def tile_count(self) -> int:
        return sum(len(stage) for stage in self.stages)

    @cached_property
    def consumers(self) -> dict[int, tuple[TileSpec, str]]:
        """Tile and input register (``a``, ``b`` or ``c``) reading each number."""
        out = {}
        for stage in self.stages:
            for spec in stage:
                for number, reg in zip(spec.inputs, ("a", "b", "c"), strict=True):
                    out[number] = (spec, reg)
        return out


def mma_schedule(t: int) -> MmaSchedule:
    """Group the live numbers in threes, stage after stage, until two remain.

    Numbers left over when the count is not a multiple of three are carried
    to the front of the next stage unchanged.

    Raises:
        ParameterDomainError: ``t < 3``.
    """
    if t < 3:
        raise ParameterDomainError("the MMA tree needs at least three numbers", context={"t": t})
    live = list(range(t))
    next_id = t
    stages: list[tuple[TileSpec, ...]] = []
    while len(live) > 2:
        count = len(live) // 3
        tiles = []
        for i in range(count):
            inputs = tuple(live[3 * i : 3 * i + 3])
            tiles.append(
                TileSpec(f"s{len(stages)}.t{i}", len(stages), inputs, (next_id, next_id + 1))
            )
            next_id += 2
        live = live[3 * count :] + [o for spec in tiles for o in spec.outputs]
        stages.append(tuple(tiles))
    return MmaSchedule(t=t, stages=tuple(stages), result=(live[0], live[1]))


def _links(
    src: Circuit,
    src_path: tuple[str, ...],
    src_reg: str,
    dst: Circuit,
    dst_path: tuple[str, ...],
    dst_reg: str,
) -> list[Link]:
    """Teleports carrying a register bit by bit onto another, aligned by significance."""
    links = []
    pairs = zip(src.register(src_reg), dst.register(dst_reg), strict=False)
    for s, d in pairs:
        if s is not None and d is not None:
            links.append(Link(PortRef(src_path, s.key), PortRef(dst_path, d.key)))
    return links


def build_mma_tree(
    t_prime: int, n: int, m: int, *, tile: HierCircuit | None = None
) -> HierCircuit:
    """The tree of CSA tiles adding ``t_prime`` numbers modulo ``m``.

    Every stage teleports its inputs out of the previous stage's tiles and
    runs its tiles side by side. All tiles keep their qubits until the whole
    tree is uncomputed. A symbolic ``tile`` has no registers to link, so its
    inbound traffic is counted at ``n + 2`` qubits per number instead.

    Raises:
        ParameterDomainError: ``t_prime < 3``.
        ModulusError: Invalid modulus.
    """
    schedule = mma_schedule(t_prime)
    tile = tile if tile is not None else modular_adder_block(n, m)
    circuit = tile.leaf
    producer: dict[int, tuple[str, str]] = {}
    stages = []
    for tiles in schedule.stages:
        links: list[Link] = []
        counted = 0
        for spec in tiles:
            for number, reg in zip(spec.inputs, ("a", "b", "c"), strict=True):
                if number not in producer:
                    continue
                if circuit is None:
                    counted += n + 2
                else:
                    label, out = producer[number]
                    links += _links(circuit, (label,), out, circuit, (spec.label,), reg)
        for spec in tiles:
            producer[spec.outputs[0]] = (spec.label, "u")
            producer[spec.outputs[1]] = (spec.label, "v")
        stages.append(
            Stage(
                placements=tuple(Placement(tile, 1, spec.label) for spec in tiles),
                links=tuple(links),
                teleports=counted,
                teleport_layers=1 if counted else 0,
            )
        )
    logger.debug(
        f"MMA tree t={t_prime}: {schedule.height} stages, {schedule.tile_count} tiles"
    )
    return HierCircuit(
        name=f"mma[t={t_prime},n={n},m={m}]",
        stages=tuple(stages),
        kind="mma",
        params={"n": n, "m": m, "t": t_prime},
    )


def _result_copy(n: int) -> HierCircuit:
    size = 2 * n + 3
    b = CircuitBuilder(f"result[n={n}]", module="out")
    incoming = [b.qubit((i, 0)) for i in range(size)]
    result = [b.qubit((i, 1)) for i in range(size)]
    for src, dst in zip(incoming, result, strict=True):
        b.cnot(src, dst)
    b.register("in_u", incoming[: n + 2])
    b.register("in_v", [None, *incoming[n + 2 :]])
    b.register("u", result[: n + 2])
    b.register("v", [None, *result[n + 2 :]])
    return leaf(b.build())


def build_modular_multiplier(
    n: int, m: int, variant: Variant = "parallel", a: int | None = None
) -> HierCircuit:
    """Compute ``x * y mod m`` (or ``x * a mod m``) and uncompute the garbage.

    Stages: PPC; interleaving teleports into the first tiles (and into later
    tiles for numbers carried forward); the MMA tree; a copy of the final
    pair into the ``out`` module; the MMA mirrored; the reverse interleave
    and the PPC mirrored. The result is left in registers ``u`` and ``v`` of
    ``out``.

    With fewer than three partial products the tree runs one tile with a zero
    third input.
    """
    plan = plan_partial_products(n, m, variant, a)
    ppc = build_partial_products(plan) if variant == "parallel" else build_serial_partial_products(plan)
    tile = modular_adder_block(n, m)
    t = max(plan.t_prime, 3)
    mma = build_mma_tree(t, n, m, tile=tile)
    schedule = mma_schedule(t)
    copy = _result_copy(n)

    interleave: list[Link] = []
    for number in range(plan.t_prime):
        spec, reg = schedule.consumers[number]
        interleave += _links(ppc.leaf, ("ppc",), f"z{number}", tile.leaf, ("mma", spec.label), reg)

    last = next(
        spec for stage in schedule.stages for spec in stage if spec.outputs == schedule.result
    )
    copy_in = [
        *_links(tile.leaf, ("mma", last.label), "u", copy.leaf, ("out",), "in_u"),
        *_links(tile.leaf, ("mma", last.label), "v", copy.leaf, ("out",), "in_v"),
    ]
    stages = (
        Stage(placements=(Placement(ppc, 1, "ppc"),)),
        Stage(placements=(Placement(mma, 1, "mma"),), links=tuple(interleave)),
        Stage(placements=(Placement(copy, 1, "out"),), links=tuple(copy_in)),
        Stage(
            placements=(Placement(mma.mirror(), 1, "mma"),),
            links=tuple(Link(link.dst, link.src) for link in copy_in),
        ),
        Stage(
            placements=(Placement(ppc.mirror(), 1, "ppc"),),
            links=tuple(Link(link.dst, link.src) for link in interleave),
        ),
    )
    name = f"multiplier[n={n},m={m}]" if variant == "parallel" else f"multiplier[n={n},m={m},a={a}]"
    block = HierCircuit(
        name=name,
        stages=stages,
        kind="multiplier",
        params={"n": n, "m": m, "variant": variant, "a": a, "t_prime": plan.t_prime},
    )
    logger.debug(f"built {name}: t'={plan.t_prime}, {schedule.tile_count} tiles")
    return block


def _formula_block(name: str, formula: FormulaId, n: int) -> HierCircuit:
    bound = evaluate_bound(formula, n)
    cost = ResourceReport(
        depth=math.ceil(bound.depth),
        size=math.ceil(bound.size),
        width=math.ceil(bound.width),
        module_depth=math.ceil(bound.module_depth or 0),
        module_size=math.ceil(bound.module_size or 0),
        module_width=math.ceil(bound.module_width or 1),
    )
    return symbolic(name, cost, n=n)


def build_symbolic_multiplier(n: int, m: int) -> HierCircuit:
    """The parallel multiplier with PPC and tiles priced by their closed forms.

    Stages and the MMA schedule are those of :func:`build_modular_multiplier`;
    teleports between stages are counted rather than linked. Trees of these
    blocks roll up for any ``n`` without building a gate.

    Raises:
        ModulusError: Invalid modulus.
    """
    check_modulus(n, m)
    count = t_prime(n)
    ppc = _formula_block(f"ppc[n={n}]", FormulaId.PPC, n)
    tile = _formula_block(f"tile[n={n},m={m}]", FormulaId.MODULAR_ADDER, n)
    mma = build_mma_tree(max(count, 3), n, m, tile=tile)
    copy = _result_copy(n)
    traffic = n * count
    size = 2 * n + 3
    stages = (
        Stage(placements=(Placement(ppc, 1, "ppc"),)),
        Stage(
            placements=(Placement(mma, 1, "mma"),), teleports=traffic, teleport_layers=1
        ),
        Stage(placements=(Placement(copy, 1, "out"),), teleports=size, teleport_layers=1),
        Stage(
            placements=(Placement(mma.mirror(), 1, "mma"),),
            teleports=size,
            teleport_layers=1,
        ),
        Stage(
            placements=(Placement(ppc.mirror(), 1, "ppc"),),
            teleports=traffic,
            teleport_layers=1,
        ),
    )
    return HierCircuit(
        name=f"multiplier[n={n},m={m},symbolic]",
        stages=stages,
        params={"n": n, "m": m, "t_prime": count},
    )


# --- Semantics ---


def _cse_bits(x: CarrySaveNumber, n: int) -> list[int]:
    return [x.u_bit(s) if part == "u" else x.v_bit(s) for part, s in cse_layout(n)]


def _check_cse(x: CarrySaveNumber, n: int, name: str) -> None:
    limit = 1 << (n + 2)
    if x.u >= limit or x.v >= limit:
        raise ParameterDomainError(
            f"{name} does not fit a {2 * n + 3}-qubit carry-save register",
            context={"u": x.u, "v": x.v, "n": n},
        )


def partial_product_values(plan: PartialProductPlan, x: Any, y: Any = None) -> list[int]:
    """Classical values of the ``t'`` numbers for basis inputs."""
    if plan.variant == "serial":
        value = x.value if isinstance(x, CarrySaveNumber) else int(x)
        if not 0 <= value < (1 << plan.n):
            raise ParameterDomainError(
                f"x does not fit in {plan.n} bits", context={"x": value}
            )
        bits = {(i,): (value >> i) & 1 for i in range(plan.n)}
        return plan.evaluate(bits)
    x, y = (v if isinstance(v, CarrySaveNumber) else CarrySaveNumber(u=int(v)) for v in (x, y))
    _check_cse(x, plan.n, "x")
    _check_cse(y, plan.n, "y")
    xb, yb = _cse_bits(x, plan.n), _cse_bits(y, plan.n)
    bits = {(p, q): xb[p] & yb[q] for p in range(len(xb)) for q in range(len(yb))}
    return plan.evaluate(bits)


def reduce_numbers(numbers: Sequence[int], n: int, m: int) -> CarrySaveNumber:
    """Replay the MMA tree on classical values with the tile oracle."""
    values = list(numbers) + [0] * max(0, 3 - len(numbers))
    schedule = mma_schedule(len(values))
    known = dict(enumerate(values))
    for stage in schedule.stages:
        for spec in stage:
            u, v = oracle_modular_adder(*(known[i] for i in spec.inputs), n, m)
            known[spec.outputs[0]], known[spec.outputs[1]] = u, v
    u_id, v_id = schedule.result
    return CarrySaveNumber(u=known[u_id], v=known[v_id])


def semantic_multiply(x: CarrySaveNumber, y: CarrySaveNumber, n: int, m: int) -> CarrySaveNumber:
    """Value the parallel multiplier leaves in ``out``: congruent to ``x * y``.

    Raises:
        ParameterDomainError: An input exceeds the ``2n+3``-qubit register.
    """
    plan = plan_partial_products(n, m, "parallel")
    return reduce_numbers(partial_product_values(plan, x, y), n, m)


def semantic_multiply_serial(x: int, a: int, n: int, m: int) -> CarrySaveNumber:
    plan = plan_partial_products(n, m, "serial", a)
    return reduce_numbers(partial_product_values(plan, x), n, m)


@register_semantic("ppc")
def _ppc_semantic(block: HierCircuit, inputs) -> list[int]:
    p = block.params
    plan = plan_partial_products(p["n"], p["m"], p["variant"], p.get("a"))
    return partial_product_values(plan, inputs["x"], inputs.get("y"))


@register_semantic("mma")
def _mma_semantic(block: HierCircuit, inputs) -> CarrySaveNumber:
    p = block.params
    numbers = list(inputs["numbers"])
    if len(numbers) != p["t"]:
        raise ParameterDomainError(
            "wrong number of MMA inputs", context={"expected": p["t"], "got": len(numbers)}
        )
    return reduce_numbers(numbers, p["n"], p["m"])


@register_semantic("multiplier")
def _multiplier_semantic(block: HierCircuit, inputs) -> CarrySaveNumber:
    p = block.params
    if p["variant"] == "serial":
        return semantic_multiply_serial(inputs["x"], p["a"], p["n"], p["m"])
    return semantic_multiply(inputs["x"], inputs["y"], p["n"], p["m"])
