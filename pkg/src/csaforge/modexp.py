# csaforge/modexp.py
"""Parallel modular exponentiation and whole-run resource estimates.

Parallel period finding multiplies ``t = 2867 n`` numbers ``a^(2^j)``, each
controlled on a phase-estimation qubit ``p_j``, in a binary tree of modular
multipliers. The tree is built at module level: multipliers are opaque
blocks and the teleports between tree levels are counted, not laid out.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from .circuit import CircuitBuilder
from .config import get_settings
from .exceptions import ParameterDomainError
from .formulas import FormulaId, ResourceBound, evaluate_bound, ksv_t
from .hier import HierCircuit, Placement, Stage, leaf
from .mult import build_modular_multiplier, build_symbolic_multiplier, semantic_multiply
from .oracle import check_modulus
from .resources import ResourceReport
from .sim import register_semantic
from .types import CarrySaveNumber
from .utils import bits_of, third_differences

__all__ = [
    "ComparisonRow",
    "DepthProfile",
    "ModExpPlan",
    "asymptotic_comparison",
    "build_controlled_load",
    "build_modexp_tree",
    "constructed_depth",
    "depth_differences",
    "depth_profile",
    "estimate_modexp",
    "estimate_modexp_constructed",
    "estimate_serial_modexp",
    "ksv_t",
    "plan_modexp",
    "qcla_conversion_resources",
    "semantic_modexp",
]


class ModExpPlan(BaseModel):
    """Leaves of the exponentiation tree.

    Leaf ``j`` holds ``a^(2^j) mod m`` when ``p_j = 1`` and ``1`` otherwise.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    m: int
    a: int
    t: int = Field(ge=2)
    leaf_residues: list[int]

    @property
    def levels(self) -> int:
        """Multiplier stages of the tree."""
        return math.ceil(math.log2(self.t))

    def leaf_values(self, controls: Sequence[int]) -> list[int]:
        if len(controls) != self.t:
            raise ParameterDomainError(
                "one control bit per leaf is required",
                context={"t": self.t, "controls": len(controls)},
            )
        return [r if p else 1 for r, p in zip(self.leaf_residues, controls, strict=True)]


def plan_modexp(n: int, m: int | None = None, a: int = 2, t: int | None = None) -> ModExpPlan:
    """Plan the tree for base ``a`` modulo ``m`` (default ``2^n - 1``).

    Raises:
        ModulusError: Invalid modulus.
        ParameterDomainError: ``t < 2`` or ``a`` not in ``[1, m)``.
    """
    m = m if m is not None else (1 << n) - 1
    check_modulus(n, m)
    t = t if t is not None else ksv_t(n)
    if t < 2:
        raise ParameterDomainError("the tree needs at least two leaves", context={"t": t})
    if not 1 <= a < m:
        raise ParameterDomainError("base must satisfy 1 <= a < m", context={"a": a, "m": m})
    residues = []
    value = a
    for _ in range(t):
        residues.append(value)
        value = value * value % m
    return ModExpPlan(n=n, m=m, a=a, t=t, leaf_residues=residues)


# --- Tree construction ---


def build_controlled_load(n: int, values: Sequence[int]) -> HierCircuit:
    """Write ``value if p else 1`` for one or two operands.

    Operand ``o`` uses rows ``3o`` and ``3o + 1``: the control ``p`` at
    ``(0, 3o)`` is copied along row ``3o`` by a CNOT cascade, the copies
    write the residue bits into row ``3o + 1``, and the cascade is undone.
    """
    if not 1 <= len(values) <= 2:
        raise ParameterDomainError("a load writes one or two operands")
    b = CircuitBuilder(f"load[n={n},{','.join(map(str, values))}]", module="load")
    for o, value in enumerate(values):
        row = 3 * o
        chain = [b.qubit((k, row)) for k in range(n)]
        out = [b.qubit((k, row + 1)) for k in range(n)]
        bits = bits_of(value, n)
        for k in range(1, n):
            b.cnot(chain[k - 1], chain[k])
        for k in range(1, n):
            if bits[k]:
                b.cnot(chain[k], out[k])
        # bit 0 is 1 when p = 0, and bit 0 of the residue when p = 1
        if not bits[0]:
            b.cnot(chain[0], out[0])
        b.x(out[0])
        for k in range(n - 1, 0, -1):
            b.cnot(chain[k - 1], chain[k])
        b.register(f"p{o}", [chain[0]])
        b.register(f"value{o}", out)
    return leaf(b.build(), "controlled_load", values=list(values))


def build_modexp_tree(
    plan: ModExpPlan, multiplier: HierCircuit | None = None
) -> HierCircuit:
    """Multiply the ``t`` leaves pairwise, level by level.

    Slot ``i`` (label ``mul.i``) first loads leaves ``2i`` and ``2i+1`` into
    its multiplier's inputs; each later level multiplies pairs of live slots
    in the left slot after teleporting the right slot's ``2n+3`` result
    qubits over. An odd slot out waits for the next level.

    ``multiplier`` replaces the gate-level multiplier, e.g. with
    :func:`~csaforge.mult.build_symbolic_multiplier` for large ``n``.
    """
    n, m = plan.n, plan.m
    if multiplier is None:
        multiplier = build_modular_multiplier(n, m)
    multiplier = multiplier.as_opaque()
    size = 2 * n + 3

    loads = []
    load_blocks: dict[tuple[int, ...], HierCircuit] = {}
    live: list[int] = []
    pairs = 0
    for i in range(0, plan.t, 2):
        values = plan.leaf_residues[i : i + 2]
        slot = i // 2
        key = tuple(values)
        if key not in load_blocks:
            load_blocks[key] = build_controlled_load(n, values)
        loads.append(Placement(load_blocks[key], 1, f"mul.{slot}"))
        live.append(slot)
        pairs += len(values) == 2
    stages = [Stage(placements=tuple(loads))]
    first = tuple(Placement(multiplier, 1, f"mul.{slot}") for slot in live[:pairs])
    stages.append(Stage(placements=first))
    while len(live) > 1:
        merged = [live[k] for k in range(0, len(live) - 1, 2)]
        carried = live[len(merged) * 2 :]
        stages.append(
            Stage(
                placements=tuple(Placement(multiplier, 1, f"mul.{slot}") for slot in merged),
                teleports=size * len(merged),
                teleport_layers=1,
            )
        )
        live = merged + carried

    tree = HierCircuit(
        name=f"modexp[n={n},m={m},a={plan.a},t={plan.t}]",
        stages=tuple(stages),
        kind="modexp",
        params={"n": n, "m": m, "a": plan.a, "t": plan.t},
    )
    logger.debug(f"built {tree.name}: {len(stages) - 1} multiplier stages")
    return tree


# --- Semantics ---


def _tree_product(values: list[CarrySaveNumber], n: int, m: int) -> CarrySaveNumber:
    workers = get_settings().threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while len(values) > 1:
            lefts, rights = values[0::2], values[1::2]
            products = list(
                pool.map(lambda xy: semantic_multiply(xy[0], xy[1], n, m), zip(lefts, rights))
            )
            values = products + lefts[len(rights) :]
    return values[0]


def semantic_modexp(plan: ModExpPlan, controls: Sequence[int]) -> int:
    """Classical value of the tree: ``a^x mod m`` with ``x = sum p_j 2^j``.

    The carry-save result is converted to a conventional number at the end,
    the step the QCLA performs on the quantum side.
    """
    values = [CarrySaveNumber(u=v) for v in plan.leaf_values(controls)]
    return _tree_product(values, plan.n, plan.m).value % plan.m


@register_semantic("controlled_load")
def _load_semantic(block: HierCircuit, inputs) -> list[int]:
    return [v if p else 1 for v, p in zip(block.params["values"], inputs["p"], strict=True)]


@register_semantic("modexp")
def _modexp_semantic(block: HierCircuit, inputs) -> int:
    p = block.params
    plan = plan_modexp(p["n"], p["m"], p["a"], p["t"])
    return semantic_modexp(plan, inputs["p"])


# --- Estimates ---


def qcla_conversion_resources(n: int) -> ResourceReport:
    """Carry-lookahead conversion of the final carry-save result.

    Only the closed forms are evaluated; values are rounded up.
    """
    bound = evaluate_bound(FormulaId.QCLA, n)
    return ResourceReport(
        depth=math.ceil(bound.depth),
        size=math.ceil(bound.size),
        width=math.ceil(bound.width),
    )


def estimate_modexp(n: int) -> ResourceBound:
    """The closed-form resources of the whole exponentiation."""
    return evaluate_bound(FormulaId.MODEXP, n)


def estimate_modexp_constructed(
    n: int, t: int | None = None, m: int | None = None
) -> ResourceReport:
    """Roll-up of the constructed tree followed by the QCLA conversion."""
    plan = plan_modexp(n, m, t=t)
    report = build_modexp_tree(plan).rollup().then(qcla_conversion_resources(n))
    logger.info(f"constructed modexp n={n} t={plan.t}: {report.metrics()}")
    return report


def estimate_serial_modexp(n: int, m: int | None = None, a: int = 2) -> ResourceReport:
    """One serial multiplier after another, by ``a^(2^j)`` for ``j < 2n``.

    Depth grows as ``n log n``; shown next to the parallel tree.
    """
    m = m if m is not None else (1 << n) - 1
    check_modulus(n, m)
    report = ResourceReport()
    base = a % m
    for _ in range(2 * n):
        block = build_modular_multiplier(n, m, "serial", base)
        report = report.then(block.rollup())
        base = base * base % m
    return report


class DepthProfile(BaseModel):
    """Constructed tree depths over ``n`` and their quadratic fit in ``log2 n``."""

    model_config = ConfigDict(frozen=True)

    ns: list[int]
    depths: list[int]
    coefficients: tuple[float, float, float] = Field(
        description="c2, c1, c0 of c2 log2(n)^2 + c1 log2(n) + c0"
    )
    max_relative_residual: float

    def doubling_ratios(self) -> dict[int, float]:
        """``depth(2n) / depth(n)`` for every sampled ``n`` whose double is sampled."""
        depth = dict(zip(self.ns, self.depths, strict=True))
        return {n: depth[2 * n] / depth[n] for n in self.ns if 2 * n in depth}


def constructed_depth(n: int, t: int | None = None) -> int:
    """Depth of the exponentiation tree built over symbolic multipliers.

    The tree, its loads and every multiplier stage are constructed; only the
    PPC and the tiles are priced by their closed forms. The QCLA conversion
    is not included.
    """
    plan = plan_modexp(n, t=t)
    tree = build_modexp_tree(plan, build_symbolic_multiplier(n, plan.m))
    return tree.rollup().depth


def depth_profile(ns: Sequence[int] = range(2, 17)) -> DepthProfile:
    """Constructed depths for every ``n`` in ``ns`` and a least-squares fit.

    Raises:
        ParameterDomainError: Fewer than three sizes, or one below 2.
    """
    ns = list(ns)
    if len(ns) < 3 or min(ns) < 2:
        raise ParameterDomainError(
            "need at least three sizes n >= 2", context={"ns": ns}
        )
    depths = [constructed_depth(n) for n in ns]
    x = np.log2(ns)
    y = np.asarray(depths, dtype=float)
    coefficients = np.polyfit(x, y, 2)
    residual = np.abs(np.polyval(coefficients, x) - y) / y
    profile = DepthProfile(
        ns=ns,
        depths=depths,
        coefficients=tuple(float(c) for c in coefficients),
        max_relative_residual=float(residual.max()),
    )
    logger.debug(
        f"depth profile n={ns[0]}..{ns[-1]}: fit {profile.coefficients}, "
        f"max residual {profile.max_relative_residual:.3f}"
    )
    return profile


def depth_differences(exponents: Sequence[int] = (1, 2, 3, 4)) -> list[float]:
    """Third-order differences of constructed depths at ``n = 2^k``.

    The samples are evenly spaced in ``log2 n``; a depth quadratic in
    ``log n`` leaves only the rounding of tree levels and MMA heights.

    Raises:
        ParameterDomainError: Fewer than four exponents, or one below 1.
    """
    if len(exponents) < 4 or min(exponents) < 1:
        raise ParameterDomainError(
            "need at least four exponents k >= 1", context={"exponents": list(exponents)}
        )
    return third_differences([constructed_depth(2**k) for k in exponents])


class ComparisonRow(BaseModel):
    implementation: str
    architecture: str
    depth: str
    size: str
    width: str


_COMPARISON = [
    ("Vedral, Barenco, Ekert", "AC", "[O(n^3)]", "O(n^3)", "O(n)"),
    ("Gossett", "AC", "O(n log n)", "[O(n^3 log n)]", "O(n^2)"),
    ("Beauregard", "AC", "O(n^3)", "O(n^3 log n)", "O(n)"),
    ("Zalka", "AC", "O(n^2)", "[O(n^3)]", "O(n)"),
    ("Takahashi, Kunihiro", "AC", "O(n^3)", "O(n^3 log n)", "O(n)"),
    ("Cleve, Watrous", "AC", "O(log^3 n)", "O(n^3)", "[O(n^3 / log^3 n)]"),
    ("Beckman et al.", "Ion trap", "O(n^3)", "O(n^3)", "O(n)"),
    ("Fowler, Devitt, Hollenberg", "1D NTC", "O(n^3)", "O(n^4)", "O(n)"),
    ("Van Meter, Itoh", "1D NTC", "O(n^2 log n)", "[O(n^4 log n)]", "O(n^2)"),
    ("Kutin", "1D NTC", "O(n^2)", "O(n^3)", "O(n)"),
    ("csaforge (CSA tiles, parallel QPF)", "2D CCNTCM", "O(log^2 n)", "O(n^4)", "O(n^4)"),
]


def asymptotic_comparison() -> list[ComparisonRow]:
    """Asymptotic depth, size and width of nearest-neighbor factoring circuits.

    Bracketed entries are depth-width products, an upper bound on size or a
    lower bound inferred the same way.
    """
    return [
        ComparisonRow(implementation=i, architecture=a, depth=d, size=s, width=w)
        for i, a, d, s, w in _COMPARISON
    ]
