# csaforge/estimate.py
"""Constructed-versus-formula estimates per block.

:func:`estimate_block` builds a block (where a construction exists), counts
its resources and compares them with the block's closed form. Sweeps over
several register lengths run on a thread pool capped by ``threads``.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor

from loguru import logger
from pydantic import BaseModel

from .arith import build_modular_adder, build_single_bit_csa, build_toffoli
from .comm import build_bell_measure, build_fanout, build_teleport, build_unfanout
from .config import get_settings
from .exceptions import ParameterDomainError
from .formulas import (
    SCALAR_IDS,
    BoundCheck,
    FormulaId,
    ResourceBound,
    check_bounds,
    evaluate_bound,
)
from .modexp import estimate_modexp_constructed
from .mult import build_modular_multiplier, build_partial_products, plan_partial_products
from .resources import ResourceReport, count_resources

BLOCK_ALIASES = {
    "adder": FormulaId.MODULAR_ADDER,
    "csa": FormulaId.SINGLE_BIT_CSA,
    "mult": FormulaId.MM,
    "multiplier": FormulaId.MM,
}


def _default_modulus(n: int, m: int | None) -> int:
    return m if m is not None else (1 << n) - 1


_BUILDERS: dict[FormulaId, Callable[[int, int | None], ResourceReport]] = {
    FormulaId.BELL: lambda n, m: count_resources(build_bell_measure()),
    FormulaId.TOFFOLI: lambda n, m: count_resources(build_toffoli()),
    FormulaId.SINGLE_BIT_CSA: lambda n, m: count_resources(build_single_bit_csa()),
    FormulaId.TELEPORT: lambda n, m: count_resources(build_teleport(n)),
    FormulaId.FANOUT: lambda n, m: count_resources(build_fanout(n)),
    FormulaId.UNFANOUT: lambda n, m: count_resources(build_unfanout(n)),
    FormulaId.MODULAR_ADDER: lambda n, m: count_resources(
        build_modular_adder(n, _default_modulus(n, m))
    ),
    FormulaId.PPC: lambda n, m: build_partial_products(
        plan_partial_products(n, _default_modulus(n, m))
    ).rollup(),
    FormulaId.MM: lambda n, m: build_modular_multiplier(n, _default_modulus(n, m)).rollup(),
    FormulaId.MODEXP: lambda n, m: estimate_modexp_constructed(n, m=m),
}


def resolve_block(name: str) -> FormulaId:
    """Formula id for a block name or one of its aliases.

    Raises:
        ParameterDomainError: Unknown name, or a scalar formula.
    """
    fid = BLOCK_ALIASES.get(name)
    if fid is None:
        try:
            fid = FormulaId(name)
        except ValueError as exc:
            raise ParameterDomainError(
                f"unknown block {name!r}",
                context={"known": sorted([*BLOCK_ALIASES, *(f.value for f in FormulaId)])},
            ) from exc
    if fid in SCALAR_IDS:
        raise ParameterDomainError(f"{fid.value} is a scalar formula, not a block")
    return fid


class BlockEstimate(BaseModel):
    """Formula values for one block and, when it can be built, the comparison."""

    block: FormulaId
    n: int
    formula: ResourceBound
    check: BoundCheck | None = None

    @property
    def passed(self) -> bool:
        return self.check is None or self.check.passed

    def as_record(self) -> dict:
        """``{id, n, formula, constructed, pass}``; formula-only blocks have
        empty ``constructed`` and ``pass`` entries."""
        if self.check is not None:
            return self.check.as_record()
        return {
            "id": self.block.value,
            "n": self.n,
            "formula": self.formula.defined(),
            "constructed": {},
            "pass": {},
        }


def construct(block: FormulaId | str, n: int, m: int | None = None) -> ResourceReport | None:
    """Counted resources of the built block; ``None`` for formula-only blocks."""
    fid = resolve_block(block) if isinstance(block, str) else block
    builder = _BUILDERS.get(fid)
    if builder is None:
        return None
    return builder(n, m)


def estimate_block(
    block: FormulaId | str, n: int, m: int | None = None, *, constructed: bool = True
) -> BlockEstimate:
    """Evaluate the block's formula and, if asked, compare the construction.

    Raises:
        ParameterDomainError: Unknown block or ``n`` outside the domain.
    """
    fid = resolve_block(block) if isinstance(block, str) else block
    bound = evaluate_bound(fid, n)
    report = construct(fid, n, m) if constructed else None
    check = check_bounds(report, fid, n) if report is not None else None
    logger.info(f"estimate {fid.value} n={n}: {'pass' if check is None or check.passed else 'FAIL'}")
    return BlockEstimate(block=fid, n=n, formula=bound, check=check)


def sweep(
    block: FormulaId | str, ns: Iterable[int], m: int | None = None, *, constructed: bool = True
) -> list[BlockEstimate]:
    """:func:`estimate_block` for several lengths, in order, on worker threads."""
    fid = resolve_block(block) if isinstance(block, str) else block
    ns = list(ns)
    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        return list(pool.map(lambda n: estimate_block(fid, n, m, constructed=constructed), ns))
