# csaforge/oracle.py
"""Classical reference arithmetic.

Everything here is plain integer arithmetic. The modular-adder replay
reproduces, bit for bit, what the gate-level CSA tile computes on basis
inputs, so simulation results can be compared against it directly.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import ModulusError, ParameterDomainError
from .types import CarrySaveNumber
from .utils import bits_of, from_bits


def check_modulus(n: int, m: int) -> None:
    """Validate an ``n``-bit factoring modulus.

    Raises:
        ParameterDomainError: ``n < 2``.
        ModulusError: ``m`` is even, below 3, or not an ``n``-bit number.
    """
    if n < 2:
        raise ParameterDomainError("modulus bit-length must be at least 2", context={"n": n})
    if m < 3 or m % 2 == 0:
        raise ModulusError("modulus must be odd and at least 3", context={"m": m})
    if not (1 << (n - 1)) <= m < (1 << n):
        raise ModulusError(
            "modulus must satisfy 2^(n-1) <= m < 2^n", context={"n": n, "m": m}
        )


def residues(n: int, m: int) -> tuple[int, int, int]:
    """Residues added back for the three truncated bits.

    Bits ``v(n+1)`` and ``u(n+1)`` both weigh ``2^(n+1)``; ``v(n+2)`` weighs
    ``2^(n+2)``.
    """
    check_modulus(n, m)
    r = pow(2, n + 1, m)
    return r, r, pow(2, n + 2, m)


def oracle_csa_bit(a: int, b: int, c: int) -> tuple[int, int]:
    """Single-bit 3-2 adder: (parity, majority)."""
    return a ^ b ^ c, (a & b) | (a & c) | (b & c)


def oracle_two_two(x: int, y: int) -> tuple[int, int]:
    """Single-bit 2-2 adder: (xor, and)."""
    return x ^ y, x & y


class AdderTrace(BaseModel):
    """Layer-by-layer replay of the four-layer modular adder."""

    model_config = ConfigDict(frozen=True)

    n: int
    m: int
    layers: list[CarrySaveNumber] = Field(description="Full (u, v) after each layer")
    controls: dict[str, int] = Field(
        description="Truncated bits driving layers 2-4, keyed like 'v4', 'u4', 'v5' for n=3"
    )
    result: CarrySaveNumber


def _reduce(
    cur_u: list[int], cur_v: list[int], control: int, residue: int, n: int
) -> tuple[list[int], list[int]]:
    c = bits_of(residue * control, n)
    new_u = [0] * (n + 1)
    new_v = [0] * (n + 2)
    new_u[0], new_v[1] = oracle_two_two(cur_u[0], c[0])
    for k in range(1, n):
        new_u[k], new_v[k + 1] = oracle_csa_bit(cur_v[k], cur_u[k], c[k])
    new_u[n], new_v[n + 1] = oracle_two_two(cur_v[n], cur_u[n])
    return new_u, new_v


def modular_adder_trace(a: int, b: int, c: int, n: int, m: int) -> AdderTrace:
    """Replay the CSA tile on ``(n+2)``-bit inputs ``a, b, c``.

    Layer 1 is a plain carry-save addition. Layers 2, 3 and 4 drop
    ``v(n+1)``, ``u(n+1)`` and ``v(n+2)`` and add back the matching residue
    conditioned on each. The overflow ``v'(n+1)`` of layer 2 is carried to
    the top position of the output, where layer 4 folds in ``v''(n+1)``;
    the two are never both set.

    Raises:
        ModulusError: Invalid modulus.
        ParameterDomainError: An input does not fit in ``n+2`` bits.
    """
    r1, r2, r3 = residues(n, m)
    width = n + 2
    for name, value in (("a", a), ("b", b), ("c", c)):
        if not 0 <= value < (1 << width):
            raise ParameterDomainError(
                f"input {name} does not fit in {width} bits", context={name: value}
            )
    bits_a, bits_b, bits_c = bits_of(a, width), bits_of(b, width), bits_of(c, width)
    u1 = [0] * width
    v1 = [0] * (width + 1)
    for k in range(width):
        u1[k], v1[k + 1] = oracle_csa_bit(bits_a[k], bits_b[k], bits_c[k])
    controls = {
        f"v{n + 1}": v1[n + 1],
        f"u{n + 1}": u1[n + 1],
        f"v{n + 2}": v1[n + 2],
    }
    u2, v2 = _reduce(u1, v1, v1[n + 1], r1, n)
    u3, v3 = _reduce(u2, v2, u1[n + 1], r2, n)
    forwarded = v2[n + 1]
    u4, v4 = _reduce(u3, v3, v1[n + 2], r3, n)
    if forwarded & v3[n + 1]:  # pragma: no cover
        raise AssertionError("top-position carry must vanish")
    top = forwarded ^ v3[n + 1]
    result = CarrySaveNumber(u=from_bits([*u4[: n + 1], top]), v=from_bits(v4[: n + 2]))
    layers = [
        CarrySaveNumber(u=from_bits(u1), v=from_bits(v1)),
        CarrySaveNumber(u=from_bits(u2), v=from_bits(v2)),
        CarrySaveNumber(u=from_bits([*u3, forwarded]), v=from_bits(v3)),
        result,
    ]
    return AdderTrace(n=n, m=m, layers=layers, controls=controls, result=result)


def oracle_modular_adder(a: int, b: int, c: int, n: int, m: int) -> tuple[int, int]:
    """Output ``(u''', v''')`` of the CSA tile on basis inputs."""
    result = modular_adder_trace(a, b, c, n, m).result
    return result.u, result.v


def oracle_modmul(x: int, y: int, m: int) -> int:
    if m < 2:
        raise ParameterDomainError("modulus must be at least 2", context={"m": m})
    return x * y % m


def oracle_modexp(a: int, x: int, m: int) -> int:
    if m < 2:
        raise ParameterDomainError("modulus must be at least 2", context={"m": m})
    return pow(a, x, m)


# --- Test vectors ---


class TestVectorSet(BaseModel):
    """Inputs with oracle-computed expectations for one block."""

    __test__ = False  # not a pytest class

    name: str
    params: dict[str, Any]
    vectors: list[tuple[tuple[int, ...], Any]]

    def __len__(self) -> int:
        return len(self.vectors)

    def inputs(self) -> list[tuple[int, ...]]:
        return [inputs for inputs, _ in self.vectors]


def _adder_domain(params: dict[str, Any]):
    n, m = params["n"], params["m"]
    top = (1 << (n + 2)) - 1
    corners = [(0, 0, 0), (top, top, top), (m - 1, 0, 0), (m, 0, 0), (m, m, m), (m + 1, m - 1, m)]
    corners = [v for v in corners if all(0 <= x <= top for x in v)]

    def expected(v):
        return oracle_modular_adder(*v, n, m)

    return 3, top + 1, corners, expected


def _multiplier_domain(params: dict[str, Any]):
    n, m = params["n"], params["m"]
    top = (1 << n) - 1
    corners = [(0, 0), (top, top), (m - 1, m - 1), (1, 1)]
    corners = [v for v in corners if all(0 <= x <= top for x in v)]

    def expected(v):
        return oracle_modmul(v[0], v[1], m)

    return 2, top + 1, corners, expected


def _modexp_domain(params: dict[str, Any]):
    a, m, t = params["a"], params["m"], params["t"]
    corners = [tuple([0] * t), tuple([1] * t)]

    def expected(v):
        return oracle_modexp(a, from_bits(v), m)

    return t, 2, corners, expected


_DOMAINS = {
    "adder": _adder_domain,
    "multiplier": _multiplier_domain,
    "modexp": _modexp_domain,
}


def _exhaustive(arity: int, radix: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(radix), repeat=arity)


def make_vectors(
    block: str, params: dict[str, Any], budget: int | None = None, *, seed: int = 0
) -> TestVectorSet:
    """Corner cases plus seeded random inputs for ``block``.

    Args:
        block: One of ``"adder"``, ``"multiplier"`` or ``"modexp"``.
        params: ``n`` and ``m`` (and ``a``, ``t`` for modexp).
        budget: Total number of vectors; ``None`` or a budget covering the
            whole domain yields every input exactly once.
        seed: Seed for the random fill.

    Raises:
        ParameterDomainError: Unknown block, or a budget below the number of
            corner cases.
    """
    try:
        domain = _DOMAINS[block]
    except KeyError as exc:
        raise ParameterDomainError(
            f"no test vectors for block {block!r}", context={"known": sorted(_DOMAINS)}
        ) from exc
    arity, radix, corners, expected = domain(params)
    total = radix**arity
    if budget is None or budget >= total:
        chosen = list(_exhaustive(arity, radix))
    else:
        corners = list(dict.fromkeys(corners))
        if budget < len(corners):
            raise ParameterDomainError(
                "budget is smaller than the corner cases",
                context={"budget": budget, "corners": len(corners)},
            )
        seen = dict.fromkeys(corners)
        rng = np.random.default_rng(seed)
        while len(seen) < budget:
            seen.setdefault(tuple(int(x) for x in rng.integers(0, radix, size=arity)))
        chosen = list(seen)
    return TestVectorSet(
        name=block,
        params=dict(params),
        vectors=[(v, expected(v)) for v in chosen],
    )
