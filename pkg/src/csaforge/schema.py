# csaforge/schema.py
"""JSON circuit files.

A file carries ``version``, ``modules``, ``qubits`` and ``layers`` (the
public contract) plus the optional ``name``, ``registers`` and ``block``
entries that ``simulate`` uses to find input registers and the semantic of
the block. Loaders accept any ``1.x`` file and reject other majors.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    Layer,
    LayerKind,
    ParityExpr,
    QubitRef,
    validate_layer,
)
from .exceptions import CircuitError, SchemaError, SchemaVersionError

SCHEMA_VERSION = "1.0"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModuleEntry(_Strict):
    id: str
    extent: tuple[int, int]


class QubitEntry(_Strict):
    module: str
    index: int = Field(ge=0)
    coord: tuple[int, int]


class ConditionEntry(_Strict):
    bits: list[int] = Field(default_factory=list)
    const: int = Field(default=1, ge=0, le=1)


class GateEntry(_Strict):
    kind: GateKind
    qubits: list[tuple[str, int]]
    cond: ConditionEntry = Field(default_factory=ConditionEntry)
    slot: int | None = None


class LayerEntry(_Strict):
    kind: LayerKind
    gates: list[GateEntry]


class BlockEntry(_Strict):
    kind: str
    params: dict[str, Any] = Field(default_factory=dict)


class CircuitFile(_Strict):
    """The on-disk form of a :class:`Circuit`."""

    version: str = SCHEMA_VERSION
    name: str = "circuit"
    modules: list[ModuleEntry]
    qubits: list[QubitEntry]
    layers: list[LayerEntry]
    record_size: int = Field(default=0, ge=0)
    registers: dict[str, list[tuple[str, int] | None]] = Field(default_factory=dict)
    block: BlockEntry | None = None


def _check_version(version: Any) -> None:
    major = str(version).split(".", 1)[0]
    if major != SCHEMA_VERSION.split(".", 1)[0]:
        raise SchemaVersionError(
            f"unsupported circuit file version {version!r}",
            context={"supported": SCHEMA_VERSION},
        )


def to_schema(
    c: Circuit, kind: str | None = None, params: dict[str, Any] | None = None
) -> CircuitFile:
    """Describe ``c`` as a circuit file.

    Register qubits that no gate touches are listed with the qubits so that
    every reference resolves.
    """
    qubits: dict[tuple[str, int], QubitRef] = {q.key: q for q in c.qubits}
    for bits in c.registers.values():
        for q in bits:
            if q is not None:
                qubits.setdefault(q.key, q)
    modules = dict.fromkeys(q.module for q in qubits.values())
    extents = {}
    for module in modules:
        xs = [q.coord[0] for q in qubits.values() if q.module == module]
        ys = [q.coord[1] for q in qubits.values() if q.module == module]
        extents[module] = (max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)
    return CircuitFile(
        name=c.name,
        modules=[ModuleEntry(id=m, extent=extents[m]) for m in modules],
        qubits=[QubitEntry(module=q.module, index=q.index, coord=q.coord) for q in qubits.values()],
        layers=[
            LayerEntry(
                kind=layer.kind,
                gates=[
                    GateEntry(
                        kind=g.kind,
                        qubits=[q.key for q in g.qubits],
                        cond=ConditionEntry(bits=sorted(g.cond.bits), const=g.cond.const),
                        slot=g.slot,
                    )
                    for g in layer.gates
                ],
            )
            for layer in c.layers
        ],
        record_size=c.record_size,
        registers={
            name: [q.key if q is not None else None for q in bits]
            for name, bits in c.registers.items()
        },
        block=BlockEntry(kind=kind, params=params or {}) if kind else None,
    )


def from_schema(doc: CircuitFile) -> Circuit:
    """Rebuild the circuit a file describes.

    Raises:
        SchemaVersionError: Unknown major version.
        SchemaError: Dangling qubit references or invalid layers.
    """
    _check_version(doc.version)
    table = {(q.module, q.index): QubitRef(q.module, q.index, q.coord) for q in doc.qubits}

    def ref(key: tuple[str, int]) -> QubitRef:
        try:
            return table[tuple(key)]
        except KeyError as exc:
            raise SchemaError(f"unknown qubit {key}", context={"qubit": list(key)}) from exc

    layers = []
    touched: dict[QubitRef, None] = {}
    for index, entry in enumerate(doc.layers):
        try:
            gates = [
                Gate(
                    g.kind,
                    tuple(ref(k) for k in g.qubits),
                    ParityExpr(frozenset(g.cond.bits), g.cond.const),
                    g.slot,
                )
                for g in entry.gates
            ]
            kind = validate_layer(gates)
        except CircuitError as exc:
            raise SchemaError(f"layer {index}: {exc.message}", context=exc.context) from exc
        if gates and kind is not entry.kind:
            raise SchemaError(f"layer {index} is declared {entry.kind} but holds {kind} gates")
        layers.append(Layer(tuple(gates), entry.kind))
        for g in gates:
            for q in g.qubits:
                touched.setdefault(q)
    registers = {
        name: tuple(ref(k) if k is not None else None for k in bits)
        for name, bits in doc.registers.items()
    }
    return Circuit(
        name=doc.name,
        layers=tuple(layers),
        qubits=tuple(touched),
        record_size=doc.record_size,
        registers=registers,
    )


def dumps(c: Circuit, kind: str | None = None, params: dict[str, Any] | None = None) -> str:
    return to_schema(c, kind, params).model_dump_json(indent=2)


def loads(text: str) -> tuple[Circuit, BlockEntry | None]:
    """Parse a circuit file; returns the circuit and its block entry, if any.

    Raises:
        SchemaVersionError: Unknown major version.
        SchemaError: Malformed JSON or a document that does not fit the schema.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc.msg}", context={"line": exc.lineno}) from exc
    if not isinstance(raw, dict) or "version" not in raw:
        raise SchemaError("circuit file has no version field")
    _check_version(raw["version"])
    try:
        doc = CircuitFile.model_validate(raw)
    except ValidationError as exc:
        raise SchemaError(
            "circuit file does not match the schema",
            context={"errors": exc.error_count(), "first": exc.errors()[0]["msg"]},
        ) from exc
    return from_schema(doc), doc.block


def save(
    c: Circuit, path: Path | str, kind: str | None = None, params: dict[str, Any] | None = None
) -> Path:
    path = Path(path)
    path.write_text(dumps(c, kind, params), encoding="utf-8")
    logger.info(f"wrote {c.name} to {path}")
    return path


def load(path: Path | str) -> tuple[Circuit, BlockEntry | None]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", context={"path": str(path)}) from exc
    return loads(text)
