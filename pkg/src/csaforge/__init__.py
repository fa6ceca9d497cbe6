"""csaforge: constant-depth carry-save factoring circuits on 2D nearest-neighbor lattices.

This package synthesizes layout-annotated gate-level and hierarchical circuits
for modular addition, multiplication and exponentiation built from carry-save
adder tiles, checks them against the nearest-neighbor architecture rules,
counts their resources against the closed-form bounds, and simulates them
against classical oracles at small register lengths.
"""

try:
    from importlib.metadata import PackageNotFoundError, version as _get_version

    __version__ = _get_version("csaforge")
except PackageNotFoundError:
    __version__ = "0.0.0"
__author__ = "Samuel Mok"
__email__ = "s.mok@utwente.nl"

from .arith import (
    build_csa_layer,
    build_modular_adder,
    build_single_bit_csa,
    build_toffoli,
    build_two_two_adder,
    decode_csa,
    encode_csa,
    modular_adder_block,
    tile_layout,
)
from .circuit import Circuit, CircuitBuilder, Gate, GateKind, Layer, LayerKind, ParityExpr, QubitRef
from .comm import build_bell_measure, build_fanout, build_teleport, build_unfanout
from .config import CsaForgeSettings, get_settings
from .estimate import BlockEstimate, estimate_block, sweep
from .exceptions import (
    AdjacencyError,
    CircuitError,
    ConcurrencyViolation,
    ConfigurationError,
    CsaForgeError,
    GateArityError,
    ImpossibleOutcome,
    ModulusError,
    NotSeparable,
    ParameterDomainError,
    SchemaError,
    SchemaVersionError,
    SimulationError,
    SparsityExceeded,
    TimestepKindViolation,
    UnregisteredSemantic,
    UnsupportedLength,
)
from .formulas import FormulaId, ResourceBound, check_bounds, evaluate
from .hier import HierCircuit, compose, flatten
from .layout import ArchitectureRules, ViolationReport, verify_architecture, verify_modules
from .modexp import (
    build_modexp_tree,
    depth_differences,
    depth_profile,
    estimate_modexp,
    estimate_modexp_constructed,
    estimate_serial_modexp,
    plan_modexp,
    semantic_modexp,
)
from .mult import (
    build_mma_tree,
    build_modular_multiplier,
    build_partial_products,
    build_symbolic_multiplier,
    plan_partial_products,
    semantic_multiply,
)
from .resources import ResourceReport, count_resources
from .schema import load, save
from .sim import SimState, run, run_semantic
from .types import CarrySaveNumber

__all__ = [
    "__version__",
    "__author__",
    "__email__",
    "AdjacencyError",
    "ArchitectureRules",
    "BlockEstimate",
    "CarrySaveNumber",
    "Circuit",
    "CircuitBuilder",
    "CircuitError",
    "ConcurrencyViolation",
    "ConfigurationError",
    "CsaForgeError",
    "CsaForgeSettings",
    "FormulaId",
    "Gate",
    "GateArityError",
    "GateKind",
    "HierCircuit",
    "ImpossibleOutcome",
    "Layer",
    "LayerKind",
    "ModulusError",
    "NotSeparable",
    "ParameterDomainError",
    "ParityExpr",
    "QubitRef",
    "ResourceBound",
    "ResourceReport",
    "SchemaError",
    "SchemaVersionError",
    "SimState",
    "SimulationError",
    "SparsityExceeded",
    "TimestepKindViolation",
    "UnregisteredSemantic",
    "UnsupportedLength",
    "ViolationReport",
    "build_bell_measure",
    "build_csa_layer",
    "build_fanout",
    "build_mma_tree",
    "build_modexp_tree",
    "build_modular_adder",
    "build_modular_multiplier",
    "build_partial_products",
    "build_single_bit_csa",
    "build_symbolic_multiplier",
    "build_teleport",
    "build_toffoli",
    "build_two_two_adder",
    "build_unfanout",
    "check_bounds",
    "compose",
    "count_resources",
    "decode_csa",
    "depth_differences",
    "depth_profile",
    "encode_csa",
    "estimate_block",
    "estimate_modexp",
    "estimate_modexp_constructed",
    "estimate_serial_modexp",
    "evaluate",
    "flatten",
    "get_settings",
    "load",
    "modular_adder_block",
    "plan_modexp",
    "plan_partial_products",
    "run",
    "run_semantic",
    "save",
    "semantic_modexp",
    "semantic_multiply",
    "sweep",
    "tile_layout",
    "verify_architecture",
    "verify_modules",
]
