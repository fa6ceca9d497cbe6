# csaforge/cli.py
"""Command-line front end: ``csa-forge synth|estimate|simulate|verify|export``.

Every command prints machine-readable output with ``--json`` and returns a
distinct exit code per error family (see :data:`EXIT_CODES`).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import BaseModel

from . import __version__
from .arith import build_modular_adder
from .circuit import Circuit
from .comm import build_bell_measure, build_fanout, build_teleport, build_unfanout
from .config import get_settings
from .estimate import BlockEstimate, estimate_block, resolve_block, sweep
from .exceptions import (
    CircuitError,
    CsaForgeError,
    ParameterDomainError,
    SchemaError,
    SimulationError,
)
from .export import estimate_rows, graph_svg, layout_svg, module_graph, to_csv, to_dot
from .formulas import FormulaId
from .hier import HierCircuit, flatten, leaf
from .layout import ViolationReport, verify_architecture, verify_modules
from .log_config import configure_logging
from .modexp import (
    asymptotic_comparison,
    build_modexp_tree,
    estimate_modexp,
    estimate_serial_modexp,
    plan_modexp,
)
from .mult import build_modular_multiplier
from .schema import dumps, load, loads
from .sim import SimState, fidelity, run, run_semantic
from .utils import bits_of

EXIT_OK = 0
EXIT_VIOLATION = 1

# Checked in order; subclasses come before their bases.
EXIT_CODES: list[tuple[type[CsaForgeError], int]] = [
    (ParameterDomainError, 3),
    (SchemaError, 4),
    (SimulationError, 5),
    (CircuitError, 6),
    (CsaForgeError, 7),
]


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(payload: Any) -> None:
    _emit(json.dumps(payload, indent=2, default=_jsonable))


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(by_alias=True)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


# --- synth ---


def _modulus(n: int, m: int | None) -> int:
    return m if m is not None else (1 << n) - 1


def _write_circuit(
    args: argparse.Namespace, c: Circuit, kind: str | None, params: dict | None
) -> int:
    text = dumps(c, kind, params)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info(f"wrote {c.name} to {args.out}")
    else:
        _emit(text)
    return EXIT_OK


def _synth_comm(args: argparse.Namespace) -> int:
    builders = {
        "bell": lambda: build_bell_measure(),
        "teleport": lambda: build_teleport(args.n, reset=args.reset),
        "fanout": lambda: build_fanout(args.n, reset=args.reset),
        "unfanout": lambda: build_unfanout(args.n, reset=args.reset),
    }
    c = builders[args.prim]()
    return _write_circuit(args, c, args.prim, {"n": args.n})


def _synth_adder(args: argparse.Namespace) -> int:
    m = _modulus(args.n, args.mod)
    c = build_modular_adder(args.n, m)
    return _write_circuit(args, c, "modular_adder", {"n": args.n, "m": m})


def _synth_mult(args: argparse.Namespace) -> int:
    m = _modulus(args.n, args.mod)
    limit = get_settings().flatten_max_n
    if args.n > limit:
        raise ParameterDomainError(
            f"the gate-level multiplier is only written for n <= {limit}",
            context={"n": args.n},
        )
    variant = "serial" if args.serial else "parallel"
    block = build_modular_multiplier(args.n, m, variant, args.base)
    return _write_circuit(args, flatten(block), block.kind, dict(block.params))


def _synth_modexp_tree(args: argparse.Namespace) -> int:
    plan = plan_modexp(args.n, args.mod, args.base, args.t)
    tree = build_modexp_tree(plan)
    summary = {
        "name": tree.name,
        "params": dict(tree.params),
        "levels": plan.levels,
        "stages": [
            {
                "placements": sum(p.count for p in stage.placements),
                "teleports": stage.teleports,
            }
            for stage in tree.stages
        ],
        "resources": tree.rollup().metrics(),
    }
    text = json.dumps(summary, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"wrote {tree.name} summary to {args.out}")
    else:
        _emit(text)
    return EXIT_OK


# --- estimate ---


def _fmt(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{value:.0f}" if float(value).is_integer() else f"{value:.3f}"


def _estimate_table(estimates: Sequence[BlockEstimate]) -> str:
    lines = [f"{'block':<15} {'n':>3} {'metric':<5} {'formula':>18} {'constructed':>14} pass"]
    for est in estimates:
        record = est.as_record()
        for metric, limit in record["formula"].items():
            built = record["constructed"].get(metric)
            verdict = record["pass"].get(metric)
            mark = "-" if verdict is None else ("yes" if verdict else "NO")
            lines.append(
                f"{est.block.value:<15} {est.n:>3} {metric:<5} {_fmt(limit):>18} "
                f"{_fmt(built):>14} {mark}"
            )
    return "\n".join(lines)


def _print_estimates(args: argparse.Namespace, estimates: list[BlockEstimate]) -> int:
    if args.format == "csv":
        checks = [(e.block.value, e.check) for e in estimates if e.check is not None]
        _emit(to_csv(estimate_rows(checks)))
    elif args.json:
        records = [e.as_record() for e in estimates]
        _emit_json(records[0] if len(records) == 1 else records)
    else:
        _emit(_estimate_table(estimates))
    return EXIT_OK if all(e.passed for e in estimates) else EXIT_VIOLATION


def _estimate(args: argparse.Namespace) -> int:
    if args.target == "comparison":
        rows = [r.model_dump() for r in asymptotic_comparison()]
        if args.json:
            _emit_json(rows)
        else:
            for r in rows:
                _emit(
                    f"{r['implementation']:<36} {r['architecture']:<10} "
                    f"{r['depth']:<14} {r['size']:<16} {r['width']}"
                )
        return EXIT_OK
    if args.target == "modexp" and args.serial:
        reports = {n: estimate_serial_modexp(n, args.mod).metrics() for n in args.n}
        if args.json:
            _emit_json({str(n): r for n, r in reports.items()})
        else:
            for n, r in reports.items():
                _emit(f"serial modexp n={n}: " + ", ".join(f"{k}={v}" for k, v in r.items()))
        return EXIT_OK
    if args.target == "modexp" and not args.constructed:
        bounds = {n: estimate_modexp(n).defined() for n in args.n}
        if args.json:
            _emit_json({str(n): b for n, b in bounds.items()})
        else:
            for n, b in bounds.items():
                _emit(f"modexp n={n}: " + ", ".join(f"{k}={_fmt(v)}" for k, v in b.items()))
        return EXIT_OK
    block = args.block or args.target
    if block is None:
        raise ParameterDomainError("estimate needs a target or --block")
    fid = resolve_block(block)
    constructed = fid is not FormulaId.MODEXP or args.constructed
    if len(args.n) == 1:
        estimates = [estimate_block(fid, args.n[0], args.mod, constructed=constructed)]
    else:
        estimates = sweep(fid, args.n, args.mod, constructed=constructed)
    return _print_estimates(args, estimates)


# --- simulate ---


def _initial_values(c: Circuit, values: dict[str, int]) -> dict:
    initial = {}
    for name, value in values.items():
        qubits = c.register(name)
        present = [q for q in qubits if q is not None]
        if value >= 1 << len(qubits):
            raise SimulationError(
                f"value {value} does not fit register {name!r}",
                context={"bits": len(qubits)},
            )
        for q, bit in zip(qubits, bits_of(value, len(qubits)), strict=True):
            if q is None and bit:
                raise SimulationError(f"register {name!r} has no qubit for bit set in {value}")
            if q is not None:
                initial[q.key] = bit
        logger.debug(f"input {name}={value} on {len(present)} qubits")
    return initial


def _parse_sets(args: argparse.Namespace) -> dict[str, int]:
    values = {}
    for name in ("a", "b", "c"):
        if getattr(args, name) is not None:
            values[name] = getattr(args, name)
    for item in args.set or []:
        name, _, raw = item.partition("=")
        if not raw:
            raise ParameterDomainError(f"--set expects NAME=VALUE, got {item!r}")
        values[name] = int(raw, 0)
    return values


def _cat(k: int) -> list[complex]:
    amps = [0j] * (1 << k)
    amps[0] = amps[-1] = complex(1 / math.sqrt(2))
    return amps


def _simulate(args: argparse.Namespace) -> int:
    c, block = _read_circuit(args.file)
    values = _parse_sets(args)
    if args.semantic:
        if block is None:
            raise SimulationError("the circuit file names no block semantic")
        h = leaf(c, block.kind, **block.params)
        result = run_semantic(h, values)
        if args.json:
            _emit_json({"outputs": result})
        else:
            _emit(f"outputs: {result}")
        return EXIT_OK

    initial: Any = _initial_values(c, values)
    if args.prepare == "plus":
        source = [q for q in c.register("source") if q is not None]
        register = [*c.qubits, *(q for bits in c.registers.values() for q in bits if q)]
        s = 1 / math.sqrt(2)
        initial = SimState.product(register, {q.key: (s, s) for q in source})
    state = run(c, initial, seed=args.seed, outcomes=args.outcomes)
    outputs = {}
    for q in dict.fromkeys(q for bits in c.registers.values() for q in bits if q is not None):
        p1 = state.probability(q)
        tol = get_settings().tolerance
        outputs[str(q)] = 0 if p1 < tol else 1 if p1 > 1 - tol else round(p1, 6)
    payload: dict[str, Any] = {"record": state.record, "outputs": outputs}
    if args.prepare == "plus":
        name = "target" if "target" in c.registers else "out"
        target = [q for q in c.register(name) if q is not None]
        payload["fidelity"] = fidelity(state, target, _cat(len(target)))
    if args.json:
        _emit_json(payload)
    else:
        _emit("record: " + "".join("-" if b is None else str(b) for b in state.record))
        for q, bit in outputs.items():
            _emit(f"{q}: {bit}")
        if "fidelity" in payload:
            _emit(f"fidelity: {payload['fidelity']:.12f}")
    return EXIT_OK


# --- verify ---


def _read_circuit(source: str):
    if source == "-":
        return loads(sys.stdin.read())
    return load(source)


def _verify(args: argparse.Namespace) -> int:
    c, block = _read_circuit(args.file)
    reports: list[ViolationReport] = [verify_architecture(c)]
    n = args.n if args.n is not None else (block.params.get("n") if block else None)
    if n is not None:
        reports.append(verify_modules(c, n))
    else:
        logger.info("no register length known; module sizes not checked")
    violations = [v for r in reports for v in r.violations]
    if args.json:
        _emit_json([v.model_dump() for v in violations])
    else:
        for r in reports:
            _emit(r.text())
    return EXIT_OK if not violations else EXIT_VIOLATION


# --- export ---


def _export_source(args: argparse.Namespace) -> HierCircuit | Circuit:
    if args.file:
        return _read_circuit(args.file)[0]
    if args.block is None or args.n is None:
        raise ParameterDomainError("export needs a circuit file or --block with --n")
    fid = resolve_block(args.block)
    m = _modulus(args.n, args.mod)
    if fid is FormulaId.MODULAR_ADDER:
        return build_modular_adder(args.n, m)
    if fid is FormulaId.MM:
        return build_modular_multiplier(args.n, m)
    if fid is FormulaId.MODEXP:
        return build_modexp_tree(plan_modexp(args.n, args.mod, t=args.t))
    raise ParameterDomainError(f"no module graph for block {fid.value}")


def _export(args: argparse.Namespace) -> int:
    if args.format == "csv":
        if args.block is None or args.n is None:
            raise ParameterDomainError("export csv needs --block and --n")
        estimates = sweep(args.block, [args.n], args.mod)
        text = to_csv(estimate_rows((e.block.value, e.check) for e in estimates if e.check))
    elif args.format == "svg" and args.layout:
        if args.n is None:
            raise ParameterDomainError("export svg --layout needs --n")
        text = layout_svg(args.n, args.mod)
    else:
        g = module_graph(_export_source(args))
        text = to_dot(g) if args.format == "dot" else graph_svg(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info(f"wrote {args.format} to {args.out}")
    else:
        _emit(text)
    return EXIT_OK


# --- argument parsing ---


def _parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--log-level", default=None, help="loguru level, e.g. DEBUG")

    parser = argparse.ArgumentParser(
        prog="csa-forge",
        description="Synthesize, verify, estimate and simulate nearest-neighbor factoring circuits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="write a circuit file")
    kinds = synth.add_subparsers(dest="what", required=True)
    comm = kinds.add_parser("comm", parents=[common])
    comm.add_argument("--prim", choices=["bell", "teleport", "fanout", "unfanout"], required=True)
    comm.add_argument("--n", type=int, default=3)
    comm.add_argument("--reset", action="store_true", help="return measured qubits to |0>")
    comm.set_defaults(handler=_synth_comm)
    adder = kinds.add_parser("adder", parents=[common])
    adder.add_argument("--n", type=int, required=True)
    adder.add_argument("--mod", type=int)
    adder.set_defaults(handler=_synth_adder)
    mult = kinds.add_parser("mult", parents=[common])
    mult.add_argument("--n", type=int, required=True)
    mult.add_argument("--mod", type=int)
    mult.add_argument("--serial", action="store_true")
    mult.add_argument("--base", type=int, help="classical multiplier for --serial")
    mult.set_defaults(handler=_synth_mult)
    tree = kinds.add_parser("modexp-tree", parents=[common])
    tree.add_argument("--n", type=int, required=True)
    tree.add_argument("--mod", type=int)
    tree.add_argument("--base", type=int, default=2)
    tree.add_argument("--t", type=int, help="number of leaves (default ksv_constant * n)")
    tree.set_defaults(handler=_synth_modexp_tree)
    for sub in (comm, adder, mult, tree):
        sub.add_argument("--out", help="output file (default stdout)")

    estimate = commands.add_parser("estimate", help="formula vs constructed", parents=[common])
    estimate.add_argument("target", nargs="?", choices=["mult", "modexp", "comparison"])
    estimate.add_argument("--block", help="block id, e.g. adder, fanout, ppc")
    estimate.add_argument("--n", type=int, nargs="+", default=[2])
    estimate.add_argument("--mod", type=int)
    estimate.add_argument("--constructed", action="store_true", help="build and roll up modexp")
    estimate.add_argument("--serial", action="store_true", help="serial modexp estimate")
    estimate.add_argument("--format", choices=["table", "csv"], default="table")
    estimate.set_defaults(handler=_estimate)

    simulate = commands.add_parser("simulate", help="run a circuit file", parents=[common])
    simulate.add_argument("file")
    simulate.add_argument("--a", type=int)
    simulate.add_argument("--b", type=int)
    simulate.add_argument("--c", type=int)
    simulate.add_argument("--set", action="append", metavar="NAME=VALUE")
    outcome = simulate.add_mutually_exclusive_group()
    outcome.add_argument("--seed", type=int)
    outcome.add_argument("--outcomes", help="forced measurement outcomes as a bitstring")
    simulate.add_argument("--semantic", action="store_true", help="classical semantic only")
    simulate.add_argument("--prepare", choices=["plus"], help="source register state")
    simulate.set_defaults(handler=_simulate)

    verify = commands.add_parser("verify", help="check architecture rules", parents=[common])
    verify.add_argument("file", help="circuit file, or - for stdin")
    verify.add_argument("--n", type=int, help="register length for the module check")
    verify.set_defaults(handler=_verify)

    export = commands.add_parser("export", help="DOT, SVG or CSV", parents=[common])
    export.add_argument("format", choices=["dot", "svg", "csv"])
    export.add_argument("file", nargs="?")
    export.add_argument("--block")
    export.add_argument("--n", type=int)
    export.add_argument("--mod", type=int)
    export.add_argument("--t", type=int)
    export.add_argument("--layout", action="store_true", help="svg of the adder tile")
    export.add_argument("--out")
    export.set_defaults(handler=_export)

    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    args = _parse_args(argv)
    try:
        configure_logging(args.log_level)
        return args.handler(args)
    except CsaForgeError as exc:
        code = next(code for cls, code in EXIT_CODES if isinstance(exc, cls))
        logger.error(f"{type(exc).__name__}: {exc}")
        if args.json:
            _emit_json({"error": type(exc).__name__, "message": exc.message, "context": exc.context})
        return code


def cli() -> None:
    sys.exit(main())
