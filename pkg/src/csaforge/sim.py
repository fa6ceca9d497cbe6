# csaforge/sim.py
"""Sparse statevector simulation with a classical controller.

The state is a mapping from basis index to complex amplitude. Bit ``i`` of a
basis index is the value of the ``i``-th qubit of :attr:`SimState.qubits`.
Measurements collapse the state using either a seeded generator or a forced
outcome vector; classically conditioned gates read the measurement record.

Hierarchical blocks that are too wide for the statevector are executed by
:func:`run_semantic`, which dispatches on the block's ``kind`` to a registered
classical semantic.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from .circuit import Circuit, Gate, GateKind, QubitRef
from .config import get_settings
from .exceptions import (
    ImpossibleOutcome,
    NotSeparable,
    SimulationError,
    SparsityExceeded,
    UnregisteredSemantic,
)
from .types import QubitKey
from .utils import from_bits

if TYPE_CHECKING:
    from .hier import HierCircuit

_SQRT_HALF = 1 / math.sqrt(2)
_T_PHASE = cmath.exp(1j * math.pi / 4)
_PRUNE = 1e-14
_IMPOSSIBLE = 1e-12


def _key(q: QubitRef | QubitKey) -> QubitKey:
    return q.key if isinstance(q, QubitRef) else q


@dataclass
class SimState:
    """Amplitudes over a qubit register plus the classical record.

    Attributes:
        qubits: Register order; qubit ``i`` is bit ``i`` of every basis index.
        amplitudes: Nonzero amplitudes by basis index.
        record: Measurement outcomes by record slot (``None`` until measured).
    """

    qubits: tuple[QubitKey, ...]
    amplitudes: dict[int, complex]
    record: list[int | None] = field(default_factory=list)

    def __post_init__(self):
        self.position = {q: i for i, q in enumerate(self.qubits)}

    @classmethod
    def basis(
        cls, qubits: Iterable[QubitRef | QubitKey], values: Mapping[QubitKey, int] | None = None
    ) -> SimState:
        """The product basis state with the given bits, all others |0>."""
        keys = tuple(dict.fromkeys(_key(q) for q in qubits))
        values = values or {}
        unknown = set(values) - set(keys)
        if unknown:
            raise SimulationError(
                "initial assignment names qubits outside the register",
                context={"qubits": sorted(unknown)},
            )
        index = sum(1 << i for i, q in enumerate(keys) if values.get(q, 0))
        return cls(keys, {index: 1 + 0j})

    @classmethod
    def product(
        cls,
        qubits: Iterable[QubitRef | QubitKey],
        states: Mapping[QubitKey, Sequence[complex]],
    ) -> SimState:
        """Product state with a single-qubit ``(alpha, beta)`` per listed qubit."""
        keys = tuple(dict.fromkeys(_key(q) for q in qubits))
        amplitudes = {0: 1 + 0j}
        for i, q in enumerate(keys):
            alpha, beta = states.get(q, (1, 0))
            grown: dict[int, complex] = {}
            for index, amp in amplitudes.items():
                if alpha:
                    grown[index] = amp * alpha
                if beta:
                    grown[index | (1 << i)] = amp * beta
            amplitudes = grown
        return cls(keys, amplitudes)

    @classmethod
    def from_amplitudes(
        cls,
        qubits: Iterable[QubitRef | QubitKey],
        subset: Sequence[QubitRef | QubitKey],
        amplitudes: Sequence[complex],
    ) -> SimState:
        """A state that is ``amplitudes`` on ``subset`` and |0> elsewhere.

        ``amplitudes[j]`` is the coefficient of the subset basis state whose
        ``k``-th qubit holds bit ``k`` of ``j``.
        """
        keys = tuple(dict.fromkeys(_key(q) for q in qubits))
        position = {q: i for i, q in enumerate(keys)}
        bits = [position[_key(q)] for q in subset]
        state: dict[int, complex] = {}
        for j, amp in enumerate(amplitudes):
            if amp:
                state[sum(1 << bits[k] for k in range(len(bits)) if (j >> k) & 1)] = complex(amp)
        return cls(keys, state)

    def extended(self, qubits: Iterable[QubitRef | QubitKey]) -> SimState:
        """The same state over a register grown by fresh |0> qubits."""
        extra = [k for k in dict.fromkeys(_key(q) for q in qubits) if k not in self.position]
        return SimState((*self.qubits, *extra), dict(self.amplitudes), list(self.record))

    def renamed(self, mapping: Mapping[QubitKey, QubitKey]) -> SimState:
        return SimState(
            tuple(mapping.get(q, q) for q in self.qubits),
            dict(self.amplitudes),
            list(self.record),
        )

    # --- Inspection ---
    @property
    def norm(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def probability(self, q: QubitRef | QubitKey) -> float:
        """Probability that ``q`` measures 1."""
        mask = 1 << self.position[_key(q)]
        return sum(abs(a) ** 2 for k, a in self.amplitudes.items() if k & mask)

    def bit(self, q: QubitRef | QubitKey) -> int:
        """The basis value of ``q``, which must be the same in every branch."""
        p1 = self.probability(q)
        tol = get_settings().tolerance
        if p1 < tol:
            return 0
        if p1 > 1 - tol:
            return 1
        raise SimulationError("qubit is not in a basis state", context={"qubit": _key(q), "p1": p1})

    def value(self, qubits: Sequence[QubitRef | QubitKey | None]) -> int:
        """Little-endian integer read from ``qubits``; ``None`` entries read 0."""
        return from_bits(0 if q is None else self.bit(q) for q in qubits)

    def bits(self) -> dict[QubitKey, int]:
        return {q: self.bit(q) for q in self.qubits}

    def subsystem(self, subset: Sequence[QubitRef | QubitKey]) -> np.ndarray:
        """Pure state of ``subset`` as a vector indexed like :meth:`from_amplitudes`.

        Raises:
            NotSeparable: ``subset`` is entangled with the rest of the register.
        """
        positions = [self.position[_key(q)] for q in subset]
        sub_mask = sum(1 << p for p in positions)
        rest_columns: dict[int, int] = {}
        entries = []
        for index, amp in self.amplitudes.items():
            row = sum(1 << k for k, p in enumerate(positions) if (index >> p) & 1)
            col = rest_columns.setdefault(index & ~sub_mask, len(rest_columns))
            entries.append((row, col, amp))
        matrix = np.zeros((1 << len(positions), max(1, len(rest_columns))), dtype=complex)
        for row, col, amp in entries:
            matrix[row, col] = amp
        u, s, _ = np.linalg.svd(matrix, full_matrices=False)
        tol = get_settings().tolerance
        if len(s) > 1 and s[1] > math.sqrt(tol):
            raise NotSeparable(
                "subset is entangled with the remaining qubits",
                context={"schmidt": [float(x) for x in s[:3]]},
            )
        return u[:, 0]


def fidelity(
    state: SimState,
    subset: Sequence[QubitRef | QubitKey],
    reference: Sequence[complex],
) -> float:
    """``|<reference|psi_subset>|^2`` for a subset unentangled with the rest.

    Raises:
        NotSeparable: The rest of the register is entangled with ``subset``.
    """
    ref = np.asarray(reference, dtype=complex)
    ref = ref / np.linalg.norm(ref)
    psi = state.subsystem(subset)
    return float(min(1.0, abs(np.vdot(ref, psi)) ** 2))


class _Runner:
    def __init__(self, state: SimState, rng: np.random.Generator | None, outcomes, cap: int):
        self.state = state
        self.rng = rng
        self.outcomes = outcomes
        self.cap = cap

    def mask(self, q: QubitRef) -> int:
        try:
            return 1 << self.state.position[q.key]
        except KeyError as exc:
            raise SimulationError("gate acts on a qubit outside the register", context={"qubit": str(q)}) from exc

    def fires(self, gate: Gate) -> bool:
        record = self.state.record
        for bit in gate.cond.bits:
            if bit >= len(record) or record[bit] is None:
                raise SimulationError(
                    "condition reads a record bit that has not been measured",
                    context={"gate": str(gate), "bit": bit},
                )
        return bool(gate.cond.evaluate(record))

    def apply(self, gate: Gate) -> None:
        if not self.fires(gate):
            return
        amps = self.state.amplitudes
        kind = gate.kind
        m = self.mask(gate.qubits[0])
        if kind is GateKind.X:
            self.state.amplitudes = {k ^ m: a for k, a in amps.items()}
        elif kind is GateKind.Z:
            self.state.amplitudes = {k: (-a if k & m else a) for k, a in amps.items()}
        elif kind in (GateKind.T, GateKind.TDG):
            phase = _T_PHASE if kind is GateKind.T else _T_PHASE.conjugate()
            self.state.amplitudes = {k: (a * phase if k & m else a) for k, a in amps.items()}
        elif kind is GateKind.H:
            out: dict[int, complex] = {}
            for k, a in amps.items():
                low = k & ~m
                a = a * _SQRT_HALF
                out[low] = out.get(low, 0) + a
                out[low | m] = out.get(low | m, 0) + (-a if k & m else a)
            self.state.amplitudes = {k: a for k, a in out.items() if abs(a) > _PRUNE}
        elif kind is GateKind.CNOT:
            t = self.mask(gate.qubits[1])
            self.state.amplitudes = {(k ^ t if k & m else k): a for k, a in amps.items()}
        elif kind is GateKind.TELEPORT:
            t = self.mask(gate.qubits[1])
            moved = {}
            for k, a in amps.items():
                src, dst = bool(k & m), bool(k & t)
                moved[(k & ~(m | t)) | (t if src else 0) | (m if dst else 0)] = a
            self.state.amplitudes = moved
        elif kind is GateKind.MEASURE:
            self.measure(gate, m)
        else:  # pragma: no cover
            raise SimulationError(f"no semantics for gate {kind}")

    def measure(self, gate: Gate, m: int) -> None:
        amps = self.state.amplitudes
        p1 = sum(abs(a) ** 2 for k, a in amps.items() if k & m)
        if self.outcomes is not None:
            outcome = int(self.outcomes[gate.slot])
        else:
            outcome = int(self.rng.random() < p1)
        p = p1 if outcome else 1 - p1
        if p < _IMPOSSIBLE:
            raise ImpossibleOutcome(
                "measurement outcome has zero probability",
                context={"qubit": str(gate.qubits[0]), "slot": gate.slot, "outcome": outcome},
            )
        scale = 1 / math.sqrt(p)
        self.state.amplitudes = {
            k: a * scale for k, a in amps.items() if bool(k & m) == bool(outcome)
        }
        record = self.state.record
        if gate.slot >= len(record):
            record.extend([None] * (gate.slot + 1 - len(record)))
        record[gate.slot] = outcome


def run(
    circuit: Circuit,
    initial: Mapping[QubitKey, int] | SimState | None = None,
    *,
    seed: int | None = None,
    outcomes: Sequence[int] | str | None = None,
    cap: int | None = None,
) -> SimState:
    """Simulate ``circuit`` layer by layer.

    Args:
        circuit: The circuit to run.
        initial: Basis value per qubit key (unlisted qubits start in |0>), or
            a prepared :class:`SimState`, which is extended with any circuit
            qubits it lacks.
        seed: Seed for measurement sampling when ``outcomes`` is not given.
        outcomes: Forced outcome per record slot, as a sequence or bitstring.
        cap: Maximum number of nonzero amplitudes; defaults to the configured
            ``sparsity_cap``.

    Returns:
        SimState: The final state, including the measurement record.

    Raises:
        ImpossibleOutcome: A forced outcome has zero probability.
        SparsityExceeded: The state grew beyond ``cap`` amplitudes.
        SimulationError: The norm drifted, or the forced vector is too short.
    """
    settings = get_settings()
    cap = cap or settings.sparsity_cap
    register = [*circuit.qubits]
    for qubits in circuit.registers.values():
        register.extend(q for q in qubits if q is not None)
    if isinstance(initial, SimState):
        state = initial.extended(register)
    else:
        state = SimState.basis(register, initial)
    state.record = [*state.record, *([None] * max(0, circuit.record_size - len(state.record)))]

    if isinstance(outcomes, str):
        outcomes = [int(ch) for ch in outcomes]
    if outcomes is not None and len(outcomes) < circuit.record_size:
        raise SimulationError(
            "forced outcome vector is shorter than the measurement record",
            context={"given": len(outcomes), "needed": circuit.record_size},
        )
    rng = None if outcomes is not None else np.random.default_rng(seed)
    runner = _Runner(state, rng, outcomes, cap)

    for index, layer in enumerate(circuit.layers):
        for gate in layer.gates:
            runner.apply(gate)
            if len(state.amplitudes) > cap:
                raise SparsityExceeded(
                    f"state exceeded {cap} amplitudes",
                    context={"circuit": circuit.name, "layer": index},
                )
        drift = abs(state.norm - 1)
        if drift > settings.tolerance:
            raise SimulationError(
                "state norm drifted", context={"layer": index, "drift": drift}
            )
    logger.debug(
        f"simulated {circuit.name}: {len(state.amplitudes)} amplitudes, "
        f"record={''.join('-' if b is None else str(b) for b in state.record)}"
    )
    return state


def read_registers(state: SimState, circuit: Circuit, names: Iterable[str] | None = None) -> dict[str, int]:
    """Integer values of named registers in a basis-state result."""
    names = circuit.registers if names is None else names
    return {name: state.value(circuit.register(name)) for name in names}


# --- Semantic execution ---

Semantic = Callable[["HierCircuit", Mapping[str, Any]], Any]

_SEMANTICS: dict[str, Semantic] = {}


def register_semantic(kind: str) -> Callable[[Semantic], Semantic]:
    """Register the classical semantic used for blocks of ``kind``.

    Usage::

        @register_semantic("modular_adder")
        def _adder(block, inputs): ...
    """

    def decorator(fn: Semantic) -> Semantic:
        _SEMANTICS[kind] = fn
        return fn

    return decorator


def registered_semantics() -> list[str]:
    return sorted(_SEMANTICS)


def run_semantic(h: HierCircuit, inputs: Mapping[str, Any]) -> Any:
    """Evaluate a block on classical values.

    Inter-module teleports are value-preserving moves, so a block's value
    depends only on its kind, parameters and inputs.

    Raises:
        UnregisteredSemantic: No semantic is registered for ``h.kind``.
    """
    semantic = _SEMANTICS.get(h.kind or "")
    if semantic is None:
        raise UnregisteredSemantic(
            f"block {h.name!r} has no registered semantic",
            context={"kind": h.kind, "known": registered_semantics()},
        )
    logger.debug(f"semantic run of {h.name} ({h.kind})")
    return semantic(h, inputs)
