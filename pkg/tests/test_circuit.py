import pytest

from csaforge.circuit import (
    ALWAYS,
    NEVER,
    Circuit,
    CircuitBuilder,
    Gate,
    GateKind,
    LayerKind,
    ParityExpr,
    QubitRef,
    append_layer,
    validate_layer,
)
from csaforge.exceptions import (
    CircuitError,
    ConcurrencyViolation,
    GateArityError,
    TimestepKindViolation,
)


class TestParityExpr:
    def test_unconditional_default(self):
        assert ALWAYS.is_unconditional
        assert NEVER.is_never
        assert ALWAYS.evaluate([]) == 1

    def test_on_is_xor_of_bits(self):
        expr = ParityExpr.on(0, 2)
        assert expr.evaluate([1, 0, 0]) == 1
        assert expr.evaluate([1, 1, 1]) == 0

    def test_repeated_bits_cancel(self):
        assert ParityExpr.on(1, 1).is_never

    def test_xor_with_always_negates(self):
        expr = ParityExpr.on(0) ^ ALWAYS
        assert expr.evaluate([0]) == 1
        assert expr.evaluate([1]) == 0

    def test_shifted(self):
        assert ParityExpr.on(0, 3).shifted(2).bits == frozenset({2, 5})


class TestGate:
    def test_arity_checked(self):
        q = QubitRef("m0", 0)
        with pytest.raises(GateArityError):
            Gate(GateKind.CNOT, (q,))

    def test_repeated_qubit_rejected(self):
        q = QubitRef("m0", 0)
        with pytest.raises(GateArityError):
            Gate(GateKind.CNOT, (q, q))

    def test_slot_only_on_measurement(self):
        with pytest.raises(GateArityError):
            Gate(GateKind.X, (QubitRef("m0", 0),), slot=0)

    def test_t_adjoint(self):
        assert GateKind.T.adjoint() is GateKind.TDG
        assert GateKind.H.adjoint() is GateKind.H

    def test_qubit_equality_ignores_coord(self):
        assert QubitRef("m0", 1, (0, 0)) == QubitRef("m0", 1, (5, 5))


class TestValidateLayer:
    def test_overlapping_support(self):
        a, b = QubitRef("m0", 0), QubitRef("m0", 1)
        with pytest.raises(ConcurrencyViolation):
            validate_layer([Gate(GateKind.H, (a,)), Gate(GateKind.CNOT, (a, b))])

    def test_teleport_mixed_with_intra(self):
        a, b, c = QubitRef("m0", 0), QubitRef("m1", 0), QubitRef("m0", 1)
        with pytest.raises(TimestepKindViolation):
            validate_layer([Gate(GateKind.TELEPORT, (a, b)), Gate(GateKind.H, (c,))])

    def test_teleport_within_module(self):
        a, b = QubitRef("m0", 0), QubitRef("m0", 1)
        with pytest.raises(TimestepKindViolation):
            validate_layer([Gate(GateKind.TELEPORT, (a, b))])

    def test_kinds(self):
        a, b = QubitRef("m0", 0), QubitRef("m1", 0)
        assert validate_layer([Gate(GateKind.TELEPORT, (a, b))]) is LayerKind.TELEPORT
        assert validate_layer([Gate(GateKind.H, (a,))]) is LayerKind.INTRA


class TestCircuitBuilder:
    def test_as_soon_as_possible(self):
        b = CircuitBuilder("asap")
        q0, q1, q2 = b.qubit((0, 0)), b.qubit((1, 0)), b.qubit((2, 0))
        b.h(q0)
        b.h(q2)
        b.cnot(q0, q1)
        c = b.build()
        assert c.depth == 2
        assert c.size == 3
        assert c.width == 3
        assert len(c.layers[0].gates) == 2

    def test_condition_waits_for_measurement(self):
        b = CircuitBuilder("cond")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.h(q0)
        slot = b.measure(q0)
        b.x(q1, ParityExpr.on(slot))
        c = b.build()
        assert c.depth == 3
        assert c.record_size == 1
        assert c.layers[1].gates[0].slot == 0

    def test_unallocated_record_bit(self):
        b = CircuitBuilder("bad")
        q = b.qubit((0, 0))
        with pytest.raises(CircuitError):
            b.x(q, ParityExpr.on(0))

    def test_never_condition_rejected(self):
        b = CircuitBuilder("never")
        q = b.qubit((0, 0))
        with pytest.raises(CircuitError):
            b.x(q, NEVER)

    def test_occupied_coordinate(self):
        b = CircuitBuilder("dup")
        b.qubit((0, 0))
        with pytest.raises(CircuitError):
            b.qubit((0, 0))
        assert b.at((0, 0)).index == 0
        assert b.at((0, 1)).index == 1

    def test_teleport_gets_its_own_layer(self):
        b = CircuitBuilder("tp")
        a = b.qubit((0, 0), "left")
        c = b.qubit((0, 0), "right")
        d = b.qubit((1, 0), "right")
        b.h(a)
        b.h(d)
        b.teleport(a, c)
        circuit = b.build()
        assert [layer.kind for layer in circuit.layers] == [LayerKind.INTRA, LayerKind.TELEPORT]
        assert circuit.modules == ("left", "right")

    def test_teleport_within_module_rejected(self):
        b = CircuitBuilder("tp")
        with pytest.raises(TimestepKindViolation):
            b.teleport(b.qubit((0, 0)), b.qubit((1, 0)))

    def test_barrier(self):
        b = CircuitBuilder("barrier")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.h(q0)
        b.barrier()
        b.h(q1)
        assert b.build().depth == 2

    def test_hold_delays_next_gate(self):
        b = CircuitBuilder("hold")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.h(q0)
        b.h(q0)
        b.hold(q1, 2)
        b.h(q1)
        c = b.build()
        assert c.depth == 3
        assert [len(layer.gates) for layer in c.layers] == [1, 1, 1]

    def test_hold_never_advances_a_busy_qubit(self):
        b = CircuitBuilder("hold")
        q = b.qubit((0, 0))
        b.h(q)
        b.h(q)
        b.hold(q, 1)
        assert b.ready(q) == 2

    def test_swap_is_three_cnots(self):
        b = CircuitBuilder("swap")
        b.swap(b.qubit((0, 0)), b.qubit((1, 0)))
        c = b.build()
        assert c.size == 3
        assert all(g.kind is GateKind.CNOT for _, g in c.gates())

    def test_registers_and_untouched_qubits(self):
        b = CircuitBuilder("regs")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.h(q0)
        b.register("r", [q0, None, q1])
        c = b.build()
        assert c.register("r") == (q0, None, q1)
        assert c.width == 1
        with pytest.raises(CircuitError):
            c.register("missing")


class TestCircuit:
    def test_extent_and_relocation(self):
        b = CircuitBuilder("ext")
        q0, q1 = b.qubit((0, 0)), b.qubit((2, 1))
        b.cnot(q0, q1)
        c = b.build()
        assert c.extent("m0") == (3, 2)
        assert c.extent("absent") == (0, 0)
        moved = c.relocated(q1, (1, 0))
        assert moved.coord_of(q1) == (1, 0)
        assert moved.extent("m0") == (2, 1)

    def test_append_layer_assigns_slots(self):
        q = QubitRef("m0", 0)
        c = append_layer(Circuit("empty"), [Gate(GateKind.MEASURE, (q,))])
        assert c.record_size == 1
        assert c.layers[0].gates[0].slot == 0

    def test_append_layer_rejects_same_layer_condition(self):
        q = QubitRef("m0", 0)
        with pytest.raises(CircuitError):
            append_layer(Circuit("empty"), [Gate(GateKind.X, (q,), ParityExpr.on(0))])
