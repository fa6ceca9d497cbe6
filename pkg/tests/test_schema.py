import json

import pytest

from csaforge.arith import build_toffoli
from csaforge.circuit import CircuitBuilder
from csaforge.comm import build_teleport
from csaforge.exceptions import SchemaError, SchemaVersionError
from csaforge.resources import count_resources
from csaforge.schema import SCHEMA_VERSION, dumps, load, loads, save, to_schema
from csaforge.sim import read_registers, run


def _doc(**overrides):
    doc = {
        "version": "1.0",
        "modules": [{"id": "m0", "extent": [2, 1]}],
        "qubits": [
            {"module": "m0", "index": 0, "coord": [0, 0]},
            {"module": "m0", "index": 1, "coord": [1, 0]},
        ],
        "layers": [
            {"kind": "intra", "gates": [{"kind": "H", "qubits": [["m0", 0]]}]},
            {"kind": "intra", "gates": [{"kind": "CNOT", "qubits": [["m0", 0], ["m0", 1]]}]},
        ],
    }
    doc.update(overrides)
    return json.dumps(doc)


class TestDocument:
    def test_required_fields(self):
        doc = json.loads(dumps(build_teleport(3)))
        assert doc["version"] == SCHEMA_VERSION
        assert {"modules", "qubits", "layers"} <= set(doc)
        assert doc["modules"] == [{"id": "m0", "extent": [3, 1]}]
        assert doc["layers"][0]["gates"][0]["kind"] == "H"

    def test_conditions_and_slots(self):
        doc = to_schema(build_teleport(3))
        corrections = [g for layer in doc.layers for g in layer.gates if g.cond.bits]
        assert {g.kind.value for g in corrections} == {"X", "Z"}
        slots = [g.slot for layer in doc.layers for g in layer.gates if g.slot is not None]
        assert sorted(slots) == list(range(doc.record_size))

    def test_untouched_register_qubits_listed(self):
        b = CircuitBuilder("idle")
        q0, q1 = b.qubit((0, 0)), b.qubit((1, 0))
        b.h(q0)
        b.register("r", [q0, q1])
        doc = to_schema(b.build())
        assert len(doc.qubits) == 2

    def test_block_entry(self):
        text = dumps(build_toffoli(), "toffoli", {"n": 1})
        _, block = loads(text)
        assert block.kind == "toffoli"
        assert block.params == {"n": 1}
        assert loads(dumps(build_toffoli()))[1] is None


class TestRoundTrip:
    def test_teleport_survives(self, tmp_path):
        original = build_teleport(5)
        path = save(original, tmp_path / "teleport.json")
        circuit, _ = load(path)
        assert count_resources(circuit) == count_resources(original)
        assert circuit.register("target") == original.register("target")
        assert [g for _, g in circuit.gates()] == [g for _, g in original.gates()]

    def test_loaded_circuit_simulates(self):
        circuit, _ = loads(dumps(build_toffoli()))
        initial = {circuit.register("x")[0].key: 1, circuit.register("y")[0].key: 1}
        assert read_registers(run(circuit, initial), circuit)["t"] == 1

    def test_minor_version_accepted(self):
        circuit, _ = loads(_doc(version="1.7"))
        assert circuit.depth == 2


class TestRejected:
    def test_major_version(self):
        with pytest.raises(SchemaVersionError):
            loads(_doc(version="2.0"))

    def test_not_json(self):
        with pytest.raises(SchemaError):
            loads("{not json")

    def test_no_version(self):
        with pytest.raises(SchemaError):
            loads(json.dumps({"modules": []}))

    def test_unknown_field(self):
        with pytest.raises(SchemaError):
            loads(_doc(colour="blue"))

    def test_unknown_gate(self):
        layers = [{"kind": "intra", "gates": [{"kind": "Y", "qubits": [["m0", 0]]}]}]
        with pytest.raises(SchemaError):
            loads(_doc(layers=layers))

    def test_dangling_qubit(self):
        layers = [{"kind": "intra", "gates": [{"kind": "H", "qubits": [["m0", 9]]}]}]
        with pytest.raises(SchemaError):
            loads(_doc(layers=layers))

    def test_wrong_arity(self):
        layers = [{"kind": "intra", "gates": [{"kind": "CNOT", "qubits": [["m0", 0]]}]}]
        with pytest.raises(SchemaError):
            loads(_doc(layers=layers))

    def test_shared_qubit_in_layer(self):
        gates = [{"kind": "H", "qubits": [["m0", 0]]}, {"kind": "X", "qubits": [["m0", 0]]}]
        with pytest.raises(SchemaError):
            loads(_doc(layers=[{"kind": "intra", "gates": gates}]))

    def test_declared_kind_mismatch(self):
        layers = [{"kind": "teleport", "gates": [{"kind": "H", "qubits": [["m0", 0]]}]}]
        with pytest.raises(SchemaError):
            loads(_doc(layers=layers))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load(tmp_path / "absent.json")
