from csaforge.circuit import Circuit, CircuitBuilder, Gate, GateKind, Layer, LayerKind, QubitRef
from csaforge.comm import build_fanout
from csaforge.hier import compose, leaf
from csaforge.layout import ArchitectureRules, verify_architecture, verify_modules


def _circuit(*layers, qubits):
    return Circuit("hand", layers=tuple(layers), qubits=tuple(qubits))


def _rules(report):
    return sorted(v.rule for v in report.violations)


class TestArchitecture:
    def test_distant_cnot(self):
        a, b = QubitRef("m0", 0, (0, 0)), QubitRef("m0", 1, (2, 0))
        report = verify_architecture(
            _circuit(Layer((Gate(GateKind.CNOT, (a, b)),), LayerKind.INTRA), qubits=[a, b])
        )
        assert _rules(report) == ["adjacency"]
        assert "not neighbors" in report.text()

    def test_diagonal_is_adjacent(self):
        a, b = QubitRef("m0", 0, (0, 0)), QubitRef("m0", 1, (1, 1))
        report = verify_architecture(
            _circuit(Layer((Gate(GateKind.CNOT, (a, b)),), LayerKind.INTRA), qubits=[a, b])
        )
        assert report.ok
        assert report.text() == "hand: no violations"

    def test_cross_module_cnot(self):
        a, b = QubitRef("m0", 0, (0, 0)), QubitRef("m1", 0, (1, 0))
        report = verify_architecture(
            _circuit(Layer((Gate(GateKind.CNOT, (a, b)),), LayerKind.INTRA), qubits=[a, b])
        )
        assert _rules(report) == ["adjacency"]

    def test_shared_qubit_and_mixed_layer(self):
        a, b = QubitRef("m0", 0, (0, 0)), QubitRef("m1", 0, (0, 0))
        c = QubitRef("m0", 1, (1, 0))
        layer = Layer(
            (Gate(GateKind.TELEPORT, (a, b)), Gate(GateKind.H, (a,)), Gate(GateKind.H, (c,))),
            LayerKind.INTRA,
        )
        report = verify_architecture(_circuit(layer, qubits=[a, b, c]))
        assert _rules(report) == ["concurrency", "timestep_kind"]

    def test_teleport_within_module(self):
        a, b = QubitRef("m0", 0, (0, 0)), QubitRef("m0", 1, (5, 5))
        layer = Layer((Gate(GateKind.TELEPORT, (a, b)),), LayerKind.TELEPORT)
        assert _rules(verify_architecture(_circuit(layer, qubits=[a, b]))) == ["teleport"]

    def test_degree(self):
        b = CircuitBuilder("star")
        center = b.qubit((1, 1))
        for site in [(0, 0), (1, 0), (2, 0)]:
            b.cnot(center, b.qubit(site))
        circuit = b.build()
        assert verify_architecture(circuit).ok
        report = verify_architecture(circuit, ArchitectureRules(max_degree=2))
        assert report.count("degree") == 1

    def test_rules_from_settings(self, monkeypatch):
        from csaforge.config import get_settings

        monkeypatch.setenv("CSA_FORGE_MAX_DEGREE", "3")
        get_settings.cache_clear()
        assert ArchitectureRules.from_settings().max_degree == 3


class TestModules:
    def test_small_block_passes(self):
        report = verify_modules(build_fanout(4), 4)
        assert report.ok
        assert report.resources.width == 10

    def test_module_too_large(self):
        rules = ArchitectureRules(module_linear_bound=1.0)
        report = verify_modules(build_fanout(4), 2, rules)
        assert report.count("module_size") == 1
        assert report.count("width_ratio") == 1

    def test_hierarchy_checks_each_leaf_module(self):
        block = compose([[(leaf(build_fanout(4)), 3)]])
        rules = ArchitectureRules(module_linear_bound=2.5)
        report = verify_modules(block, 2, rules)
        # three copies of ten qubits against a bound of ten per module
        assert report.count("module_size") == 0
        assert report.count("width_ratio") == 0
        assert report.resources.module_width == 3
