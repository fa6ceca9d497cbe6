import csv
import io
import xml.etree.ElementTree as ET

import networkx as nx
import pytest

from csaforge.arith import build_toffoli
from csaforge.circuit import CircuitBuilder
from csaforge.comm import build_teleport
from csaforge.export import (
    CSV_COLUMNS,
    estimate_rows,
    graph_svg,
    layout_svg,
    module_graph,
    to_csv,
    to_dot,
)
from csaforge.formulas import check_bounds
from csaforge.hier import HierCircuit, Link, Placement, PortRef, Stage, leaf
from csaforge.modexp import build_modexp_tree, plan_modexp
from csaforge.mult import build_modular_multiplier
from csaforge.resources import ResourceReport

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def linked():
    toffoli = leaf(build_toffoli())
    link = Link(PortRef(("a",), ("m0", 2)), PortRef(("b",), ("m0", 0)))
    return HierCircuit(
        name="linked",
        stages=(
            Stage(placements=(Placement(toffoli, 1, "a"),)),
            Stage(placements=(Placement(toffoli, 1, "b"),), links=(link, link)),
        ),
    )


class TestModuleGraph:
    def test_flat_circuit(self):
        b = CircuitBuilder("pair")
        left, right = b.qubit((0, 0), "left"), b.qubit((0, 0), "right")
        b.h(left)
        b.teleport(left, right)
        g = module_graph(b.build())
        assert set(g.nodes) == {"left", "right"}
        assert g.edges["left", "right"]["teleports"] == 1

    def test_single_module(self):
        g = module_graph(build_teleport(5))
        assert list(g.nodes) == ["m0"]
        assert g.nodes["m0"]["qubits"] == 5
        assert g.number_of_edges() == 0

    def test_hierarchy_links(self, linked):
        g = module_graph(linked)
        assert set(g.nodes) == {"a/m0", "b/m0"}
        assert g.edges["a/m0", "b/m0"]["teleports"] == 2
        assert sorted(g.nodes["a/m0"]["coords"]) == [(0, 0), (0, 1), (1, 0)]

    def test_reused_labels_counted_once(self):
        block = build_modular_multiplier(2, 3, "serial", a=2)
        g = module_graph(block)
        assert sum(d["qubits"] for _, d in g.nodes(data=True)) == block.rollup().width

    def test_opaque_and_symbolic(self):
        tree = build_modexp_tree(plan_modexp(2, 3, t=4))
        g = module_graph(tree)
        opaque = [name for name, d in g.nodes(data=True) if d.get("opaque")]
        assert sorted(opaque) == ["mul.0", "mul.1"]
        assert g.graph["symbolic_teleports"] == 7


class TestRendering:
    def test_dot(self, linked):
        text = to_dot(module_graph(linked))
        assert text.startswith('graph "linked" {')
        assert '"a/m0" -- "b/m0" [label=2];' in text
        assert text.rstrip().endswith("}")

    def test_dot_quotes(self):
        g = nx.Graph(name='say "hi"')
        g.add_node("m", qubits=1, coords=[])
        assert 'graph "say \\"hi\\"" {' in to_dot(g)

    def test_graph_svg_is_xml(self, linked):
        root = ET.fromstring(graph_svg(module_graph(linked)))
        assert root.tag == f"{SVG}svg"
        assert len(root.findall(f"{SVG}rect")) == 2
        assert len(root.findall(f"{SVG}line")) == 1
        assert len(root.findall(f"{SVG}circle")) == 6

    def test_layout_svg(self):
        root = ET.fromstring(layout_svg(2))
        circles = root.findall(f"{SVG}circle")
        assert circles
        fills = {c.get("fill") for c in circles}
        assert "#4c72b0" in fills
        assert root.find(f"{SVG}title").text == "modular adder tile n=2"


class TestCsv:
    def test_rows_per_metric(self):
        check = check_bounds(ResourceReport(D=6, S=14, W=5), "teleport", 5)
        rows = estimate_rows([("teleport", check)])
        assert [r["metric"] for r in rows][:3] == ["D", "S", "W"]
        text = to_csv(rows)
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert tuple(parsed[0]) == CSV_COLUMNS
        assert next(row for row in parsed if row["metric"] == "S") == {
            "block": "teleport",
            "n": "5",
            "metric": "S",
            "formula": "19.0",
            "constructed": "14",
            "pass": "True",
        }

    def test_empty(self):
        assert to_csv([]) == ",".join(CSV_COLUMNS) + "\n"
