# csaforge/export.py
"""Static renderings: module graphs as DOT or SVG, tile layouts as SVG, and
estimate tables as CSV."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from html import escape

import networkx as nx
from loguru import logger

from .arith import tile_layout
from .circuit import Circuit, GateKind
from .formulas import BoundCheck
from .hier import HierCircuit

CSV_COLUMNS = ("block", "n", "metric", "formula", "constructed", "pass")

_ROLE_COLORS = {
    "input": "#4c72b0",
    "output": "#55a868",
    "rail": "#c44e52",
    "work": "#bbbbbb",
}


# --- Module graphs ---


def _add_qubit(g: nx.Graph, module: str, coord: tuple[int, int]) -> None:
    if module not in g:
        g.add_node(module, qubits=0, coords=[])
    g.nodes[module]["qubits"] += 1
    g.nodes[module]["coords"].append(coord)


def _add_teleports(g: nx.Graph, a: str, b: str, count: int = 1) -> None:
    weight = g.edges[a, b]["teleports"] if g.has_edge(a, b) else 0
    g.add_edge(a, b, teleports=weight + count)


def _circuit_graph(c: Circuit) -> nx.Graph:
    g = nx.Graph(name=c.name)
    for q in c.qubits:
        _add_qubit(g, q.module, q.coord)
    for _, gate in c.gates():
        if gate.kind is GateKind.TELEPORT:
            _add_teleports(g, gate.qubits[0].module, gate.qubits[1].module)
    return g


def _collapse(path: tuple[str, ...], opaque: set[tuple[str, ...]]) -> str:
    for i in range(1, len(path) + 1):
        if path[:i] in opaque:
            return "/".join(path[:i])
    return "/".join(path)


def _add_block(
    g: nx.Graph,
    node: HierCircuit,
    prefix: tuple[str, ...],
    opaque: set[tuple[str, ...]],
) -> None:
    if node.leaf is not None:
        for q in node.leaf.qubits:
            _add_qubit(g, "/".join((*prefix, q.module)), q.coord)
        for _, gate in node.leaf.gates():
            if gate.kind is GateKind.TELEPORT:
                a, b = ("/".join((*prefix, q.module)) for q in gate.qubits)
                if a != b:
                    _add_teleports(g, a, b)
        return
    if node.opaque and prefix:
        opaque.add(prefix)
        g.add_node("/".join(prefix), qubits=node.rollup().width, coords=[], opaque=True)
        return
    # a label placed more than once holds the qubits of its widest block
    widest: dict[str, HierCircuit] = {}
    for stage in node.stages:
        for placement in stage.placements:
            for label in placement.instance_labels():
                held = widest.get(label)
                if held is None or placement.block.rollup().width > held.rollup().width:
                    widest[label] = placement.block
    for label, block in widest.items():
        _add_block(g, block, (*prefix, label), opaque)
    for stage in node.stages:
        for link in stage.links:
            a = _collapse((*prefix, *link.src.path, link.src.qubit[0]), opaque)
            b = _collapse((*prefix, *link.dst.path, link.dst.qubit[0]), opaque)
            if a != b and a in g and b in g:
                _add_teleports(g, a, b)
        if stage.teleports:
            g.graph["symbolic_teleports"] = g.graph.get("symbolic_teleports", 0) + stage.teleports


def module_graph(block: HierCircuit | Circuit) -> nx.Graph:
    """Modules as nodes, teleport traffic as edges.

    Nodes carry ``qubits`` and the qubit ``coords``; edges carry
    ``teleports``, the number of qubits moved between the two modules.
    Opaque sub-blocks collapse to one node without coordinates; teleports a
    stage only counts are summed in the graph attribute ``symbolic_teleports``.
    """
    if isinstance(block, Circuit):
        return _circuit_graph(block)
    g = nx.Graph(name=block.name)
    _add_block(g, block, (), set())
    return g


def _quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def to_dot(g: nx.Graph) -> str:
    """Graphviz text for a module graph."""
    lines = [f"graph {_quote(g.graph.get('name') or 'modules')} {{", "  node [shape=box];"]
    for name, data in g.nodes(data=True):
        style = ", style=dashed" if data.get("opaque") else ""
        label = _quote(name + "\\n" + f"{data['qubits']} qubits")
        lines.append(f"  {_quote(name)} [label={label}{style}];")
    for a, b, data in g.edges(data=True):
        lines.append(f"  {_quote(a)} -- {_quote(b)} [label={data['teleports']}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _box(name: str, data: dict, cx: float, cy: float, w: int, h: int) -> list[str]:
    x, y = cx - w / 2, cy - h / 2
    dash = ' stroke-dasharray="4 2"' if data.get("opaque") else ""
    parts = [
        f'<rect x="{x:.1f}" y="{y:.1f}" width="{w}" height="{h}" fill="#f4f4f4" '
        f'stroke="#222"{dash}/>',
        f'<text x="{cx:.1f}" y="{y - 4:.1f}" font-size="10" text-anchor="middle">'
        f"{escape(name)} ({data['qubits']})</text>",
    ]
    coords = data.get("coords") or []
    if coords:
        xs = [c[0] for c in coords]
        ys = [c[1] for c in coords]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
        pitch = (min(w, h) - 8) / span
        for qx, qy in coords:
            px = x + 4 + (qx - min(xs)) * pitch
            py = y + 4 + (qy - min(ys)) * pitch
            parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="1.5" fill="#4c72b0"/>')
    return parts


def graph_svg(g: nx.Graph, size: int = 720, box: tuple[int, int] = (90, 60)) -> str:
    """Module graph: boxes with their qubit grids, arrows for teleports.

    Boxes sit on a circle; arrow width follows the teleport count.
    """
    margin = 100
    positions = nx.circular_layout(g) if len(g) > 1 else {node: (0.0, 0.0) for node in g}
    scale = (size - 2 * margin) / 2

    def xy(node: str) -> tuple[float, float]:
        x, y = positions[node]
        return size / 2 + x * scale, size / 2 - y * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<title>{escape(str(g.graph.get('name', 'modules')))}</title>",
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" '
        'markerWidth="6" markerHeight="6" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#888"/></marker></defs>',
    ]
    heaviest = max((d["teleports"] for *_, d in g.edges(data=True)), default=1)
    for a, b, data in g.edges(data=True):
        (x1, y1), (x2, y2) = xy(a), xy(b)
        width = 1 + 4 * data["teleports"] / heaviest
        parts.append(
            f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
            f'stroke="#888" stroke-width="{width:.2f}" marker-end="url(#arrow)">'
            f"<title>{data['teleports']} teleports</title></line>"
        )
    for name, data in g.nodes(data=True):
        parts.extend(_box(name, data, *xy(name), *box))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- Tile layout ---


def layout_svg(n: int, m: int | None = None, cell: int = 14) -> str:
    """The modular-adder tile's qubit sites, colored by role."""
    sites = tile_layout(n, m)
    xs = [c[0] for _, c in sites]
    ys = [c[1] for _, c in sites]
    x0, y0 = min(xs), min(ys)
    width = (max(xs) - x0 + 1) * cell + 2 * cell
    height = (max(ys) - y0 + 1) * cell + 3 * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>modular adder tile n={n}</title>",
    ]
    for role, (x, y) in sites:
        cx = (x - x0 + 1.5) * cell
        cy = (y - y0 + 1.5) * cell
        parts.append(
            f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{cell * 0.35:.1f}" '
            f'fill="{_ROLE_COLORS[role]}"><title>{role} {x},{y}</title></circle>'
        )
    legend_y = height - cell * 0.6
    for i, (role, color) in enumerate(_ROLE_COLORS.items()):
        lx = cell + i * 5 * cell
        parts.append(f'<rect x="{lx}" y="{legend_y - 8:.1f}" width="8" height="8" fill="{color}"/>')
        parts.append(f'<text x="{lx + 12}" y="{legend_y:.1f}" font-size="9">{role}</text>')
    parts.append("</svg>")
    logger.debug(f"tile layout n={n}: {len(sites)} sites")
    return "\n".join(parts) + "\n"


# --- Estimate tables ---


def estimate_rows(checks: Iterable[tuple[str, BoundCheck]]) -> list[dict]:
    """Flatten bound checks into one row per (block, metric)."""
    rows = []
    for block, check in checks:
        for c in check.checks:
            rows.append(
                {
                    "block": block,
                    "n": check.n,
                    "metric": c.metric,
                    "formula": c.formula,
                    "constructed": c.constructed,
                    "pass": c.passed,
                }
            )
    return rows


def to_csv(rows: Iterable[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()
