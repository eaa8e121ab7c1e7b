"""Calibration dependency graphs.

Each dynamical-decoupling scheme needs a specific set of device parameters
calibrated in a specific order.  The order is captured by a directed acyclic
graph: nodes are parameters, edges are dependencies.  A *strong* dependency
means the child's calibration becomes invalid when the parent drifts; a
*weak* dependency only skews the child slightly, so the child stays valid.

The (node, strong, weak) counts per scheme are the contract here; the exact
wiring is a representative choice with frequencies feeding Rabi rates, Rabi
rates feeding shift measurements, and the per-ion sub-graphs repeated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

_NODE_KINDS = ("frequency", "rabi", "derived")
_EDGE_STRENGTHS = ("weak", "strong")


@dataclass(frozen=True)
class CalNode:
    """A parameter to calibrate."""

    name: str
    kind: str  # frequency | rabi | derived
    per_ion: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if not self.name:
            raise ValueError("node name must be non-empty")


@dataclass(frozen=True)
class CalEdge:
    """A dependency: the child's calibration requires the parent's."""

    parent: str
    child: str
    strength: str  # weak | strong

    def __post_init__(self) -> None:
        if self.strength not in _EDGE_STRENGTHS:
            raise ValueError(f"unknown edge strength {self.strength!r}")


@dataclass(frozen=True)
class CalGraph:
    """Immutable calibration DAG.

    Validation rejects duplicate node names, duplicate edges, edges whose
    endpoints are not in the node set, self-loops, and cycles.
    """

    nodes: tuple[CalNode, ...]
    edges: tuple[CalEdge, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate node names")
        name_set = set(names)
        seen = set()
        for e in self.edges:
            if e.parent not in name_set or e.child not in name_set:
                raise ValueError(f"edge {e.parent}->{e.child} has unknown endpoint")
            if e.parent == e.child:
                raise ValueError(f"self-loop on {e.parent}")
            key = (e.parent, e.child)
            if key in seen:
                raise ValueError(f"duplicate edge {e.parent}->{e.child}")
            seen.add(key)
        self.topological_order()  # raises on cycles

    def node(self, name: str) -> CalNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def children(self, name: str, strength: str | None = None) -> list[str]:
        return [
            e.child
            for e in self.edges
            if e.parent == name and (strength is None or e.strength == strength)
        ]

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; raises ValueError if the graph has a cycle."""
        indeg = {n.name: 0 for n in self.nodes}
        for e in self.edges:
            indeg[e.child] += 1
        ready = sorted(name for name, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            name = ready.pop(0)
            order.append(name)
            for child in sorted(self.children(name)):
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
            ready.sort()
        if len(order) != len(self.nodes):
            raise ValueError("graph contains a cycle")
        return order

    def to_json(self) -> str:
        return json.dumps(
            {
                "nodes": [
                    {"name": n.name, "kind": n.kind, "per_ion": n.per_ion}
                    for n in self.nodes
                ],
                "edges": [
                    {"parent": e.parent, "child": e.child, "strength": e.strength}
                    for e in self.edges
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CalGraph":
        data = json.loads(text)
        nodes = tuple(
            CalNode(d["name"], d["kind"], bool(d.get("per_ion", False)))
            for d in data["nodes"]
        )
        edges = tuple(
            CalEdge(d["parent"], d["child"], d["strength"]) for d in data["edges"]
        )
        return cls(nodes, edges)

    def to_graphviz(self) -> str:
        """Graphviz DOT text; strong edges drawn bold, weak edges thin."""
        lines = ["digraph calibrations {"]
        for n in self.nodes:
            shape = {"frequency": "ellipse", "rabi": "box", "derived": "diamond"}[
                n.kind
            ]
            lines.append(f'  "{n.name}" [shape={shape}];')
        for e in self.edges:
            style = "bold" if e.strength == "strong" else "solid"
            lines.append(f'  "{e.parent}" -> "{e.child}" [style={style}];')
        lines.append("}")
        return "\n".join(lines)


def metrics(graph: CalGraph) -> tuple[int, int, int]:
    """(number of nodes, strong dependencies, weak dependencies)."""
    strong = sum(1 for e in graph.edges if e.strength == "strong")
    weak = len(graph.edges) - strong
    return (len(graph.nodes), strong, weak)


def invalidate(graph: CalGraph, node: str) -> set[str]:
    """Parameters whose calibration is lost when `node` drifts.

    A drift invalidates the node itself and propagates along strong edges
    only: weak children stay valid.  Returns the transitive closure.
    """
    graph.node(node)  # raises KeyError for unknown names
    lost = {node}
    frontier = [node]
    while frontier:
        name = frontier.pop()
        for child in graph.children(name, strength="strong"):
            if child not in lost:
                lost.add(child)
                frontier.append(child)
    return lost


def _two_level_nodes(num_ions: int) -> tuple[CalNode, ...]:
    nodes = []
    for i in range(1, num_ions + 1):
        nodes += [
            CalNode(f"omega_0[{i}]", "frequency", per_ion=True),
            CalNode(f"Omega_r[{i}]", "rabi", per_ion=True),
            CalNode(f"Omega_b[{i}]", "rabi", per_ion=True),
            CalNode(f"Omega_c[{i}]", "rabi", per_ion=True),
            CalNode(f"delta_omega_0[{i}]", "derived", per_ion=True),
        ]
    nodes += [CalNode("nu", "frequency"), CalNode("delta_0", "derived")]
    return tuple(nodes)


def _two_level_edges(num_ions: int, sideband_shift_strong: bool) -> tuple[CalEdge, ...]:
    edges = []
    for i in range(1, num_ions + 1):
        w0, wr, wb = f"omega_0[{i}]", f"Omega_r[{i}]", f"Omega_b[{i}]"
        wc, dsh = f"Omega_c[{i}]", f"delta_omega_0[{i}]"
        edges += [
            CalEdge(w0, wc, "strong"),
            CalEdge(w0, wr, "strong"),
            CalEdge(w0, wb, "strong"),
            CalEdge(wr, dsh, "strong"),
            CalEdge(dsh, "delta_0", "strong"),
            CalEdge("nu", wr, "weak"),
            CalEdge("nu", wb, "weak"),
            CalEdge(wr, "delta_0", "weak"),
            CalEdge(wb, "delta_0", "weak"),
        ]
        if sideband_shift_strong:
            edges += [CalEdge(wb, dsh, "strong"), CalEdge(wc, dsh, "weak")]
    return tuple(edges)


def _multi_level_graph(num_ions: int) -> CalGraph:
    nodes = []
    edges = []
    for i in range(1, num_ions + 1):
        wclk, oclk = f"omega_clk[{i}]", f"Omega_clk[{i}]"
        wp, wm = f"omega_+1[{i}]", f"omega_-1[{i}]"
        op, om = f"Omega_+1[{i}]", f"Omega_-1[{i}]"
        wr, wb = f"Omega_r[{i}]", f"Omega_b[{i}]"
        wd, dsh = f"omega_D[{i}]", f"delta_omega_0[{i}]"
        nodes += [
            CalNode(wclk, "frequency", per_ion=True),
            CalNode(oclk, "rabi", per_ion=True),
            CalNode(wp, "frequency", per_ion=True),
            CalNode(wm, "frequency", per_ion=True),
            CalNode(op, "rabi", per_ion=True),
            CalNode(om, "rabi", per_ion=True),
            CalNode(wr, "rabi", per_ion=True),
            CalNode(wb, "rabi", per_ion=True),
            CalNode(wd, "frequency", per_ion=True),
            CalNode(dsh, "derived", per_ion=True),
        ]
        edges += [
            CalEdge(wclk, oclk, "strong"),
            CalEdge(wclk, wp, "strong"),
            CalEdge(wclk, wm, "strong"),
            CalEdge(wp, op, "strong"),
            CalEdge(wm, om, "strong"),
            CalEdge(wp, wb, "strong"),
            CalEdge(wm, wr, "strong"),
            CalEdge(op, wd, "strong"),
            CalEdge(om, wd, "strong"),
            CalEdge(wd, dsh, "strong"),
            CalEdge("nu", wr, "weak"),
            CalEdge("nu", wb, "weak"),
            CalEdge(oclk, wd, "weak"),
            CalEdge(wr, dsh, "weak"),
            CalEdge(wb, dsh, "weak"),
            CalEdge(dsh, "delta_0", "weak"),
            CalEdge(oclk, dsh, "weak"),
        ]
    nodes += [CalNode("nu", "frequency"), CalNode("delta_0", "derived")]
    return CalGraph(tuple(nodes), tuple(edges))


def build_preset(scheme: str, num_ions: int = 2) -> CalGraph:
    """Calibration graph for a decoupling scheme.

    Schemes and their (nodes, strong, weak) counts at num_ions = 2:

    - "pdd":        (12, 12, 10)
    - "cdd":        (12, 10, 8)   narrative counts (default CDD variant)
    - "cdd-tableI": (12, 12, 10)  summary-table counts, same graph as pdd
    - "mlcdd":      (22, 20, 14)
    """
    if num_ions < 1:
        raise ValueError("num_ions must be >= 1")
    scheme = scheme.lower()
    if scheme in ("pdd", "cdd-tablei"):
        return CalGraph(
            _two_level_nodes(num_ions),
            _two_level_edges(num_ions, sideband_shift_strong=True),
        )
    if scheme == "cdd":
        return CalGraph(
            _two_level_nodes(num_ions),
            _two_level_edges(num_ions, sideband_shift_strong=False),
        )
    if scheme == "mlcdd":
        return _multi_level_graph(num_ions)
    raise ValueError(f"unknown scheme {scheme!r}")
