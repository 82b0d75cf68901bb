"""Site graph: typed nodes, directed road edges, travel times and GeoJSON I/O.

The simulator only needs travel times between nodes; coordinates exist so
the dashboard can draw a map. The GeoJSON schema is documented in the
README: Point features for nodes (``properties.kind`` in {residential,
gate, parking, building}), LineString features for roads with
``properties.kind == "road"``, ``from``/``to`` node ids, ``speed_m_s``,
``lanes`` and optional ``oneway``.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

UNREACHABLE = math.inf

NODE_KINDS = ("residential", "gate", "parking", "junction")


class SiteError(ValueError):
    """Raised for malformed site files or unknown node references."""


@dataclass(frozen=True)
class SiteNode:
    node_id: str
    kind: str
    x: float
    y: float
    area_id: str | None = None


@dataclass(frozen=True)
class SiteEdge:
    from_node: str
    to_node: str
    length_m: float
    speed_m_s: float
    lanes: int = 1


@dataclass
class SiteGraph:
    nodes: dict[str, SiteNode]
    edges: list[SiteEdge]
    _adj: dict[str, list[tuple[str, float]]] = field(default_factory=dict, repr=False)
    _paths: dict[str, dict[str, tuple[float, list[str]]]] = field(
        default_factory=dict, repr=False
    )

    def __post_init__(self):
        for e in self.edges:
            if e.length_m <= 0:
                raise SiteError(f"edge {e.from_node}->{e.to_node} has length {e.length_m}")
            if e.from_node not in self.nodes or e.to_node not in self.nodes:
                raise SiteError(f"edge {e.from_node}->{e.to_node} references unknown node")
            self._adj.setdefault(e.from_node, []).append(
                (e.to_node, (e.length_m / e.speed_m_s) / 60.0)
            )

    @property
    def parking_nodes(self) -> dict[str, str]:
        """Map area_id -> node_id for parking nodes."""
        return {
            n.area_id: n.node_id
            for n in self.nodes.values()
            if n.kind == "parking" and n.area_id
        }

    def residential_nodes(self) -> list[str]:
        return sorted(n.node_id for n in self.nodes.values() if n.kind == "residential")

    def _dijkstra(self, source: str) -> dict[str, tuple[float, list[str]]]:
        dist: dict[str, float] = {source: 0.0}
        prev: dict[str, str] = {}
        heap = [(0.0, source)]
        seen = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in seen:
                continue
            seen.add(u)
            for v, w in self._adj.get(u, []):
                nd = d + w
                if nd < dist.get(v, UNREACHABLE):
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        out = {}
        for node, d in dist.items():
            path = [node]
            while path[-1] != source:
                path.append(prev[path[-1]])
            out[node] = (d, list(reversed(path)))
        return out

    def _from(self, source: str) -> dict[str, tuple[float, list[str]]]:
        if source not in self._paths:
            self._paths[source] = self._dijkstra(source)
        return self._paths[source]

    def travel_minutes(self, from_node: str, to_node: str) -> float:
        """Minimal travel time in minutes, or the UNREACHABLE sentinel."""
        for n in (from_node, to_node):
            if n not in self.nodes:
                raise SiteError(f"unknown node id {n!r}")
        hit = self._from(from_node).get(to_node)
        return hit[0] if hit else UNREACHABLE

    def path(self, from_node: str, to_node: str) -> list[str] | None:
        hit = self._from(from_node).get(to_node)
        return hit[1] if hit else None

    def position_along(self, path: list[str], fraction: float) -> tuple[float, float]:
        """Coordinates at ``fraction`` in [0,1] of the path's travel time."""
        if len(path) == 1:
            n = self.nodes[path[0]]
            return (n.x, n.y)
        legs = []
        total = 0.0
        for a, b in zip(path, path[1:]):
            w = next(t for v, t in self._adj[a] if v == b)
            legs.append(w)
            total += w
        target = max(0.0, min(1.0, fraction)) * total
        acc = 0.0
        for (a, b), w in zip(zip(path, path[1:]), legs):
            if acc + w >= target or (a, b) == (path[-2], path[-1]):
                f = (target - acc) / w if w > 0 else 1.0
                na, nb = self.nodes[a], self.nodes[b]
                return (na.x + (nb.x - na.x) * f, na.y + (nb.y - na.y) * f)
            acc += w
        n = self.nodes[path[-1]]
        return (n.x, n.y)

    def validate_connectivity(self) -> list[str]:
        """Every residential node must reach every parking node, and the
        route must pass a gate. Returns violation strings (empty when fine)."""
        problems = []
        parks = self.parking_nodes.values()
        for r in self.residential_nodes():
            reach = self._from(r)
            for p in parks:
                if p not in reach:
                    problems.append(f"residential {r} cannot reach parking {p}")
                elif not any(self.nodes[n].kind == "gate" for n in reach[p][1]):
                    problems.append(f"route {r} -> {p} bypasses every gate")
        return problems


def shortest_travel_time(graph: SiteGraph, from_node: str, to_node: str) -> float:
    """Minimal directed travel time in minutes (length/speed summed);
    ``math.inf`` when unreachable."""
    return graph.travel_minutes(from_node, to_node)


def default_site() -> SiteGraph:
    """Synthetic campus site: three residential clusters, three gates, a
    ring of junctions and two parking areas (C-Parking, J-Parking).

    Distances are metres on a local plane, speeds campus-realistic
    (8.33 m/s = 30 km/h), sized after a ~750 x 630 m campus with nearby
    housing.
    """
    nodes = [
        SiteNode("res-north", "residential", 350.0, 1050.0),
        SiteNode("res-east", "residential", 1150.0, 600.0),
        SiteNode("res-west", "residential", -150.0, 520.0),
        SiteNode("gate-1", "gate", 360.0, 640.0),
        SiteNode("gate-2", "gate", 760.0, 420.0),
        SiteNode("gate-3", "gate", 120.0, 360.0),
        SiteNode("jn-1", "junction", 420.0, 470.0),
        SiteNode("jn-2", "junction", 560.0, 330.0),
        SiteNode("park-C", "parking", 470.0, 360.0, area_id="C-Parking"),
        SiteNode("park-J", "parking", 630.0, 240.0, area_id="J-Parking"),
    ]
    v = 8.33
    links = [
        ("res-north", "gate-1", 430.0),
        ("res-east", "gate-2", 420.0),
        ("res-west", "gate-3", 310.0),
        ("gate-1", "jn-1", 180.0),
        ("gate-2", "jn-2", 220.0),
        ("gate-3", "jn-1", 320.0),
        ("jn-1", "park-C", 120.0),
        ("jn-1", "jn-2", 200.0),
        ("jn-2", "park-C", 100.0),
        ("jn-2", "park-J", 120.0),
    ]
    edges = []
    for a, b, length in links:
        edges.append(SiteEdge(a, b, length, v))
        edges.append(SiteEdge(b, a, length, v))
    return SiteGraph(nodes={n.node_id: n for n in nodes}, edges=edges)


def to_geojson(graph: SiteGraph) -> dict:
    features = []
    for n in sorted(graph.nodes.values(), key=lambda n: n.node_id):
        props = {"kind": n.kind, "node_id": n.node_id}
        if n.area_id:
            props["kind"] = "parking"
            props["area_id"] = n.area_id
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [n.x, n.y]},
                "properties": props,
            }
        )
    for e in graph.edges:
        a, b = graph.nodes[e.from_node], graph.nodes[e.to_node]
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[a.x, a.y], [b.x, b.y]],
                },
                "properties": {
                    "kind": "road",
                    "from": e.from_node,
                    "to": e.to_node,
                    "length_m": e.length_m,
                    "speed_m_s": e.speed_m_s,
                    "lanes": e.lanes,
                    "oneway": True,  # each directed edge serialized separately
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}


def from_geojson(doc: dict) -> SiteGraph:
    if doc.get("type") != "FeatureCollection":
        raise SiteError("site file must be a GeoJSON FeatureCollection")
    nodes: dict[str, SiteNode] = {}
    road_feats = []
    for feat in doc.get("features", []):
        geom = feat.get("geometry") or {}
        props = feat.get("properties") or {}
        kind = props.get("kind")
        if geom.get("type") == "Point" and kind in ("residential", "gate", "parking", "junction"):
            nid = props.get("node_id")
            if not nid:
                raise SiteError(f"point feature of kind {kind!r} missing node_id")
            x, y = geom["coordinates"][:2]
            nodes[nid] = SiteNode(nid, kind, float(x), float(y), props.get("area_id"))
        elif kind == "road":
            road_feats.append((geom, props))
        # building/boundary features are decoration for the map; ignored here
    edges = []
    for geom, props in road_feats:
        a, b = props.get("from"), props.get("to")
        if a not in nodes or b not in nodes:
            raise SiteError(f"road {a!r}->{b!r} references unknown node")
        if "length_m" in props:
            length = float(props["length_m"])
        else:
            coords = geom.get("coordinates", [])
            length = 0.0
            for (x1, y1), (x2, y2) in zip(coords, coords[1:]):
                length += math.hypot(x2 - x1, y2 - y1)
        speed = float(props.get("speed_m_s", 8.33))
        lanes = int(props.get("lanes", 1))
        edges.append(SiteEdge(a, b, length, speed, lanes))
        if not props.get("oneway", False):
            edges.append(SiteEdge(b, a, length, speed, lanes))
    return SiteGraph(nodes=nodes, edges=edges)


def load_site(path: str | Path) -> SiteGraph:
    with open(path, encoding="utf-8") as f:
        return from_geojson(json.load(f))
