import json
import math

import pytest

from evtwin.site import (
    SiteEdge,
    SiteError,
    SiteGraph,
    SiteNode,
    default_site,
    from_geojson,
    load_site,
    shortest_travel_time,
    to_geojson,
)


def line_graph():
    """a --300m--> b at 5 m/s, c isolated."""
    nodes = {
        "a": SiteNode("a", "residential", 0, 0),
        "b": SiteNode("b", "parking", 300, 0, area_id="C-Parking"),
        "c": SiteNode("c", "junction", 900, 900),
    }
    return SiteGraph(nodes=nodes, edges=[SiteEdge("a", "b", 300.0, 5.0)])


class TestShortestTravelTime:
    def test_identity_is_zero(self):
        g = line_graph()
        assert shortest_travel_time(g, "a", "a") == 0.0

    def test_single_edge_minutes(self):
        g = line_graph()
        assert shortest_travel_time(g, "a", "b") == pytest.approx(1.0)  # 300/5 = 60 s

    def test_unreachable_sentinel(self):
        g = line_graph()
        assert shortest_travel_time(g, "a", "c") == math.inf
        assert shortest_travel_time(g, "b", "a") == math.inf  # directed

    def test_unknown_node_errors(self):
        g = line_graph()
        with pytest.raises(SiteError, match="unknown node"):
            shortest_travel_time(g, "a", "zz")

    def test_triangle_inequality_on_default_site(self):
        g = default_site()
        ids = sorted(g.nodes)
        for a in ids:
            for b in ids:
                for c in ids:
                    ab = g.travel_minutes(a, b)
                    bc = g.travel_minutes(b, c)
                    ac = g.travel_minutes(a, c)
                    if math.isfinite(ab) and math.isfinite(bc):
                        assert ac <= ab + bc + 1e-9


class TestDefaultSite:
    def test_all_residentials_reach_all_parkings(self):
        g = default_site()
        assert g.validate_connectivity() == []

    def test_parking_areas_present(self):
        g = default_site()
        assert set(g.parking_nodes) == {"C-Parking", "J-Parking"}

    def test_positive_edge_lengths_enforced(self):
        nodes = {
            "a": SiteNode("a", "gate", 0, 0),
            "b": SiteNode("b", "gate", 1, 0),
        }
        with pytest.raises(SiteError, match="length"):
            SiteGraph(nodes=nodes, edges=[SiteEdge("a", "b", 0.0, 5.0)])


class TestGeoJson:
    def test_round_trip(self, tmp_path):
        g = default_site()
        doc = to_geojson(g)
        assert doc["type"] == "FeatureCollection"
        kinds = {f["properties"]["kind"] for f in doc["features"]}
        assert {"residential", "gate", "parking", "road"} <= kinds
        p = tmp_path / "site.geojson"
        p.write_text(json.dumps(doc), encoding="utf-8")
        back = load_site(p)
        assert set(back.nodes) == set(g.nodes)
        for a in g.nodes:
            for b in g.nodes:
                assert back.travel_minutes(a, b) == pytest.approx(
                    g.travel_minutes(a, b), abs=1e-6
                )

    def test_parking_features_carry_area_id(self):
        doc = to_geojson(default_site())
        parks = [
            f for f in doc["features"] if f["properties"].get("kind") == "parking"
        ]
        assert {p["properties"]["area_id"] for p in parks} == {"C-Parking", "J-Parking"}

    def test_road_to_unknown_node_rejected(self):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 1]]},
                    "properties": {"kind": "road", "from": "x", "to": "y"},
                }
            ],
        }
        with pytest.raises(SiteError, match="unknown node"):
            from_geojson(doc)

    def test_position_along_path_interpolates(self):
        g = default_site()
        path = g.path("res-north", g.parking_nodes["C-Parking"])
        assert path is not None
        x0, y0 = g.position_along(path, 0.0)
        x1, y1 = g.position_along(path, 1.0)
        n0, n1 = g.nodes[path[0]], g.nodes[path[-1]]
        assert (x0, y0) == (n0.x, n0.y)
        assert (x1, y1) == (n1.x, n1.y)
        xm, ym = g.position_along(path, 0.5)
        assert (xm, ym) != (x0, y0) and (xm, ym) != (x1, y1)
