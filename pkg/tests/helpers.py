"""Shared fixtures-by-hand for the test suite.

Graphs built here place nodes on the equator so that haversine distance
equals the intended meter offsets exactly, which keeps expected values
hand-computable.
"""
from __future__ import annotations

import numpy as np

from canmatch.canlog import CanLog, PedalSeries, SpeedSeries
from canmatch.geo import EARTH_RADIUS_M
from canmatch.roadnet import RoadEdge, RoadGraph, RoadNode
from canmatch.trajgraph import TrajectoryGraph, TrajectoryNode

M_TO_DEG_LON = 180.0 / (np.pi * EARTH_RADIUS_M)


def equator_node(node_id: str, x_m: float, lat: float = 0.0) -> RoadNode:
    """Node whose haversine distance from x=0 equals x_m meters."""
    return RoadNode(id=node_id, lat=lat, lon=x_m * M_TO_DEG_LON)


def osm_xml(nodes: dict[str, tuple[float, float]], ways: list[tuple[list[str], str]]) -> str:
    """Minimal OSM XML document with the given nodes and tagged ways."""
    parts = ["<osm>"]
    for nid, (lat, lon) in nodes.items():
        parts.append(f'<node id="{nid}" lat="{lat}" lon="{lon}"/>')
    for i, (refs, highway) in enumerate(ways):
        parts.append(f'<way id="w{i}">')
        parts.extend(f'<nd ref="{r}"/>' for r in refs)
        parts.append(f'<tag k="highway" v="{highway}"/>')
        parts.append("</way>")
    parts.append("</osm>")
    return "".join(parts)


def line_graph(weights: list[float], prefix: str = "n") -> tuple[RoadGraph, list[str]]:
    """Path graph with the given exact edge lengths, ids n0, n1, ..."""
    xs = np.concatenate(([0.0], np.cumsum(weights)))
    ids = [f"{prefix}{i}" for i in range(len(xs))]
    nodes = [equator_node(i, x) for i, x in zip(ids, xs)]
    edges = [
        RoadEdge(a, b, float(w)) for a, b, w in zip(ids, ids[1:], weights)
    ]
    return RoadGraph(nodes, edges), ids


def triangle_graph(a: float = 100.0, b: float = 103.0, c: float = 200.0) -> RoadGraph:
    """Three nodes, edge lengths a (x-y), b (y-z), c (x-z)."""
    nodes = [equator_node("x", 0.0), equator_node("y", a), equator_node("z", a + b)]
    edges = [RoadEdge("x", "y", a), RoadEdge("y", "z", b), RoadEdge("x", "z", c)]
    return RoadGraph(nodes, edges)


def traj_of(weights: list[float]) -> TrajectoryGraph:
    """Trajectory with the given edge weights; node times/kinds are filler."""
    nodes = [
        TrajectoryNode(float(i), "stop" if i % 2 == 0 else "turn")
        for i in range(len(weights) + 1)
    ]
    return TrajectoryGraph(nodes=nodes, edge_weights_m=np.asarray(weights, dtype=np.float64))


def path_weights(g: RoadGraph, ids: list[str]) -> list[float]:
    lut = {}
    for e in g.edges:
        lut[(e.u, e.v)] = e.length_m
        lut[(e.v, e.u)] = e.length_m
    return [lut[(u, v)] for u, v in zip(ids, ids[1:])]


def constant_speed_log(
    speed_kmh: float, duration_s: float, dt_s: float = 1.0, pedal: float = 30.0
) -> CanLog:
    """Flat speed and pedal series sampled on a regular grid."""
    times = np.arange(0.0, duration_s + dt_s / 2, dt_s)
    return CanLog(
        speed=SpeedSeries(times=times, values=np.full(times.size, speed_kmh)),
        pedal=PedalSeries(times=times.copy(), values=np.full(times.size, pedal)),
    )


def random_graph(rng: np.random.Generator, n_hint: int) -> RoadGraph:
    """Sparse connected-ish graph: jittered lattice minus random edges,
    plus a few random chords. Degree stays near 4 so exhaustive path
    enumeration in the oracle remains cheap."""
    from canmatch.simulate import make_synthetic_grid

    side = max(2, int(round(np.sqrt(n_hint))))
    spacing = float(rng.uniform(80.0, 400.0))
    jitter = float(rng.uniform(0.0, 0.25))
    g = make_synthetic_grid(side, spacing, jitter, seed=int(rng.integers(2**31)))
    edges = list(g.edges)
    if len(edges) > 4:
        drop = rng.random(len(edges)) < 0.15
        kept = [e for e, d in zip(edges, drop) if not d]
    else:
        kept = edges
    ids = sorted(g.nodes)
    for _ in range(int(rng.integers(0, 4))):
        u, v = rng.choice(len(ids), size=2, replace=False)
        kept.append(
            RoadEdge(ids[int(u)], ids[int(v)], float(rng.uniform(0.5, 1.5) * spacing))
        )
    return RoadGraph(list(g.nodes.values()), kept)


def some_path(g: RoadGraph, n_nodes: int, rng: np.random.Generator) -> list[str] | None:
    """A random simple path with n_nodes nodes, or None if unlucky."""
    adj = g.adjacency()
    ids = sorted(g.nodes)
    for _ in range(60):
        cur = ids[int(rng.integers(len(ids)))]
        path = [cur]
        while len(path) < n_nodes:
            nxt = [v for v, _ in adj[path[-1]] if v not in path]
            if not nxt:
                break
            path.append(nxt[int(rng.integers(len(nxt)))])
        if len(path) == n_nodes:
            return path
    return None
