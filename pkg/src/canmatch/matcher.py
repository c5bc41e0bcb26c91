"""Locate a reconstructed trajectory on a road network.

A candidate is a simple path in the road graph whose consecutive edge
lengths all agree with the trajectory's edge weights within a tolerance
fraction sigma of the road length. Candidates are ranked by theta, the
mean absolute weight deviation per edge; smaller is better.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    LengthMismatch,
    OracleTooLarge,
    TrajectoryTooShort,
    Truncated,
)
from .roadnet import RoadGraph
from .trajgraph import TrajectoryGraph

DEFAULT_SIGMA_LADDER = (0.05, 0.10, 0.15, 0.20, 0.30, 0.50)
DEFAULT_MAX_CANDIDATES = 100_000


@dataclass(frozen=True)
class MatchConfig:
    sigma_ladder: tuple[float, ...] = DEFAULT_SIGMA_LADDER
    k: int = 5
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    allow_node_reuse: bool = False

    def __post_init__(self):
        ladder = tuple(float(s) for s in self.sigma_ladder)
        object.__setattr__(self, "sigma_ladder", ladder)
        if not ladder:
            raise ValueError("sigma_ladder must not be empty")
        if any(s <= 0 or s > 1 for s in ladder):
            raise ValueError("sigma values must lie in (0, 1]")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("sigma_ladder must be strictly ascending")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be at least 1")


@dataclass(frozen=True)
class CandidatePath:
    """One road path admitted by the tolerance test."""

    node_ids: tuple[str, ...]
    edge_lengths_m: tuple[float, ...]
    residuals_m: tuple[float, ...]
    theta_m: float
    sigma_used: float


@dataclass
class AttackResult:
    """Ranked candidates plus the inputs that produced them."""

    candidates: list[CandidatePath]
    trajectory: TrajectoryGraph
    config: MatchConfig
    sigma_used: float | None = None
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "sigma_used": self.sigma_used,
            "truncated": self.truncated,
            "config": {
                "sigma_ladder": list(self.config.sigma_ladder),
                "k": self.config.k,
                "max_candidates": self.config.max_candidates,
                "allow_node_reuse": self.config.allow_node_reuse,
            },
            "trajectory": self.trajectory.to_dict(),
            "candidates": [
                {
                    "rank": rank,
                    "node_ids": list(c.node_ids),
                    "edge_lengths_m": list(c.edge_lengths_m),
                    "residuals_m": list(c.residuals_m),
                    "theta_m": c.theta_m,
                    "sigma_used": c.sigma_used,
                }
                for rank, c in enumerate(self.candidates, start=1)
            ],
        }


def result_from_dict(doc: dict) -> AttackResult:
    """Rebuild an AttackResult from its JSON form."""
    cfg = doc.get("config", {})
    config = MatchConfig(
        sigma_ladder=tuple(cfg.get("sigma_ladder", DEFAULT_SIGMA_LADDER)),
        k=int(cfg.get("k", 5)),
        max_candidates=int(cfg.get("max_candidates", DEFAULT_MAX_CANDIDATES)),
        allow_node_reuse=bool(cfg.get("allow_node_reuse", False)),
    )
    candidates = [
        CandidatePath(
            node_ids=tuple(c["node_ids"]),
            edge_lengths_m=tuple(c["edge_lengths_m"]),
            residuals_m=tuple(c["residuals_m"]),
            theta_m=float(c["theta_m"]),
            sigma_used=float(c["sigma_used"]),
        )
        for c in doc["candidates"]
    ]
    trajectory = TrajectoryGraph.from_dict(doc["trajectory"])
    return AttackResult(
        candidates=candidates,
        trajectory=trajectory,
        config=config,
        sigma_used=doc.get("sigma_used"),
        truncated=bool(doc.get("truncated", False)),
    )


def _graph_csr(g: RoadGraph):
    """CSR arrays for the kernel, cached on the graph instance."""
    cached = getattr(g, "_csr_cache", None)
    if cached is not None:
        return cached
    ids = sorted(g.nodes)
    index = {nid: i for i, nid in enumerate(ids)}
    deg = np.zeros(len(ids) + 1, dtype=np.int64)
    for e in g.edges:
        deg[index[e.u] + 1] += 1
        deg[index[e.v] + 1] += 1
    indptr = np.cumsum(deg)
    nbrs = np.empty(indptr[-1], dtype=np.int64)
    lens = np.empty(indptr[-1], dtype=np.float64)
    fill = indptr[:-1].copy()
    for u, neighbors in g.adjacency().items():
        ui = index[u]
        for v, w in neighbors:
            nbrs[fill[ui]] = index[v]
            lens[fill[ui]] = w
            fill[ui] += 1
    cached = (ids, indptr, nbrs, lens)
    g._csr_cache = cached
    return cached


def _edge_weights(traj) -> np.ndarray:
    wr = np.asarray(
        traj.edge_weights_m if isinstance(traj, TrajectoryGraph) else traj,
        dtype=np.float64,
    )
    if wr.size < 1:
        raise TrajectoryTooShort("trajectory has no edges to match")
    return wr


def theta(traj, cand: CandidatePath) -> float:
    """Mean absolute weight deviation per edge between trajectory and path."""
    wr = _edge_weights(traj)
    lens = np.asarray(cand.edge_lengths_m, dtype=np.float64)
    if lens.size != wr.size:
        raise LengthMismatch(
            f"candidate has {lens.size} edges, trajectory has {wr.size}"
        )
    return float(np.abs(wr - lens).sum() / wr.size)


def _admits(lens: np.ndarray, wr: np.ndarray, sigma: float) -> bool:
    return bool(np.all(np.abs(lens - wr) <= sigma * lens))


def _dedup_orientations(cands: list[CandidatePath]) -> list[CandidatePath]:
    """Keep one candidate per undirected path: its best-aligned orientation.

    The two traversal directions of one road path score the trajectory
    weights against opposite edge orders, so their thetas differ. The
    lower-theta orientation wins; exact ties keep the smaller node-id
    sequence.
    """
    best: dict[tuple[str, ...], CandidatePath] = {}
    for c in cands:
        key = min(c.node_ids, c.node_ids[::-1])
        cur = best.get(key)
        if cur is None or (c.theta_m, c.node_ids) < (cur.theta_m, cur.node_ids):
            best[key] = c
    return sorted(best.values(), key=lambda c: c.node_ids)


def _build_candidates(
    g: RoadGraph, ids: list[str], index_paths, wr: np.ndarray, sigma: float
) -> list[CandidatePath]:
    adj = g.adjacency()
    length_of = {}
    for e in g.edges:
        length_of[(e.u, e.v)] = e.length_m
        length_of[(e.v, e.u)] = e.length_m
    out = []
    for p in index_paths:
        node_ids = tuple(ids[i] for i in p)
        lens = np.array(
            [length_of[(a, b)] for a, b in zip(node_ids, node_ids[1:])],
            dtype=np.float64,
        )
        residuals = np.abs(lens - wr)
        out.append(
            CandidatePath(
                node_ids=node_ids,
                edge_lengths_m=tuple(float(x) for x in lens),
                residuals_m=tuple(float(x) for x in residuals),
                theta_m=float(residuals.sum() / wr.size),
                sigma_used=sigma,
            )
        )
    return out


def _match_info(
    g: RoadGraph,
    traj,
    sigma: float,
    *,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    allow_node_reuse: bool = False,
) -> tuple[list[CandidatePath], bool]:
    wr = _edge_weights(traj)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ids, indptr, nbrs, lens = _graph_csr(g)
    q = wr.size + 1
    out = np.empty(max_candidates * q, dtype=np.int64)
    count, truncated = _kernels.enumerate_matches(
        indptr, nbrs, lens, wr, float(sigma), max_candidates, allow_node_reuse, out
    )
    raw = [tuple(int(x) for x in out[i * q : (i + 1) * q]) for i in range(count)]
    cands = _dedup_orientations(_build_candidates(g, ids, raw, wr, sigma))
    return cands, bool(truncated)


def match_paths(
    g: RoadGraph,
    traj,
    sigma: float,
    *,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    allow_node_reuse: bool = False,
) -> list[CandidatePath]:
    """All road paths matching the trajectory weights at tolerance sigma.

    Returns one candidate per undirected path, oriented whichever way
    aligns better with the trajectory, in node-id order. Warns Truncated
    and returns a deterministic prefix if more than max_candidates raw
    paths exist.
    """
    cands, truncated = _match_info(
        g,
        traj,
        sigma,
        max_candidates=max_candidates,
        allow_node_reuse=allow_node_reuse,
    )
    if truncated:
        warnings.warn(
            f"enumeration stopped at {max_candidates} paths", Truncated, stacklevel=2
        )
    return cands


def _escalate_info(
    g: RoadGraph, traj, config: MatchConfig
) -> tuple[list[CandidatePath], float | None, bool]:
    cands: list[CandidatePath] = []
    sigma_used = None
    truncated = False
    for sigma in config.sigma_ladder:
        cands, truncated = _match_info(
            g,
            traj,
            sigma,
            max_candidates=config.max_candidates,
            allow_node_reuse=config.allow_node_reuse,
        )
        sigma_used = sigma
        if len(cands) >= config.k:
            break
    return cands, sigma_used, truncated


def escalate_and_match(g: RoadGraph, traj, config: MatchConfig) -> list[CandidatePath]:
    """Climb the sigma ladder until at least k candidates appear.

    Stops at the first rung yielding >= k candidates; if the ladder is
    exhausted, returns whatever the largest sigma produced (possibly
    nothing). Every candidate is tagged with the sigma that admitted it.
    """
    cands, _, truncated = _escalate_info(g, traj, config)
    if truncated:
        warnings.warn(
            f"enumeration stopped at {config.max_candidates} paths",
            Truncated,
            stacklevel=2,
        )
    return cands


def top_k(
    cands: list[CandidatePath],
    k: int,
    *,
    trajectory: TrajectoryGraph | None = None,
    config: MatchConfig | None = None,
) -> AttackResult:
    """Rank candidates by ascending theta (ties: node-id order), keep k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(cands, key=lambda c: (c.theta_m, c.node_ids))[:k]
    sigma_used = ranked[0].sigma_used if ranked else None
    return AttackResult(
        candidates=ranked,
        trajectory=trajectory,
        config=config if config is not None else MatchConfig(k=k),
        sigma_used=sigma_used,
    )


def run_attack(g: RoadGraph, traj: TrajectoryGraph, config: MatchConfig) -> AttackResult:
    """Escalate, rank, and package: the full matching pipeline."""
    cands, sigma_used, truncated = _escalate_info(g, traj, config)
    result = top_k(cands, config.k, trajectory=traj, config=config)
    result.sigma_used = sigma_used
    result.truncated = truncated
    return result


def brute_force_match(
    g: RoadGraph,
    traj,
    sigma: float,
    *,
    allow_node_reuse: bool = False,
    node_limit: int = 200,
) -> list[CandidatePath]:
    """Reference matcher: enumerate every path, then filter.

    Recursively lists all paths with the right node count using adjacency
    only, applies the tolerance test afterwards, and dedups orientations.
    Exists to check match_paths against; refuses graphs over node_limit.
    """
    if len(g.nodes) > node_limit:
        raise OracleTooLarge(f"{len(g.nodes)} nodes exceeds limit {node_limit}")
    wr = _edge_weights(traj)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    q = wr.size + 1
    ids = sorted(g.nodes)
    adj = g.adjacency()
    length_of = {}
    for e in g.edges:
        length_of[(e.u, e.v)] = e.length_m
        length_of[(e.v, e.u)] = e.length_m

    complete: list[tuple[str, ...]] = []
    path: list[str] = []

    def walk(u: str) -> None:
        path.append(u)
        if len(path) == q:
            complete.append(tuple(path))
        else:
            for v, _w in adj[u]:
                if allow_node_reuse or v not in path:
                    walk(v)
        path.pop()

    for start in ids:
        walk(start)

    cands = []
    for p in complete:
        lens = np.array([length_of[(a, b)] for a, b in zip(p, p[1:])])
        if not _admits(lens, wr, sigma):
            continue
        residuals = np.abs(lens - wr)
        cands.append(
            CandidatePath(
                node_ids=p,
                edge_lengths_m=tuple(float(x) for x in lens),
                residuals_m=tuple(float(x) for x in residuals),
                theta_m=float(residuals.sum() / wr.size),
                sigma_used=float(sigma),
            )
        )
    return _dedup_orientations(cands)


def result_to_geojson(result: AttackResult, g: RoadGraph) -> dict:
    """Candidates as a GeoJSON FeatureCollection of LineStrings."""
    features = []
    for rank, c in enumerate(result.candidates, start=1):
        coords = [
            [g.nodes[nid].lon, g.nodes[nid].lat] for nid in c.node_ids
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "rank": rank,
                    "theta_m": c.theta_m,
                    "sigma_used": c.sigma_used,
                    "node_ids": list(c.node_ids),
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}
