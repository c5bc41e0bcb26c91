"""Simulator tests: grids, routes, and CAN log synthesis."""
from __future__ import annotations

import numpy as np
import pytest

from canmatch import (
    DriveProfile,
    MatchConfig,
    build_trajectory,
    evaluate,
    make_synthetic_grid,
    run_attack,
    sample_route,
    synthesize_can,
    with_seed,
)
from canmatch.canlog import to_csv
from canmatch.errors import NoSuchPath
from canmatch.trajgraph import EdgeSpan, segment_distance
from helpers import line_graph, path_weights


# --- profile validation


def test_profile_defaults_valid():
    p = DriveProfile()
    assert p.cruise_speed_mps == 10.0
    assert p.sample_period_s == 0.1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"cruise_speed_mps": 0.0},
        {"sample_period_s": -0.1},
        {"stop_dwell_s": (0.0, 5.0)},
        {"stop_dwell_s": (6.0, 5.0)},
        {"turn_slowdown": 1.0},
        {"turn_window_s": 0.05},
        {"pedal_cruise": 15.0},
        {"speed_noise_std": -1.0},
        {"stop_offset_m": -1.0},
        {"event_pattern": "weave"},
        {"lead_in_m": 10.0},
    ],
)
def test_profile_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        DriveProfile(**kwargs)


def test_with_seed_changes_only_the_seed():
    p = DriveProfile()
    p2 = with_seed(p, 99)
    assert p2.seed == 99
    assert with_seed(p2, 0) == p


# --- synthetic grids


def test_smallest_grid_shape():
    g = make_synthetic_grid(2, 100.0, 0.0)
    assert len(g.nodes) == 4
    assert len(g.edges) == 4
    assert all(e.length_m == pytest.approx(100.0, rel=1e-9) for e in g.edges)


def test_unjittered_grid_min_edge_is_spacing():
    # east-west edges shrink sub-micrometer with latitude on the sphere
    g = make_synthetic_grid(3, 250.0, 0.0)
    assert g.min_edge_length_m == pytest.approx(250.0, abs=1e-4)


def test_grid_is_seed_deterministic():
    a = make_synthetic_grid(5, 300.0, 0.2, seed=42)
    b = make_synthetic_grid(5, 300.0, 0.2, seed=42)
    assert a == b
    c = make_synthetic_grid(5, 300.0, 0.2, seed=43)
    assert c != a


def test_grid_rejects_bad_arguments():
    with pytest.raises(ValueError):
        make_synthetic_grid(1, 100.0, 0.0)
    with pytest.raises(ValueError):
        make_synthetic_grid(3, 100.0, 0.6)


def test_grid_edge_count_formula():
    # n*(n-1) horizontal plus n*(n-1) vertical
    g = make_synthetic_grid(4, 200.0, 0.1, seed=3)
    assert len(g.nodes) == 16
    assert len(g.edges) == 24


# --- route sampling


def test_route_on_single_edge_graph():
    g, ids = line_graph([500.0])
    gt = sample_route(g, 2, seed=1)
    assert sorted(gt.node_ids) == sorted(ids)


def test_route_nodes_are_adjacent():
    g = make_synthetic_grid(10, 300.0, 0.1, seed=5)
    adj = g.adjacency()
    for seed in range(10):
        gt = sample_route(g, 5, seed=seed)
        assert len(gt.node_ids) == 5
        for a, b in zip(gt.node_ids, gt.node_ids[1:]):
            assert any(v == b for v, _ in adj[a])


def test_route_longer_than_graph_raises():
    g, _ = line_graph([100.0, 100.0])
    with pytest.raises(NoSuchPath):
        sample_route(g, 10, seed=0)
    with pytest.raises(ValueError):
        sample_route(g, 1, seed=0)


# --- log synthesis


def _two_edge_scenario(dwell: float = 5.0):
    g, ids = line_graph([500.0, 500.0])
    gt = sample_route(g, 3, seed=0)
    profile = DriveProfile(stop_dwell_s=(dwell, dwell), event_pattern="stops")
    return g, synthesize_can(gt, g, profile)


def test_two_edge_route_duration_and_distances():
    # 200 lead-in + 1000 route + 80 tail at 10 m/s = 128 s moving,
    # plus 3 dwells of 5 s
    g, scen = _two_edge_scenario()
    assert scen.log.duration_s == pytest.approx(143.0, abs=2.0)
    zero = np.flatnonzero(scen.log.speed.values == 0.0)
    splits = np.flatnonzero(np.diff(zero) > 1)
    groups = np.split(zero, splits + 1)
    assert len(groups) == 3
    t = scen.log.speed.times
    spans = [
        EdgeSpan(t_a=float(t[g1[0]]), t_b=float(t[g2[0]]))
        for g1, g2 in zip(groups, groups[1:])
    ]
    for span in spans:
        d = segment_distance(scen.log.speed, span)
        assert d == pytest.approx(500.0, rel=0.01)


def test_same_seed_logs_are_byte_identical():
    g = make_synthetic_grid(6, 300.0, 0.1, seed=9)
    gt = sample_route(g, 6, seed=9)
    p = with_seed(DriveProfile(speed_noise_std=0.4), 123)
    a = to_csv(synthesize_can(gt, g, p).log)
    b = to_csv(synthesize_can(gt, g, p).log)
    assert a == b
    c = to_csv(synthesize_can(gt, g, with_seed(p, 124)).log)
    assert c != a


def test_all_stop_pattern_recovers_exactly_q_nodes():
    g = make_synthetic_grid(8, 300.0, 0.1, seed=21)
    for q, seed in ((5, 1), (10, 2), (15, 3)):
        gt = sample_route(g, q, seed=seed)
        scen = synthesize_can(gt, g, DriveProfile(event_pattern="stops"))
        traj = build_trajectory(scen.log, g.min_edge_length_m)
        assert len(traj.nodes) == q
        assert all(n.kind == "stop" for n in traj.nodes)


def test_alternating_pattern_recovers_both_kinds():
    g = make_synthetic_grid(8, 300.0, 0.1, seed=22)
    gt = sample_route(g, 7, seed=4)
    scen = synthesize_can(gt, g, DriveProfile())
    traj = build_trajectory(scen.log, g.min_edge_length_m)
    kinds = [n.kind for n in traj.nodes]
    assert kinds == ["stop", "turn", "stop", "turn", "stop", "turn", "stop"]


def test_zero_speed_only_during_dwells():
    g = make_synthetic_grid(6, 300.0, 0.1, seed=30)
    gt = sample_route(g, 5, seed=30)
    p = with_seed(DriveProfile(speed_noise_std=0.556), 30)
    scen = synthesize_can(gt, g, p)
    v = scen.log.speed.values
    zero = np.flatnonzero(v == 0.0)
    # zero-speed samples come in dwell-length runs, never as isolated dips
    splits = np.flatnonzero(np.diff(zero) > 1)
    for grp in np.split(zero, splits + 1):
        assert grp.size >= 2


def test_route_distance_conserved_within_one_percent():
    g = make_synthetic_grid(7, 280.0, 0.15, seed=40)
    gt = sample_route(g, 8, seed=40)
    scen = synthesize_can(gt, g, DriveProfile(event_pattern="stops"))
    traj = build_trajectory(scen.log, g.min_edge_length_m)
    true_total = sum(path_weights(g, list(gt.node_ids)))
    assert float(np.sum(traj.edge_weights_m)) == pytest.approx(true_total, rel=0.01)


def test_noise_free_closed_loop_single_instance():
    g = make_synthetic_grid(10, 300.0, 0.1, seed=50)
    gt = sample_route(g, 10, seed=50)
    scen = synthesize_can(gt, g, DriveProfile())
    traj = build_trajectory(scen.log, g.min_edge_length_m)
    res = run_attack(g, traj, MatchConfig(k=1))
    rep = evaluate(res, gt, g)
    top = res.candidates[0].node_ids
    assert top in (gt.node_ids, gt.node_ids[::-1])
    assert (rep.psi, rep.precision, rep.offset_m, rep.fnr) == (1.0, 1.0, 0.0, 0.0)


def test_route_hopping_missing_edge_rejected():
    g, _ = line_graph([100.0, 100.0])
    from canmatch.metrics import GroundTruth

    fake = GroundTruth(node_ids=("n0", "n2"))
    with pytest.raises(ValueError):
        synthesize_can(fake, g, DriveProfile())
