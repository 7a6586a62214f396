import random

import pytest

from _oracle import all_pairs
from transit_assign.graph import build_core
from transit_assign.network import Connection, Stop, TransitNetwork, WalkingGraph
from transit_assign.preprocess import preprocess, sufficiency_check
from transit_assign.shortcuts import ShortcutGraph, compute_shortcuts, full_transfer_graph
from transit_assign.synthetic import random_network


def via_vertex_network(slack_minutes=6):
    # trip 0 ends at stop a (vertex 0); trip 1 starts at stop b (vertex 2); walking a -> x -> b takes 4 min
    stops = [Stop(0, 0), Stop(1, 2), Stop(2, 3), Stop(3, 4)]
    graph = WalkingGraph(5, [(0, 1, 120), (1, 2, 120)])
    conns = [
        Connection(0, 2, 0, 0, 600, 0, 0),
        Connection(1, 1, 3, 600 + slack_minutes * 60, 1500, 1, 0),
    ]
    return TransitNetwork(stops, conns, graph)


def test_no_trips_no_shortcuts():
    net = TransitNetwork([Stop(0, 0), Stop(1, 1)], [], WalkingGraph(2, [(0, 1, 5)]))
    assert len(compute_shortcuts(net, build_core(net.walking_graph, [0, 1]))) == 0


def test_transfer_through_non_stop_vertex():
    net = via_vertex_network()
    sc = compute_shortcuts(net, build_core(net.walking_graph, net.stop_vertex.tolist()))
    assert (0, 1, 240) in sc.edges


def test_transfer_too_long_for_slack_is_dropped():
    net = via_vertex_network(slack_minutes=3)
    sc = compute_shortcuts(net, build_core(net.walking_graph, net.stop_vertex.tolist()))
    assert (0, 1, 240) not in sc.edges


def test_max_transfer_time_cap():
    net = via_vertex_network()
    sc = compute_shortcuts(net, build_core(net.walking_graph, net.stop_vertex.tolist()), max_transfer_time=200)
    assert len(sc) == 0


@pytest.mark.parametrize("seed", range(25))
def test_edges_are_exact_distances(seed):
    net = random_network(random.Random(seed))
    art = preprocess(net)
    apsp = all_pairs(net)
    pairs = set()
    for a, b, t in art.shortcuts.edges:
        assert a != b
        assert t == apsp[net.stops[a].vertex_id][net.stops[b].vertex_id]
        pairs.add((a, b))
    assert len(pairs) == len(art.shortcuts) <= net.num_stops ** 2
    assert sufficiency_check(art) == []


def test_full_graph_is_superset():
    net = random_network(random.Random(77))
    art = preprocess(net)
    assert set(art.shortcuts.edges) <= set(full_transfer_graph(net).edges)


def test_csv_round_trip(tmp_path):
    sc = ShortcutGraph(4, [(2, 1, 30), (0, 3, 7), (0, 3, 7)])
    path = tmp_path / "shortcuts.csv"
    sc.write_csv(path)
    assert path.read_text().splitlines()[:2] == ["#transit-assign v1", "from_stop,to_stop,walk_seconds"]
    back = ShortcutGraph.read_csv(path, 4)
    assert back.edges == [(0, 3, 7), (2, 1, 30)]
    assert back.outgoing(0) == [(3, 7)]
