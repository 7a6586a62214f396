import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracle import Oracle, all_pairs
from transit_assign.journey import Ride, Walk
from transit_assign.network import INF, Connection, Stop, TransitNetwork, WalkingGraph
from transit_assign.preprocess import preprocess
from transit_assign.profiles import (
    PATProfile, PenaltyParams, compute_profiles, evaluate_profile, pat_of_journey,
)
from transit_assign.shortcuts import ShortcutGraph
from transit_assign.synthetic import random_network

ZERO = PenaltyParams(0, 0, 0, 0, 0)


def test_penalties_must_be_representable():
    with pytest.raises(ValueError):
        PenaltyParams(wait_weight=-1)
    with pytest.raises(ValueError):
        PenaltyParams(walk_weight=0.0001)
    assert PenaltyParams(wait_weight=0.5).fixed().wait_milli == 500


def test_unreachable_destination():
    net = TransitNetwork([Stop(0, 0), Stop(1, 1)], [Connection(0, 0, 1, 100, 200, 0, 0)], WalkingGraph(3))
    fd = np.full(2, INF, dtype=np.int64)
    prof = compute_profiles(net, ShortcutGraph(2, []), fd, ZERO)
    assert prof.pat_trip[0] >= INF and prof.pat_transfer[0] >= INF and prof.pat_target[0] >= INF
    assert prof.breakpoints(0) == [] and prof.evaluate(0, 0) >= INF


def test_single_connection():
    net = TransitNetwork([Stop(0, 0), Stop(1, 1)], [Connection(0, 0, 1, 100, 200, 0, 0)], WalkingGraph(2))
    prof = compute_profiles(net, ShortcutGraph(2, []), np.array([INF, 0]), ZERO)
    assert prof.labels(0).target == 200_000
    assert prof.breakpoints(0) == [(100, 200_000)]


class TestEvaluate:
    def test_empty(self):
        assert evaluate_profile(PATProfile([], []), 0, ZERO) >= INF

    def test_waiting(self):
        p = PATProfile.from_breakpoints([(100, 150_000)], 500)
        assert evaluate_profile(p, 90, PenaltyParams(wait_weight=0.5)) == 155_000

    def test_expired_breakpoint_falls_back_to_walking(self):
        # walking alone is perceived as 300 - 101 seconds
        p = PATProfile.from_breakpoints([(100, 150_000)], 500, walk_only=(300 - 101) * 1000)
        assert evaluate_profile(p, 101, PenaltyParams(wait_weight=0.5)) == 300_000

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(0, 500), st.integers(0, 10**6)), max_size=12),
           st.integers(0, 600), st.sampled_from([0, 500, 1000, 2000]))
    def test_suffix_minimum_equals_scan_of_all_points(self, points, ready, wait):
        p = PATProfile.from_breakpoints(points, wait)
        expected = min((v + wait * (d - ready) for d, v in points if d >= ready), default=INF)
        assert evaluate_profile(p, ready, PenaltyParams(wait_weight=wait / 1000)) == expected


class TestPatOfJourney:
    def test_pure_walk(self):
        net = TransitNetwork([Stop(0, 0)], [], WalkingGraph(2, [(0, 1, 1200)]))
        assert pat_of_journey((Walk(0, 1, 1200),), net, 0, PenaltyParams(walk_weight=2)) == 3600 * 1000

    def test_zero_penalties_give_arrival(self):
        net = TransitNetwork([Stop(0, 0), Stop(1, 1)], [Connection(0, 0, 1, 100, 200, 0, 0)], WalkingGraph(2))
        journey = (Walk(0, 0, 0), Ride(0), Walk(1, 1, 0))
        assert pat_of_journey(journey, net, 50, ZERO) == 200_000

    def test_buffer_penalty(self):
        net = TransitNetwork([Stop(0, 0, 300), Stop(1, 1)], [Connection(0, 0, 1, 600, 1200, 0, 0)], WalkingGraph(2))
        journey = (Walk(0, 0, 0), Ride(0), Walk(1, 1, 0))
        pp = PenaltyParams(0, 0, 0, 1, 0)
        assert pat_of_journey(journey, net, 300, pp) == (1200 + 300) * 1000


@pytest.mark.parametrize("seed", range(30))
def test_labels_and_monotonicity(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    pp = PenaltyParams(rng.choice((0, 60)), rng.choice((0, 0.5, 2)), rng.choice((0, 1, 2)), rng.choice((0, 1)), 60)
    fp = pp.fixed()
    art = preprocess(net)
    dest = rng.randrange(net.walking_graph.num_vertices)
    prof = compute_profiles(net, art.shortcuts, art.buckets.many_to_one(dest), pp)
    arr = net.arr_time * 1000
    for name, floor in (("pat_trip", arr), ("pat_target", arr), ("pat_transfer", arr + fp.trans_ms)):
        labels = getattr(prof, name)
        finite = labels < INF
        assert (labels[finite] >= floor[finite]).all()
    for s in range(net.num_stops):
        bps = prof.breakpoints(s)
        assert [d for d, _ in bps] == sorted(d for d, _ in bps)
        for t1 in range(0, 3000, 97):
            t2 = t1 + rng.randint(0, 300)
            e1, e2 = prof.evaluate(s, t1), prof.evaluate(s, t2)
            if e2 < INF:
                assert e1 <= e2 + fp.wait_milli * (t2 - t1)


@pytest.mark.parametrize("seed", range(10))
def test_random_networks_against_oracle(seed):
    rng = random.Random(900 + seed)
    net = random_network(rng)
    pp = PenaltyParams(60, 0.5, 2, 1, 0)
    art = preprocess(net)
    apsp = all_pairs(net)
    dest = rng.randrange(net.walking_graph.num_vertices)
    prof = compute_profiles(net, art.shortcuts, art.buckets.many_to_one(dest), pp)
    oracle = Oracle(net, dest, pp.fixed(), apsp)
    for s in range(net.num_stops):
        for r in range(0, 3000, 50):
            assert prof.evaluate(s, r) == oracle.board(s, r)


def test_oracle_journeys_score_consistently():
    rng = random.Random(3)
    for _ in range(40):
        net = random_network(rng)
        pp = PenaltyParams(60, 0.5, 2, 1, 0)
        apsp = all_pairs(net)
        dest = rng.randrange(net.walking_graph.num_vertices)
        oracle = Oracle(net, dest, pp.fixed(), apsp)
        origin = rng.randrange(net.walking_graph.num_vertices)
        value, journey = oracle.best_journey(origin, 100)
        if journey is not None:
            assert pat_of_journey(journey, net, 100, pp) == value


def test_profile_csv(tmp_path):
    net = TransitNetwork([Stop(0, 0), Stop(1, 1)], [Connection(0, 0, 1, 100, 200, 0, 0)], WalkingGraph(2))
    prof = compute_profiles(net, ShortcutGraph(2, []), np.array([INF, 0]), ZERO)
    prof.write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines() == ["#transit-assign v1", "stop,dep_time,pat_millis",
                                                             "0,100,200000"]
