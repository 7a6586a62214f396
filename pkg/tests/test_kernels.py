import os
import random
import subprocess
import sys

import numpy as np
import pytest

from transit_assign import kernels
from transit_assign.network import INF, WalkingGraph
from transit_assign.preprocess import preprocess
from transit_assign.profiles import PenaltyParams, compute_profiles
from transit_assign.synthetic import random_network, synthetic_city

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def random_csr(rng, n, m):
    edges = [(rng.randrange(n), rng.randrange(n), rng.randint(0, 50)) for _ in range(m)]
    return WalkingGraph(n, edges).csr()


@needs_compiled
@pytest.mark.parametrize("seed", range(20))
def test_dijkstra_backends_agree(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 60)
    indptr, idx, w = random_csr(rng, n, rng.randint(0, 4 * n))
    source = rng.randrange(n)
    bound = rng.choice([INF, 40, 0])
    targets = rng.choice([None, np.array(rng.sample(range(n), min(n, 3)), dtype=np.int64)])
    py = BACKENDS["python"].dijkstra(indptr, idx, w, source, bound, targets)
    cy = BACKENDS["cython"].dijkstra(indptr, idx, w, source, bound, targets)
    assert py.tolist() == cy.tolist()


@needs_compiled
@pytest.mark.parametrize("seed", range(20))
def test_profile_scan_backends_agree(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    art = preprocess(net)
    pp = PenaltyParams(rng.choice((0, 60)), rng.choice((0, 0.5)), rng.choice((0, 2)), rng.choice((0, 1)), 60)
    fd = art.buckets.many_to_one(rng.randrange(net.walking_graph.num_vertices))
    a = compute_profiles(net, art.shortcuts, fd, pp, backend=BACKENDS["python"])
    b = compute_profiles(net, art.shortcuts, fd, pp, backend=BACKENDS["cython"])
    for name in ("pat_trip", "pat_transfer", "pat_target", "wait_adj"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name
    for s in range(net.num_stops):
        assert a.breakpoints(s) == b.breakpoints(s)


@needs_compiled
def test_profile_scan_agrees_on_city():
    net = synthetic_city(seed=2, columns=5, rows=3)
    art = preprocess(net)
    fd = art.buckets.many_to_one(7)
    a = compute_profiles(art.net, art.shortcuts, fd, PenaltyParams(), backend=BACKENDS["python"])
    b = compute_profiles(art.net, art.shortcuts, fd, PenaltyParams(), backend=BACKENDS["cython"])
    assert np.array_equal(a.pat_trip, b.pat_trip) and np.array_equal(a.pat_transfer, b.pat_transfer)


def test_pure_python_can_be_forced():
    code = "from transit_assign import kernels; print(kernels.BACKEND)"
    env = {**os.environ, "TRANSIT_ASSIGN_PURE": "1"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_default_backend_prefers_compiled():
    assert kernels.BACKEND == ("cython" if "cython" in BACKENDS and not os.environ.get("TRANSIT_ASSIGN_PURE")
                               else "python")
