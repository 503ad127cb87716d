from fractions import Fraction

import pytest

from hbcache.config import PushSpec, SimConfig, TopologySource
from hbcache.engine import (
    LOCAL,
    MISS,
    PEERING,
    RunMetrics,
    SimState,
    build_state,
    overall_cost,
    push_content,
    run,
    serve_request,
    write_outcome_log,
)
from hbcache.errors import EmptyRunError, InvalidParameter
from hbcache.overlay import HomeBox, LruCache, build_neighbor_lists
from hbcache.topology import hop_count, load_edge_list
from hbcache.workload import Request
from oracles import ListLRU

SMALL = SimConfig(
    seed=5,
    topology=TopologySource(n_routers=1500, edges_per_new_node=2),
    n_hbs=60,
    catalog_size=40,
    degree=4,
    cache_size=3,
    n_requests=6000,
    log_outcomes=True,
)


def path_state(n_nodes, d, s=2, h_miss=Fraction(11, 2)):
    t = load_edge_list("\n".join(f"{i} {i + 1}" for i in range(n_nodes - 1)))
    hbs = [HomeBox(i, i, LruCache(s)) for i in range(n_nodes)]
    build_neighbor_lists(t, hbs, d)
    return SimState(topology=t, hbs=hbs, catalog_size=10, h_miss=h_miss)


class TestServeRequest:
    def test_first_touch_misses_and_caches(self):
        st = path_state(3, 2)
        out = serve_request(st, Request(0, 1, 7))
        assert (out.kind, out.server, out.hops) == (MISS, None, Fraction(11, 2))
        assert 7 in st.caches[1]

    def test_local_hit_touches_only_requester(self):
        st = path_state(3, 2, s=3)
        for hb, vids in ((0, [1, 2]), (1, [1, 3]), (2, [2, 1])):
            for v in vids:
                st.caches[hb].insert(v)
        before = [c.entries for c in st.caches]
        out = serve_request(st, Request(0, 0, 1))
        assert (out.kind, out.hops) == (LOCAL, 0)
        assert st.caches[0].entries == [1, 2]
        assert [c.entries for c in st.caches[1:]] == before[1:]

    def test_peering_from_far_end(self):
        st = path_state(3, 2)
        st.caches[2].insert(4)
        out = serve_request(st, Request(0, 0, 4))
        assert out.kind == PEERING and out.server == 2
        assert out.hops == hop_count(st.topology, 0, 2) == 2
        assert 4 in st.caches[0]

    def test_nearest_holder_wins(self):
        st = path_state(4, 3)
        st.caches[3].insert(4)
        st.caches[2].insert(4)
        out = serve_request(st, Request(0, 0, 4))
        assert (out.server, out.hops) == (2, 2)

    def test_server_recency_refreshed(self):
        st = path_state(2, 1)
        st.caches[1].insert(1)
        st.caches[1].insert(2)
        serve_request(st, Request(0, 0, 1))
        assert st.caches[1].entries == [1, 2]
        st.refresh_server = False
        serve_request(st, Request(1, 0, 2))
        assert st.caches[1].entries == [1, 2]

    def test_rejects_bad_ids(self):
        st = path_state(2, 1)
        with pytest.raises(InvalidParameter):
            serve_request(st, Request(0, 5, 0))
        with pytest.raises(InvalidParameter):
            serve_request(st, Request(0, 0, 10))


class TestPush:
    def test_k_zero_and_all(self):
        st = path_state(4, 1)
        assert push_content(st, 3, 0, "random", seed=1) == []
        assert all(3 not in c for c in st.caches)
        assert sorted(push_content(st, 3, 4, "random", seed=1)) == [0, 1, 2, 3]
        assert all(3 in c for c in st.caches)

    def test_top_degree_on_star(self):
        t = load_edge_list("\n".join(f"0 {i}" for i in range(1, 6)))
        hbs = [HomeBox(i, (i + 3) % 6, LruCache(2)) for i in range(6)]
        st = SimState(topology=t, hbs=hbs, catalog_size=5, h_miss=Fraction(3))
        chosen = push_content(st, 0, 2, "top-degree", seed=0)
        assert chosen[0] == 3  # HB 3 sits on the hub router 0
        assert chosen == [3, 0]

    def test_random_is_seeded(self):
        a = push_content(path_state(10, 1), 1, 4, "random", seed=9)
        b = push_content(path_state(10, 1), 1, 4, "random", seed=9)
        assert a == b and len(set(a)) == 4

    def test_rejects(self):
        st = path_state(3, 1)
        with pytest.raises(InvalidParameter):
            push_content(st, 0, 4, "random", seed=0)
        with pytest.raises(InvalidParameter):
            push_content(st, 0, 1, "nearest", seed=0)


def replay(outcomes, state, cache_size, h_miss, refresh=True, warm=()):
    """Re-serve a logged request sequence with list-based LRUs."""
    caches = [ListLRU(cache_size) for _ in state.hbs]
    for hb, v in warm:
        caches[hb].insert(v)
    expected = []
    for o in outcomes:
        r, v = o.requester, o.video
        if caches[r].lookup(v):
            expected.append((LOCAL, None, 0))
            continue
        for j, hops in state.hbs[r].neighbors:
            if v in caches[j].items:
                if refresh:
                    caches[j].lookup(v)
                caches[r].insert(v)
                expected.append((PEERING, j, hops))
                break
        else:
            caches[r].insert(v)
            expected.append((MISS, None, h_miss))
    return expected


class TestRun:
    def test_replay_oracle(self):
        m = run(SMALL)
        state = build_state(SMALL)
        got = [(o.kind, o.server, o.hops) for o in m.outcomes]
        assert got == replay(m.outcomes, state, SMALL.cache_size, m.h_miss)

    def test_replay_oracle_without_server_refresh(self):
        cfg = SMALL.replace(refresh_server=False)
        m = run(cfg)
        got = [(o.kind, o.server, o.hops) for o in m.outcomes]
        assert got == replay(m.outcomes, build_state(cfg), cfg.cache_size, m.h_miss, refresh=False)

    def test_degree_zero_never_peers(self):
        m = run(SMALL.replace(degree=0))
        assert m.n_peering == 0 and m.r_peering == 0.0

    def test_accounting(self):
        m = run(SMALL.replace(warmup_fraction=0.25))
        assert m.n_requests == 6000 - 1500
        assert m.n_local + m.n_peering + m.n_miss == m.n_requests
        assert sum(m.exact_ratios) == 1
        assert m.avg_cost == m.r_peering * m.h_peering + m.r_miss * float(m.h_miss)
        measured = [o for o in m.outcomes if o.seq >= 1500]
        assert Fraction(sum(Fraction(o.hops) for o in measured), len(measured)) == m.exact_cost
        assert m.avg_cost == pytest.approx(float(m.exact_cost), rel=1e-12)

    def test_peering_server_is_neighbor(self):
        m = run(SMALL)
        state = build_state(SMALL)
        for o in m.outcomes:
            if o.kind == PEERING:
                assert (o.server, o.hops) in state.hbs[o.requester].neighbors

    def test_full_cache_misses_only_on_first_touch(self):
        cfg = SMALL.replace(cache_size=SMALL.catalog_size)
        m = run(cfg)
        state = build_state(cfg)
        fetched: set[tuple[int, int]] = set()
        for o in m.outcomes:
            if o.kind == MISS:
                assert (o.requester, o.video) not in fetched
                assert all((j, o.video) not in fetched for j, _ in state.hbs[o.requester].neighbors)
            fetched.add((o.requester, o.video))

    def test_deterministic(self):
        a, b = run(SMALL), run(SMALL)
        assert a == b and a.outcomes == b.outcomes
        assert run(SMALL.replace(seed=6)).outcomes != a.outcomes

    def test_h_miss_override_and_radius_default(self):
        assert run(SMALL.replace(h_miss_override=Fraction(11, 2))).h_miss == Fraction(11, 2)
        st = build_state(SMALL)
        assert st.h_miss >= 1 and st.h_miss.denominator == 1

    def test_push_makes_first_requests_local(self):
        cfg = SMALL.replace(cache_size=SMALL.catalog_size,
                            push=PushSpec(videos=(0,), k=SMALL.n_hbs, strategy="random"))
        m = run(cfg)
        first = {}
        for o in m.outcomes:
            if o.video == 0:
                first.setdefault(o.requester, o.kind)
        assert first and set(first.values()) == {LOCAL}

    def test_resource_filter_and_reranking_run(self):
        cfg = SMALL.replace(resource_profile="synthetic", resource_thresholds=(0.5, 0.5),
                            distance_profile="synthetic", rank_weights=(1, 0.001, 0, 0, 0))
        st = build_state(cfg)
        for hb, order in zip(st.hbs, st.scan):
            assert set(order) <= set(hb.neighbors)
            assert order
        m = run(cfg)
        assert m.n_local + m.n_peering + m.n_miss == m.n_requests
        for o in m.outcomes:
            if o.kind == PEERING:
                assert (o.server, o.hops) in st.scan[o.requester]

    def test_outcome_log_csv(self):
        m = run(SMALL.replace(n_requests=50, h_miss_override=Fraction(11, 2)))
        text = write_outcome_log(m.outcomes)
        lines = text.splitlines()
        assert lines[0] == "seq,requester,video,kind,server,hops"
        assert len(lines) == 51
        for line, o in zip(lines[1:], m.outcomes):
            fields = line.split(",")
            assert fields[3] == o.kind
            assert (fields[4] == "") == (o.kind != PEERING)
            if o.kind == MISS:
                assert fields[5] == "5.5"


class TestOverallCost:
    def test_formula(self):
        m = RunMetrics(n_requests=10, n_local=4, n_peering=4, n_miss=2, sum_peering_hops=12,
                       h_miss=Fraction(11, 2))
        assert m.r_peering == 0.4 and m.h_peering == 3.0 and m.r_miss == 0.2
        assert overall_cost(m) == pytest.approx(2.3, abs=1e-15)
        assert m.exact_cost == Fraction(23, 10)

    def test_all_local(self):
        assert overall_cost(RunMetrics(n_requests=5, n_local=5, h_miss=Fraction(6))) == 0

    def test_empty(self):
        with pytest.raises(EmptyRunError):
            overall_cost(RunMetrics())
