import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manetsim.config import ScenarioConfig
from manetsim.dsr import RouteCache, is_source_route, uses_link
from manetsim.network import Simulation
from manetsim.packets import DataPacket, DsrError, DsrReply, DsrRequest

from conftest import line_config
from oracles import bfs_hops, brute_neighbors


def _sim(**kw):
    return Simulation(line_config("dsr", **kw))


def _packet(sim, src, dst, uid=10_000):
    sim.ledger.sent(uid)
    return DataPacket(uid, src, dst, sim.now)


def test_first_request_carries_origin_only():
    sim = _sim()
    req = sim.agents[0].discover_route(5)
    assert req.accumulated == (0,) and req.request_id == 1


def test_cache_hit_skips_discovery():
    sim = _sim()
    agent = sim.agents[0]
    agent.cache.add((0, 1, 2, 3, 4, 5), 0)
    before = sim.ledger.control_transmitted
    assert agent.originate(_packet(sim, 0, 5)) == "send"
    assert sim.ledger.control_transmitted == before


def test_retry_uses_new_request_id():
    cfg = line_config("dsr", n=3, flow_pairs=((0, 1),),
                      positions=((0.0, 0.0), (100.0, 0.0), (400.0, 0.0)))
    cfg.traffic.start_min = cfg.traffic.start_max = 15.0  # keep the other flow out of the way
    sim = Simulation(cfg)
    agent = sim.agents[0]
    agent.originate(_packet(sim, 0, 2))
    sim.engine.run_until(1_000_000)
    assert agent.discovery[2][2] == 2


def test_request_handling():
    sim = _sim()
    sent = []
    sim.unicast_control = lambda node, nxt, msg: sent.append((nxt, msg)) or True
    b = sim.agents[1]
    assert b.handle_request(DsrRequest(0, 1, 5, (0, 1)), 0) == "ignore"
    assert b.handle_request(DsrRequest(0, 2, 5, (0,)), 0) == "rebroadcast"
    assert b.handle_request(DsrRequest(0, 2, 5, (0,)), 0) == "ignore"
    dest = sim.agents[2]
    assert dest.handle_request(DsrRequest(0, 3, 2, (0, 1)), 1) == "reply"
    nxt, reply = sent[-1]
    assert nxt == 1 and reply.route == (0, 1, 2)


def test_reply_fills_cache_and_flushes():
    sim = _sim(n=3, flow_pairs=((0, 2),))
    agent = sim.agents[0]
    agent.originate(_packet(sim, 0, 2))
    assert agent.pending
    agent.handle_reply(DsrReply((0, 1, 2), (2, 1, 0), 2), 1)
    assert agent.cache.routes(2) == [(0, 1, 2)]
    assert not agent.pending


def test_cache_holds_k_routes_and_evicts_oldest():
    cache = RouteCache(3)
    cache.add((0, 1, 5), 1)
    cache.add((0, 2, 5), 2)
    assert len(cache.routes(5)) == 2
    cache.add((0, 3, 5), 3)
    cache.add((0, 4, 5), 4)
    assert cache.routes(5) == [(0, 2, 5), (0, 3, 5), (0, 4, 5)]


def test_cache_prefers_shortest_then_freshest():
    cache = RouteCache(3)
    cache.add((0, 1, 2, 5), 1)
    cache.add((0, 3, 5), 2)
    cache.add((0, 4, 5), 3)
    assert cache.best(5) == (0, 4, 5)
    assert cache.best(5, admissible=lambda r: 4 not in r) == (0, 3, 5)


def test_cache_rejects_routes_with_repeats():
    with pytest.raises(ValueError):
        RouteCache().add((0, 1, 0, 5), 0)


def test_purge_link():
    cache = RouteCache(3)
    cache.add((0, 1, 2, 5), 1)
    assert cache.purge_link(2, 1) == 1 and cache.routes(5) == []
    cache.add((0, 1, 2, 5), 1)
    cache.add((0, 3, 2, 5), 2)
    cache.add((0, 4, 5), 3)
    assert cache.purge_link(1, 2) == 1
    cache.add((0, 1, 2, 5), 4)
    assert cache.purge_link(2, 5) == 2
    assert cache.routes(5) == [(0, 4, 5)]
    assert not any(uses_link(r, 2, 5) for r in cache.all_routes())


def test_source_forward_next_hop():
    sim = _sim(n=3, flow_pairs=((0, 2),))
    pkt = _packet(sim, 0, 2)
    pkt.route, pkt.hop_index = (0, 1, 2), 1
    assert sim.agents[1].source_forward(pkt) == "send"
    pkt2 = _packet(sim, 0, 2, 2)
    pkt2.route, pkt2.hop_index = (0, 1, 2), 2
    assert sim.agents[2].source_forward(pkt2) == "deliver"


def test_salvage_uses_alternate_route():
    # 0 - 1 - 2 with a detour 1 - 3 - 2; the source route says 1 -> 4 which is out of range
    pts = ((0.0, 0.0), (100.0, 0.0), (200.0, 0.0), (150.0, 80.0), (500.0, 500.0))
    sim = Simulation(line_config("dsr", n=5, positions=pts, flow_pairs=((0, 2),)))
    relay = sim.agents[1]
    relay.cache.add((1, 3, 2), 0)
    errors = []
    sim.unicast_control = lambda node, nxt, msg: errors.append(msg) or True
    pkt = _packet(sim, 0, 2)
    pkt.route, pkt.hop_index = (0, 1, 4, 2), 1
    assert relay.source_forward(pkt) == "salvage"
    assert pkt.route == (1, 3, 2) and pkt.salvaged
    assert isinstance(errors[0], DsrError) and errors[0].path == (1, 0)
    pkt2 = _packet(sim, 0, 2, 2)
    pkt2.route, pkt2.hop_index, pkt2.salvaged = (0, 1, 4, 2), 1, True
    assert relay.source_forward(pkt2) == "drop"


def test_error_at_origin_purges_cache():
    sim = _sim(n=4, flow_pairs=((0, 3),))
    agent = sim.agents[0]
    agent.cache.add((0, 1, 2, 3), 0)
    agent.handle_error(DsrError(1, 2, (1, 0), 1), 1)
    assert agent.best_route(3) is None
    agent.originate(_packet(sim, 0, 3))
    assert 3 in agent.discovery


def test_line_route_matches_bfs():
    cfg = line_config("dsr")
    sim = Simulation(cfg)
    sim.run()
    route = sim.agents[0].cache.best(5)
    adjacency = brute_neighbors(cfg.positions, cfg.range_m)
    assert route == (0, 1, 2, 3, 4, 5)
    assert len(route) - 1 == bfs_hops(adjacency, 0, 5)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_first_route_is_shortest(seed):
    rng = random.Random(seed)
    pts = tuple((rng.uniform(0, 300), rng.uniform(0, 300)) for _ in range(10))
    hops = bfs_hops(brute_neighbors(pts, 120.0), 0, 9)
    cfg = ScenarioConfig(protocol="dsr", nodes=10, range_m=120.0, duration=1.2,
                         positions=pts, flow_pairs=((0, 9),))
    cfg.adversary.fraction = 0.0
    sim = Simulation(cfg)
    sim.run()
    best = sim.agents[0].cache.best(9)
    if hops is None:
        assert best is None
    else:
        assert len(best) - 1 == hops


def test_source_route_helpers():
    assert is_source_route((1, 2, 3)) and not is_source_route((1,)) and not is_source_route((1, 2, 1))
    assert uses_link((1, 2, 3), 3, 2) and not uses_link((1, 2, 3), 1, 3)
