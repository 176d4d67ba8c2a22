import random

import pytest

from manetsim.adversary import (Adversary, AdversaryProfile, AdversarySpec, CauseKind,
                                ForwardVerdict, MisbehaviorCause, assign)
from manetsim.engine import seconds
from manetsim.network import Simulation
from manetsim.packets import DataPacket, DsrRequest, Rreq
from manetsim.trust import CauseClass

from conftest import line_config


def _adv(kind, **kw):
    spec = AdversarySpec()
    profile = AdversaryProfile({7: MisbehaviorCause(kind, **kw)}, 0.2)
    return Adversary(profile, spec, random.Random(0))


def _data():
    return DataPacket(1, 0, 9, 0)


def test_zero_fraction_assigns_nobody():
    assert assign(AdversarySpec(fraction=0.0), range(40), random.Random(1)).assignments == {}


def test_fraction_of_forty():
    profile = assign(AdversarySpec(fraction=0.2), range(40), random.Random(1))
    assert len(profile.assignments) == 8


def test_assignment_is_deterministic():
    a = assign(AdversarySpec(), range(40), random.Random(5))
    b = assign(AdversarySpec(), range(40), random.Random(5))
    assert a.assignments == b.assignments


def test_weights_select_causes():
    spec = AdversarySpec(weight_deliberate_drop=0, weight_node_failure=0,
                         weight_link_failure=0, weight_energy_depletion=0)
    profile = assign(spec, range(50), random.Random(2))
    assert {c.kind for c in profile.assignments.values()} == {CauseKind.BLACK_HOLE}


def test_invalid_spec():
    with pytest.raises(ValueError):
        AdversarySpec(fraction=1.0)
    with pytest.raises(ValueError):
        AdversarySpec(weight_black_hole=-1)


def test_black_hole_drops_data_not_control():
    adv = _adv(CauseKind.BLACK_HOLE)
    assert adv.intercept_forward(7, _data(), 0) is ForwardVerdict.DROP
    assert adv.intercept_forward(7, Rreq(0, 1, 1, 9, 0), 0) is ForwardVerdict.FORWARD
    assert adv.is_black_hole(7) and not adv.is_black_hole(3)


def test_deliberate_drop_extremes():
    always = _adv(CauseKind.DELIBERATE_DROP, drop_prob=1.0)
    never = _adv(CauseKind.DELIBERATE_DROP, drop_prob=0.0)
    for _ in range(50):
        assert always.intercept_forward(7, _data(), 0) is ForwardVerdict.DROP
        assert never.intercept_forward(7, _data(), 0) is ForwardVerdict.FORWARD


def test_energy_exhaustion_drops():
    adv = _adv(CauseKind.ENERGY_DEPLETION)
    adv.energy[7].remaining = 0
    assert adv.intercept_forward(7, _data(), 0) is ForwardVerdict.DROP
    assert not adv.can_transmit(7, 0)


def test_energy_never_increases():
    adv = _adv(CauseKind.ENERGY_DEPLETION)
    last = adv.energy[7].remaining
    for i in range(1500):
        (adv.debit_tx if i % 2 else adv.debit_rx)(7)
        assert 0 <= adv.energy[7].remaining <= last
        last = adv.energy[7].remaining
    assert last == 0


def test_node_failure_window():
    adv = _adv(CauseKind.NODE_FAILURE, windows=((10, 20),))
    assert not adv.is_down(7, 9) and adv.is_down(7, 10) and not adv.is_down(7, 20)
    assert adv.intercept_forward(7, _data(), 15) is ForwardVerdict.DROP
    assert adv.intercept_forward(7, _data(), 25) is ForwardVerdict.FORWARD


def test_link_failure_breaks_one_designated_link():
    adv = _adv(CauseKind.LINK_FAILURE, windows=((10, 20),))
    assert adv.intercept_forward(7, _data(), 12, next_hop=4) is ForwardVerdict.DROP
    assert adv.intercept_forward(7, _data(), 13, next_hop=5) is ForwardVerdict.FORWARD
    assert adv.link_broken(4, 7, 14) and adv.link_broken(7, 4, 14)
    assert not adv.link_broken(7, 5, 14)
    assert not adv.link_broken(7, 4, 25)


def test_attribution_classes():
    assert _adv(CauseKind.NODE_FAILURE).attribute(7) is CauseClass.FAULTY
    assert _adv(CauseKind.BLACK_HOLE).attribute(7) is CauseClass.SELFISH
    assert _adv(CauseKind.BLACK_HOLE).attribute(1) is CauseClass.UNKNOWN


def _sim_with_black_hole(protocol):
    cfg = line_config(protocol, n=4, assignments=((2, "BlackHole"),), flow_pairs=((0, 3),))
    return Simulation(cfg)


def test_aodv_forged_reply():
    sim = _sim_with_black_hole("aodv")
    sent = []
    sim.unicast_control = lambda node, nxt, msg: sent.append((node, nxt, msg)) or True
    sim.agents[2].handle_rreq(Rreq(0, 1, 1, 3, 4, hop_count=1), frm=1)
    node, nxt, rrep = sent[0]
    assert (node, nxt) == (2, 1)
    assert (rrep.dest, rrep.hop_count, rrep.dest_seq) == (3, 1, 14)


def test_dsr_forged_reply_route():
    sim = _sim_with_black_hole("dsr")
    sent = []
    sim.unicast_control = lambda node, nxt, msg: sent.append(msg) or True
    sim.agents[2].handle_request(DsrRequest(0, 1, 3, (0, 1)), frm=1)
    assert sent[0].route == (0, 1, 2, 3)


def test_honest_node_does_not_forge():
    sim = _sim_with_black_hole("aodv")
    sent = []
    sim.unicast_control = lambda node, nxt, msg: sent.append(msg) or True
    assert sim.agents[1].handle_rreq(Rreq(0, 1, 1, 3, 4, hop_count=0), frm=0) == "rebroadcast"
    assert sent == []


@pytest.mark.parametrize("protocol", ["aodv", "dsr"])
def test_black_hole_never_forwards_data(protocol):
    sim = Simulation(_sim_with_black_hole(protocol).cfg)
    sim.run()
    assert sim.data_forwarded[2] == 0
    assert sim.ledger.data_sent > 0
