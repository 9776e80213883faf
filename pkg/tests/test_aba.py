import pytest

from ocior.aba import OciorABA, OciorABAStar, decode_value
from ocior.codec import Share, ec_encode
from ocior.core import BOT, BOT_DEFAULT, ActionKind, Event, EventKind, InstanceId
from ocior.sim.checks import check_aba
from ocior.sim.runner import TOP_ID, ScenarioConfig, run

STAR = InstanceId.root("OciorABAStar", TOP_ID)
ABA = InstanceId.root("OciorABA", TOP_ID)


def test_input_is_one_share_broadcast():
    node = OciorABA(ABA, 2, 4, 1)
    (act,) = node.step(Event(EventKind.INPUT, ABA, b"\xab\xcd"))
    assert act.kind is ActionKind.CHILD_INPUT and act.target == ABA.child("RBC", TOP_ID, 2)
    assert act.payload == ec_encode(4, 2, b"\xab\xcd")[1]


def test_matching_share_votes_one():
    node = OciorABA(ABA, 1, 4, 1)
    w = b"same"
    node.step(Event(EventKind.INPUT, ABA, w))
    share = ec_encode(4, 2, w)[2]
    (act,) = node.step(Event(EventKind.CHILD_OUTPUT, ABA.child("RBC", TOP_ID, 3), share))
    assert act.target == node.apva_iid and act.payload == (3, 1)


def test_rbc_before_input_is_buffered():
    node = OciorABA(ABA, 1, 4, 1)
    mine, other = b"mine", b"othr"
    assert node.step(Event(EventKind.CHILD_OUTPUT, ABA.child("RBC", TOP_ID, 4),
                           ec_encode(4, 2, other)[3])) == []
    acts = node.step(Event(EventKind.INPUT, ABA, mine))
    assert acts[-1].payload == (4, 0)
    assert node.votes == [BOT, BOT, BOT, 0]


def test_distinct_inputs_mostly_disagree():
    import random
    rng = random.Random(1)
    same = 0
    for _ in range(500):
        a, b = rng.randbytes(8), rng.randbytes(8)
        same += ec_encode(7, 3, a)[5] == ec_encode(7, 3, b)[5]
    assert same == 0


def test_star_backfill_after_three_outputs():
    node = OciorABAStar(STAR, 1, 4, 1)
    node.step(Event(EventKind.INPUT, STAR, b"w"))
    node.abba_input.add(1)
    for j in (1, 2):
        assert node.step(Event(EventKind.CHILD_OUTPUT, STAR.child("ABBA", TOP_ID, j), 1)) == []
    acts = node.step(Event(EventKind.CHILD_OUTPUT, STAR.child("ABBA", TOP_ID, 3), 0))
    assert {a.target.subs[0] for a in acts} == {2, 3, 4}
    assert all(a.payload == 0 for a in acts)


def test_fewer_than_t_plus_one_ones_gives_default():
    node = OciorABA(ABA, 1, 4, 1)
    assert node.finalize([3])[0].payload is BOT_DEFAULT


def test_decode_value_uses_leader_positions():
    shares = ec_encode(4, 2, b"hello")
    assert decode_value(4, 2, {1: shares[0], 3: shares[2]}) == b"hello"
    assert decode_value(4, 2, {1: shares[0], 3: Share(3, b"\x00")}) is BOT_DEFAULT
    assert decode_value(4, 2, {1: "junk", 2: None}) is BOT_DEFAULT


@pytest.mark.parametrize("protocol", ["OciorABA", "OciorABAStar"])
def test_unanimous_outputs_input(protocol):
    for seed in range(30):
        r = run(ScenarioConfig(n=4, t=1, protocol=protocol, adversary="equivocator", seed=seed),
                keep_nodes=True)
        w = r.inputs[r.honest[0]]
        assert all(r.outputs[i] == w for i in r.honest)
        for i in r.honest:
            top = r.nodes[i].root_instance
            assert all(top.votes[j - 1] == 1 for j in r.honest if top.votes[j - 1] != BOT)
            assert len(top.ones) >= r.config.t + 1


def test_garbage_leader_voted_zero():
    for seed in range(30):
        r = run(ScenarioConfig(n=4, t=1, protocol="OciorABA", adversary="random-noise", seed=seed),
                keep_nodes=True)
        (b,) = r.byzantine
        assert all(r.nodes[i].root_instance.votes[b - 1] in (0, BOT) for i in r.honest)


@pytest.mark.parametrize("protocol", ["OciorABA", "OciorABAStar"])
def test_mixed_inputs_consistent(protocol):
    defaults = 0
    for seed in range(200):
        r = run(ScenarioConfig(n=4, t=1, protocol=protocol, input_mode="random",
                               adversary=("none", "silent", "equivocator")[seed % 3], seed=seed))
        assert check_aba(r) == []
        defaults += r.outputs[r.honest[0]] is BOT_DEFAULT
    assert defaults > 0  # all-distinct inputs do reach the default branch
