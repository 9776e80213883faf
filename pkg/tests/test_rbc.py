import pytest

from ocior.core import Event, EventKind, InstanceId, Tag
from ocior.rbc import RBC, echo_threshold
from ocior.sim.checks import check_rbc
from ocior.sim.runner import ScenarioConfig, run

IID = InstanceId.root("RBC", "ID", 1)


def msg(tag, body, src):
    return Event(EventKind.MESSAGE, IID, (tag, body), src)


def test_thresholds():
    assert echo_threshold(4, 1) == 3
    assert echo_threshold(7, 2) == 5


def test_delivery_needs_three_readies_at_n4():
    node = RBC(IID, 2, 4, 1)
    node.step(msg(Tag.RBC_READY, b"v", 1))
    acts = node.step(msg(Tag.RBC_READY, b"v", 3))
    assert not node.has_output
    assert [a.payload[0] for a in acts] == [Tag.RBC_READY]  # t+1 amplification
    node.step(msg(Tag.RBC_READY, b"v", 3))
    assert not node.has_output
    node.step(msg(Tag.RBC_READY, b"v", 4))
    assert node.output == b"v"


def test_only_leader_init_counts():
    node = RBC(IID, 2, 4, 1)
    assert node.step(msg(Tag.RBC_INIT, b"v", 3)) == []
    assert node.step(msg(Tag.RBC_INIT, b"v", 1))[0].payload == (Tag.RBC_ECHO, b"v")
    assert node.step(msg(Tag.RBC_INIT, b"w", 1)) == []


def test_non_leader_input_rejected():
    with pytest.raises(ValueError):
        RBC(IID, 2, 4, 1).step(Event(EventKind.INPUT, IID, b"v"))


@pytest.mark.parametrize("scheduler", ["fifo", "lifo", "random"])
def test_failure_free_delivery(scheduler):
    r = run(ScenarioConfig(n=4, t=1, protocol="RBC", scheduler=scheduler, seed=3))
    assert r.completed and set(r.outputs.values()) == {r.inputs[1]}


def test_equivocating_non_leaders():
    for seed in range(100):
        r = run(ScenarioConfig(n=7, t=2, protocol="RBC", adversary="equivocator",
                               byzantine_set=(3, 6), seed=seed))
        assert all(r.outputs.get(i) == r.inputs[1] for i in r.honest)


def test_equivocating_leader_consistency():
    for seed in range(200):
        r = run(ScenarioConfig(n=4, t=1, protocol="RBC", adversary="equivocator",
                               byzantine_set=(1,), seed=seed, scheduler="random"))
        assert check_rbc(r) == []
        assert len({r.outputs[i] for i in r.honest if i in r.outputs}) <= 1


def test_totality_after_leader_crash():
    seen = 0
    for seed in range(200):
        r = run(ScenarioConfig(n=7, t=2, protocol="RBC", adversary="crash-after-k",
                               byzantine_set=(1, 5), seed=seed, crash_after=1))
        delivered = [i for i in r.honest if i in r.outputs]
        assert not delivered or len(delivered) == len(r.honest)
        seen += bool(delivered)
    assert seen > 0
