import random

import pytest

from ocior.core import Envelope, InstanceId, Tag
from ocior.sim.byzantine import Behaviour, byzantine_step
from ocior.sim.checks import check
from ocior.sim.runner import ScenarioConfig, run
from ocior.sim.scheduler import PendingMessage, Scheduler, fairness_bound, scheduler_next

IID = InstanceId.root("ACIDd", "ID")


def env(k):
    return Envelope(1, 2, IID, Tag.VOTE, (k, 1))


def test_fifo_and_lifo_stateless():
    pending = [PendingMessage(3, env(3), 7, 9), PendingMessage(1, env(1), 2, 9), PendingMessage(2, env(2), 5, 9)]
    assert scheduler_next(pending, random.Random(0), "fifo").enqueued_at == 2
    assert scheduler_next(pending, random.Random(0), "lifo").enqueued_at == 7
    with pytest.raises(ValueError):
        scheduler_next([], random.Random(0), "fifo")


def _order(seed):
    s = Scheduler("random", random.Random(seed), bound=10**9)
    for k in range(50):
        s.push(env(k), 0)
    return [s.next(0).envelope.payload[0] for _ in range(50)]


def test_random_is_reproducible():
    assert _order(4) == _order(4)
    assert sorted(_order(4)) == list(range(50))
    assert _order(4) != _order(5)


def test_deadline_forces_delivery():
    s = Scheduler("lifo", random.Random(0), bound=3)
    s.push(env(0), 0)
    for now in range(1, 3):
        s.push(env(now), now)
        assert s.due(now) is None
    assert s.due(3).envelope.payload[0] == 0
    assert s.max_delay == 3 and s.forced == 1


def test_unknown_strategy():
    with pytest.raises(ValueError):
        Scheduler("chaos", random.Random(0), 5)


@pytest.mark.parametrize("strategy", ["targeted-delay", "split-brain", "lifo"])
def test_deadline_audit(strategy):
    for seed in range(20):
        r = run(ScenarioConfig(n=7, t=2, protocol="OciorABA", scheduler=strategy,
                               adversary="crash-after-k", seed=seed))
        assert r.fairness_ok and r.max_delay <= fairness_bound(7)


def test_silent_behaviour_sends_nothing():
    b = Behaviour("silent", 4, random.Random(0))
    assert not b.processes_events
    assert byzantine_step(b, [(IID, Tag.VOTE, (1, 1), None)]) == []


def test_equivocator_splits_votes():
    b = Behaviour("equivocator", 4, random.Random(0))
    out = byzantine_step(b, [(IID, Tag.VOTE, (3, 0), None)])
    assert [(d, p) for d, _, _, p in out] == [(1, (3, 1)), (2, (3, 1)), (3, (3, 0)), (4, (3, 0))]


def test_crash_after_k():
    b = Behaviour("crash-after-k", 4, random.Random(0), crash_after=2)
    for _ in range(2):
        assert b.processes_events
        b.count_event()
    assert not b.processes_events


def test_noise_keeps_message_shape():
    b = Behaviour("random-noise", 4, random.Random(0))
    for _, _, tag, (j, v) in byzantine_step(b, [(IID, Tag.READY, (2, 1), None)]):
        assert tag is Tag.READY and 1 <= j <= 4 and v in (0, 1)
    with pytest.raises(ValueError):
        Behaviour("sneaky", 4, random.Random(0))


def test_failure_free_t0():
    r = run(ScenarioConfig(n=4, t=0, protocol="OciorABA", seed=1))
    assert r.completed and len(set(r.outputs.values())) == 1
    assert set(r.outputs) == {1, 2, 3, 4}
    assert r.outputs[1] == r.inputs[1]


def test_same_seed_identical_metrics():
    cfg = dict(n=7, t=2, protocol="OciorABA", input_mode="split", adversary="random-noise", seed=12)
    a, b = run(ScenarioConfig(**cfg)), run(ScenarioConfig(**cfg))
    assert a.metrics == b.metrics and a.csv_row() == b.csv_row()


def test_silent_node_hundred_seeds():
    for seed in range(100):
        r = run(ScenarioConfig(n=4, t=1, protocol="OciorABA", adversary="silent", seed=seed))
        w = r.inputs[r.honest[0]]
        assert all(r.outputs[i] == w for i in r.honest)


def test_equivocating_rbc_leader_consistent():
    for seed in range(100):
        r = run(ScenarioConfig(n=4, t=1, protocol="RBC", adversary="equivocator",
                               byzantine_set=(1,), seed=seed))
        assert check(r) == []


def test_honest_only_accounting():
    r = run(ScenarioConfig(n=4, t=1, protocol="ABBBA", adversary="silent", byzantine_set=(4,),
                           inputs={i: (0, 0) for i in (1, 2, 3)}, seed=0))
    assert r.metrics.total_msgs == 12
    assert r.metrics.total_bits == 12 * (20 + 2)
    assert r.metrics.byzantine_msgs == 0
    assert r.csv_row()["total_bits"] == 264


def test_liveness_violation_names_stuck_instances():
    r = run(ScenarioConfig(n=4, t=1, protocol="OciorABA", max_steps=5, seed=0))
    assert not r.completed and r.liveness is not None
    assert r.liveness.stuck and "max_steps" in str(r.liveness)
    assert r.csv_row()["completion_step"] == -1
    assert any(v.startswith("termination:") for v in check(r))


def test_quiescence_detected():
    # two (0,0) nodes see only two zero votes and one beta: neither threshold is reachable
    r = run(ScenarioConfig(n=4, t=1, protocol="ABBBA", adversary="silent", byzantine_set=(4,),
                           inputs={1: (0, 0), 2: (0, 0), 3: (0, 1)}, seed=0))
    assert not r.completed and "quiescent" in r.liveness.reason
    assert set(r.liveness.stuck) == {1, 2}


@pytest.mark.parametrize("bad", [
    dict(n=3, t=1), dict(n=4, t=1, protocol="Paxos"), dict(n=4, t=1, ell=12),
    dict(n=4, t=1, adversary="sneaky"), dict(n=4, t=1, byzantine_set=(1, 2)),
    dict(n=4, t=1, scheduler="chaos"), dict(n=4, t=1, input_mode="odd"),
])
def test_validation(bad):
    with pytest.raises(ValueError):
        run(ScenarioConfig(**bad))


def test_subresilient_override_warns():
    with pytest.warns(UserWarning):
        r = run(ScenarioConfig(n=3, t=1, allow_subresilient=True, max_steps=2000, seed=0))
    assert r.config.n == 3


def test_longer_inputs_cost_mostly_rbc_bits():
    def mean(ell, key):
        rs = [run(ScenarioConfig(n=7, t=2, ell=ell, input_mode="random", seed=s)).csv_row() for s in range(5)]
        return sum(r[key] for r in rs) / len(rs)
    d_total = mean(2048, "total_bits") - mean(1024, "total_bits")
    d_rbc = mean(2048, "bits_rbc") - mean(1024, "bits_rbc")
    assert d_rbc > 0.5 * d_total
