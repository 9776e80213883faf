import itertools

import pytest

from ocior.core import (
    BOT, BOT_DEFAULT, Action, ActionKind, Envelope, Event, EventKind, InstanceId, PartialVector,
    Tag, bit_cost, derived_id, header_bits, index_bits, nonmissing_set,
)
from ocior.rbc import RBC


def test_nonmissing_examples():
    assert nonmissing_set([1, 0, BOT, 1]) == {1, 2, 4}
    assert nonmissing_set(PartialVector.missing(5)) == set()
    assert PartialVector([0, 1, 1, 0, 1]).nonmissing() == {1, 2, 3, 4, 5}


def test_partial_vector_rejects_other_symbols():
    with pytest.raises(ValueError):
        PartialVector([0, 3])
    w = PartialVector.missing(3).with_value(2, 1)
    assert w.at(2) == 1 and w.ones() == [2]
    assert repr(w) == "[⊥,1,⊥]"


def test_instance_id_structure():
    root = InstanceId.root("APVA", "ID")
    child = root.child("ABBBA", derived_id("ID"), 3, 0)
    assert child.parent == root
    assert child.label == "ABBBA" and child.base == "ID'" and child.subs == (3, 0)
    assert child.ancestors() == [root]
    assert child == InstanceId([("APVA", "ID"), ("ABBBA", "ID'", 3, 0)])
    assert repr(child) == "APVA<ID>/ABBBA<ID', 3, 0>"


@pytest.mark.parametrize("n", range(1, 9))
def test_protocol_tuples_distinct(n):
    root = InstanceId.root("OciorABA", "ID")
    apva = root.child("APVA", "ID")
    ids = [root, apva]
    for j in range(1, n + 1):
        ids += [root.child("RBC", "ID", j), root.child("ABBA", "ID", j), apva.child("RBC", "ID'", j)]
        ids += [apva.child("Election", "ID", j), apva.child("ABBA", "ID'", j), apva.child("ABBA", "ID", j)]
        ids += [apva.child("ABBBA", "ID'", j, 0)]
        ids += [apva.child("ABBBA", "ID", j, k) for k in range(1, n + 1)]
    assert len(set(ids)) == len(ids)
    for a, b in itertools.combinations(ids[:20], 2):
        assert a != b


def test_bot_default_is_singleton_and_not_bytes():
    import pickle
    assert pickle.loads(pickle.dumps(BOT_DEFAULT)) is BOT_DEFAULT
    assert BOT_DEFAULT != b"" and repr(BOT_DEFAULT) == "BOT"


def test_bit_costs():
    assert index_bits(4) == 2 and index_bits(7) == 3 and index_bits(16) == 4
    assert header_bits(4) == 20
    iid = InstanceId.root("ACIDd", "ID")
    assert bit_cost(Envelope(1, 2, iid, Tag.VOTE, (3, 1)), 4) == 20 + 3
    assert bit_cost(Envelope(1, 2, iid, Tag.RBC_INIT, b"\x00" * 16), 4) == 20 + 128
    assert bit_cost(Envelope(1, 2, iid, Tag.ABBAVALUE, (0, 1)), 4) == 22
    assert bit_cost(Envelope(1, 2, iid, Tag.RBC_ECHO, PartialVector([0, 1, BOT, 1])), 4) == 28


def test_fresh_rbc_input_broadcasts_init():
    iid = InstanceId.root("RBC", "ID", 1)
    actions = RBC(iid, 1, 4, 1).step(Event(EventKind.INPUT, iid, b"m"))
    assert actions == [Action(ActionKind.SEND_ALL, None, (Tag.RBC_INIT, b"m"))]


def _feed(inst, events):
    return [inst.step(e) for e in events]


def test_terminated_absorbs_everything():
    iid = InstanceId.root("RBC", "ID", 1)
    node = RBC(iid, 2, 4, 1)
    for s in (1, 2, 3):
        node.step(Event(EventKind.MESSAGE, iid, (Tag.RBC_READY, b"v"), s))
    assert node.terminated and node.output == b"v"
    before = dict(node.__dict__)
    assert node.step(Event(EventKind.MESSAGE, iid, (Tag.RBC_INIT, b"x"), 1)) == []
    assert node.step(Event(EventKind.INPUT, iid, b"x")) == []
    assert node.__dict__ == before


def test_replay_gives_identical_actions():
    iid = InstanceId.root("RBC", "ID", 1)
    log = [Event(EventKind.MESSAGE, iid, (Tag.RBC_INIT, b"v"), 1)]
    log += [Event(EventKind.MESSAGE, iid, (Tag.RBC_ECHO, b"v"), s) for s in (1, 3, 4)]
    log += [Event(EventKind.MESSAGE, iid, (Tag.RBC_READY, b"v"), s) for s in (4, 1, 3)]
    assert _feed(RBC(iid, 2, 4, 1), log) == _feed(RBC(iid, 2, 4, 1), log)


def test_second_output_is_a_bug():
    iid = InstanceId.root("RBC", "ID", 1)
    node = RBC(iid, 2, 4, 1)
    node.finish(b"a", terminate=False)
    with pytest.raises(RuntimeError):
        node.finish(b"b")
