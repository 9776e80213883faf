import random

import pytest

from ocior.acidd import ACIDd
from ocior.core import BOT, ActionKind, Event, EventKind, InstanceId, Tag

IID = InstanceId.root("ACIDd", "ID")


def vote(node, j, v):
    return node.step(Event(EventKind.INPUT, IID, ("vote", j, v)))


def msg(tag, body, src):
    return Event(EventKind.MESSAGE, IID, (tag, body), src)


class Net:
    """All-honest ACIDd nodes; a node's delivered C_i is handed to everybody as
    the RBC<ID', i> output."""

    def __init__(self, n, t, seed):
        self.n, self.t = n, t
        self.rng = random.Random(seed)
        self.nodes = {i: ACIDd(IID, i, n, t) for i in range(1, n + 1)}
        self.queue = []
        self.first_return_elections = None

    def apply(self, i, actions):
        for a in actions:
            if a.kind is ActionKind.SEND_ALL:
                self.queue += [(i, d, a.payload) for d in self.nodes]
            elif a.kind is ActionKind.DELIVER:
                for k, node in self.nodes.items():
                    self.apply(k, node.step(Event(EventKind.INPUT, IID, ("rbc_vector", i, a.payload))))
            elif a.kind is ActionKind.OUTPUT and self.first_return_elections is None:
                self.first_return_elections = sum(x.election_sent for x in self.nodes.values())

    def run(self):
        while self.queue:
            src, dst, (tag, body) = self.queue.pop(self.rng.randrange(len(self.queue)))
            self.apply(dst, self.nodes[dst].step(msg(tag, body, src)))


def test_vote_is_one_small_broadcast():
    node = ACIDd(IID, 1, 4, 1)
    acts = vote(node, 3, 1)
    assert [(a.kind, a.payload) for a in acts] == [(ActionKind.SEND_ALL, (Tag.VOTE, (3, 1)))]
    assert vote(node, 3, 0) == []  # one vote per index


def test_vote_chain_sets_finish_indicator():
    node = ACIDd(IID, 1, 4, 1)
    node.step(msg(Tag.VOTE, (2, 1), 3))
    acts = node.step(msg(Tag.VOTE, (2, 1), 4))
    assert node.ind.ready(1)[2] == 1
    assert (Tag.READY, (2, 1)) in [a.payload for a in acts]
    for s in (1, 3, 4):
        node.step(msg(Tag.READY, (2, 1), s))
    assert node.ind.finish(1)[2] == 1 and node.ind.finish(0)[2] == 0


def test_confirm_vector_delivered_after_three_indices():
    node = ACIDd(IID, 1, 4, 1)
    delivered = []
    for j in (1, 2, 3):
        for s in (2, 3, 4):
            for a in node.step(msg(Tag.FINISH, (j, j % 2), s)):
                if a.kind is ActionKind.DELIVER:
                    delivered.append(a.payload)
    assert node.cnt == 3
    assert delivered == [node.confirm_vector()]
    assert list(delivered[0]) == [1, 0, 1, BOT]


def test_first_finish_wins():
    node = ACIDd(IID, 1, 4, 1)
    for b in (0, 1):
        for s in (2, 3, 4):
            node.step(msg(Tag.FINISH, (1, b), s))
    assert node.confirm[0] == 0


def test_incremental_inputs_per_index():
    node = ACIDd(IID, 1, 4, 1)
    assert vote(node, 1, 0)
    assert vote(node, 4, 1)
    assert vote(node, 2, 1)
    assert node.voted == {1, 2, 4}
    with pytest.raises(ValueError):
        vote(node, 5, 1)


@pytest.mark.parametrize("seed", range(100))
def test_full_vectors_return_everywhere(seed):
    n, t = 7, 2
    net = Net(n, t, seed)
    rng = random.Random(seed)
    for i, node in net.nodes.items():
        for j in rng.sample(range(1, n + 1), n):
            net.apply(i, vote(node, j, 1))
    net.run()
    assert all(x.has_output for x in net.nodes.values())
    assert net.first_return_elections >= n - 2 * t
    assert all(list(x.ind.finish(1))[1:] == [1] * n for x in net.nodes.values())
