"""Per-index vote/ready/finish dispersal with RBC-completion indicators.

Inputs arrive as ``("vote", j, v)`` (the node's own value for index j) and
``("rbc_vector", j, C_j)`` (the output of the parent's RBC led by node j).  The
instance DELIVERs its confirm vector once n-t indices are confirmed and OUTPUTs
its :class:`Indicators` on 2t+1 CONFIRM.  It keeps running afterwards, so the
returned indicator arrays continue to fill in; every later change is announced
with a DELIVER of :data:`INDICATOR_UPDATE` so the parent can re-read them.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Any

from .core import BOT, Action, ActionKind, PartialVector, Protocol, Tag


INDICATOR_UPDATE = "indicator-update"


@dataclass
class Indicators:
    """The six monotone 0/1 arrays, indexed 1..n (slot 0 unused)."""

    ready1: bytearray
    ready0: bytearray
    finish1: bytearray
    finish0: bytearray
    rbc_ready: bytearray
    rbc_finish: bytearray

    @classmethod
    def empty(cls, n: int) -> "Indicators":
        return cls(*(bytearray(n + 1) for _ in range(6)))

    def ready(self, b: int) -> bytearray:
        return self.ready1 if b == 1 else self.ready0

    def finish(self, b: int) -> bytearray:
        return self.finish1 if b == 1 else self.finish0

    def snapshot(self) -> tuple[bytes, ...]:
        return tuple(bytes(a) for a in (
            self.ready1, self.ready0, self.finish1, self.finish0,
            self.rbc_ready, self.rbc_finish,
        ))


class ACIDd(Protocol):
    label = "ACIDd"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.ind = Indicators.empty(n)
        self.confirm = [BOT] * n
        self.cnt = 0
        self.delivered = False
        self.voted: set[int] = set()
        self.vote_sent: set[tuple[int, int]] = set()
        self.votes = defaultdict(set)
        self.readies = defaultdict(set)
        self.finishes = defaultdict(set)
        self.readies_rbc = defaultdict(set)
        self.finishes_rbc = defaultdict(set)
        self.ready_done: set[tuple[int, int]] = set()
        self.finish_done: set[tuple[int, int]] = set()
        self.confirm_done: set[tuple[int, int]] = set()
        self.rbc_seen: set[int] = set()
        self.rbc_finish_done: set[int] = set()
        self.election_sent = False
        self.elections: set[int] = set()
        self.confirms: set[int] = set()
        self.confirm_sent = False

    def confirm_vector(self) -> PartialVector:
        return PartialVector(self.confirm)

    def on_input(self, value: Any) -> list[Action]:
        kind, j, v = value
        if not 1 <= j <= self.n:
            raise ValueError(f"index {j} out of range")
        if kind == "vote":
            if v not in (0, 1):
                raise ValueError(f"vote must be 0 or 1, got {v!r}")
            if j in self.voted:
                return []
            self.voted.add(j)
            return self._vote(j, v)
        if kind == "rbc_vector":
            if j in self.rbc_seen:
                return []
            self.rbc_seen.add(j)
            self.ind.rbc_ready[j] = 1
            return [self.send_all(Tag.READY_RBC, j)] + self._updated()
        raise ValueError(f"unknown input kind {kind!r}")

    def _updated(self) -> list[Action]:
        if not self.has_output:
            return []
        return [Action(ActionKind.DELIVER, None, INDICATOR_UPDATE)]

    def _vote(self, j: int, b: int) -> list[Action]:
        if (j, b) in self.vote_sent:
            return []
        self.vote_sent.add((j, b))
        return [self.send_all(Tag.VOTE, (j, b))]

    def on_message(self, sender: int, tag: Tag, body: Any) -> list[Action]:
        n, t = self.n, self.t
        if tag in (Tag.VOTE, Tag.READY, Tag.FINISH):
            try:
                j, b = body
            except (TypeError, ValueError):
                return []
            if b not in (0, 1) or not 1 <= j <= n:
                return []
            key = (j, b)
            if tag is Tag.VOTE:
                senders = self.votes[key]
                if sender in senders:
                    return []
                senders.add(sender)
                if len(senders) >= t + 1 and key not in self.ready_done:
                    self.ready_done.add(key)
                    actions = self._vote(j, b)
                    self.ind.ready(b)[j] = 1
                    actions.append(self.send_all(Tag.READY, key))
                    return actions + self._updated()
                return []
            if tag is Tag.READY:
                senders = self.readies[key]
                if sender in senders:
                    return []
                senders.add(sender)
                if len(senders) >= n - t and key not in self.finish_done:
                    self.finish_done.add(key)
                    self.ind.finish(b)[j] = 1
                    return [self.send_all(Tag.FINISH, key)] + self._updated()
                return []
            senders = self.finishes[key]
            if sender in senders:
                return []
            senders.add(sender)
            if len(senders) >= n - t and key not in self.confirm_done:
                self.confirm_done.add(key)
                if self.confirm[j - 1] == BOT:
                    self.confirm[j - 1] = b
                    self.cnt += 1
                    if self.cnt == n - t and not self.delivered:
                        self.delivered = True
                        return [Action(ActionKind.DELIVER, None, self.confirm_vector())]
            return []
        if tag is Tag.READY_RBC:
            j = body
            if not isinstance(j, int) or not 1 <= j <= n:
                return []
            senders = self.readies_rbc[j]
            if sender in senders:
                return []
            senders.add(sender)
            if len(senders) >= n - t and j not in self.rbc_finish_done:
                self.rbc_finish_done.add(j)
                self.ind.rbc_finish[j] = 1
                return [self.send_all(Tag.FINISH_RBC, j)] + self._updated()
            return []
        if tag is Tag.FINISH_RBC:
            j = body
            if j != self.me:
                return []
            senders = self.finishes_rbc[j]
            if sender in senders:
                return []
            senders.add(sender)
            if len(senders) >= n - t and not self.election_sent:
                self.election_sent = True
                return [self.send_all(Tag.ELECTION)]
            return []
        if tag is Tag.ELECTION:
            if sender in self.elections:
                return []
            self.elections.add(sender)
            if len(self.elections) >= n - t and not self.confirm_sent:
                self.confirm_sent = True
                return [self.send_all(Tag.CONFIRM)]
            return []
        if tag is Tag.CONFIRM:
            if sender in self.confirms:
                return []
            self.confirms.add(sender)
            actions = []
            if len(self.confirms) >= t + 1 and not self.confirm_sent:
                self.confirm_sent = True
                actions.append(self.send_all(Tag.CONFIRM))
            if len(self.confirms) >= 2 * t + 1 and not self.has_output:
                if not self.confirm_sent:
                    self.confirm_sent = True
                    actions.append(self.send_all(Tag.CONFIRM))
                actions += self.finish(self.ind, terminate=False)
            return actions
        return []
