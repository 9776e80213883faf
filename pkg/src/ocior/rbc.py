"""Bracha-style reliable broadcast.

INIT from the leader, ECHO on the first INIT, READY on ceil((n+t+1)/2) matching
ECHOs or t+1 matching READYs, deliver on 2t+1 matching READYs.  Only the first
ECHO and the first READY of each sender count.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Any, Hashable

from .core import Action, Protocol, Tag


def echo_threshold(n: int, t: int) -> int:
    return -(-(n + t + 1) // 2)


class RBC(Protocol):
    label = "RBC"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.leader = iid.subs[0]
        self.echo_sent = False
        self.ready_sent = False
        self.init_seen = False
        self.echo_from: dict[Hashable, set[int]] = defaultdict(set)
        self.ready_from: dict[Hashable, set[int]] = defaultdict(set)
        self.echoed: set[int] = set()
        self.readied: set[int] = set()

    def on_input(self, value: Any) -> list[Action]:
        if self.me != self.leader:
            raise ValueError(f"node {self.me} is not the leader of {self.iid!r}")
        return [self.send_all(Tag.RBC_INIT, value)]

    def on_message(self, sender: int, tag: Tag, body: Any) -> list[Action]:
        try:
            hash(body)
        except TypeError:
            return []
        if body is None:
            return []
        if tag is Tag.RBC_INIT:
            if sender != self.leader or self.init_seen:
                return []
            self.init_seen = True
            if not self.echo_sent:
                self.echo_sent = True
                return [self.send_all(Tag.RBC_ECHO, body)]
            return []
        if tag is Tag.RBC_ECHO:
            if sender in self.echoed:
                return []
            self.echoed.add(sender)
            senders = self.echo_from[body]
            senders.add(sender)
            if not self.ready_sent and len(senders) >= echo_threshold(self.n, self.t):
                self.ready_sent = True
                return [self.send_all(Tag.RBC_READY, body)]
            return []
        if tag is Tag.RBC_READY:
            if sender in self.readied:
                return []
            self.readied.add(sender)
            senders = self.ready_from[body]
            senders.add(sender)
            actions = []
            if not self.ready_sent and len(senders) >= self.t + 1:
                self.ready_sent = True
                actions.append(self.send_all(Tag.RBC_READY, body))
            if len(senders) >= 2 * self.t + 1:
                actions += self.finish(body)
            return actions
        return []
