"""Adversarial message scheduling with a hard delivery deadline.

Time advances in ticks.  At every tick the pool first releases each message whose
deadline ``enqueued_at + fairness_bound`` has been reached (oldest first), then
the strategy picks one more message.  Strategies see envelopes only, never coin
state.
"""

from __future__ import annotations

import random
from collections import OrderedDict
from typing import Callable, NamedTuple

from ..core import Envelope

STRATEGIES = ("fifo", "lifo", "random", "targeted-delay", "split-brain")


def fairness_bound(n: int) -> int:
    return 8 * n * n


class PendingMessage(NamedTuple):
    seq: int
    envelope: Envelope
    enqueued_at: int
    deliver_by: int


class _Bag:
    """Set with O(1) add, remove and uniform choice."""

    def __init__(self):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.items)

    def add(self, x: int) -> None:
        self.pos[x] = len(self.items)
        self.items.append(x)

    def remove(self, x: int) -> None:
        i = self.pos.pop(x)
        last = self.items.pop()
        if last != x:
            self.items[i] = last
            self.pos[last] = i

    def choice(self, rng: random.Random) -> int:
        return self.items[rng.randrange(len(self.items))]


class Scheduler:
    """Pending-message pool plus a delivery strategy.

    ``slow`` classifies envelopes the strategy wants to starve; they are picked
    only when nothing else is pending or their deadline forces them out.
    """

    def __init__(
        self,
        strategy: str,
        rng: random.Random,
        bound: int,
        slow: Callable[[Envelope], bool] | None = None,
    ):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown scheduler {strategy!r}; choose from {STRATEGIES}")
        self.strategy = strategy
        self.rng = rng
        self.bound = bound
        self.slow = slow if slow is not None else (lambda env: False)
        self.pending: OrderedDict[int, PendingMessage] = OrderedDict()
        self.fast_bag = _Bag()
        self.slow_bag = _Bag()
        self.seq = 0
        self.max_delay = 0
        self.forced = 0
        self._classify = strategy in ("targeted-delay", "split-brain")
        self._bagged = strategy in ("random", "targeted-delay", "split-brain")

    def __len__(self) -> int:
        return len(self.pending)

    def push(self, env: Envelope, now: int) -> None:
        self.seq = seq = self.seq + 1
        self.pending[seq] = PendingMessage(seq, env, now, now + self.bound)
        if self._classify and self.slow(env):
            self.slow_bag.add(seq)
        elif self._bagged:
            self.fast_bag.add(seq)

    def _take(self, seq: int, now: int) -> PendingMessage:
        msg = self.pending.pop(seq)
        if self._bagged:
            if seq in self.fast_bag.pos:
                self.fast_bag.remove(seq)
            else:
                self.slow_bag.remove(seq)
        if now - msg.enqueued_at > self.max_delay:
            self.max_delay = now - msg.enqueued_at
        return msg

    def due(self, now: int) -> PendingMessage | None:
        """The oldest message whose deadline is ``now`` or earlier, if any."""
        if not self.pending:
            return None
        seq, msg = next(iter(self.pending.items()))
        if msg.deliver_by <= now:
            self.forced += 1
            return self._take(seq, now)
        return None

    def next(self, now: int) -> PendingMessage:
        """Strategy choice among all pending messages (the pool must be non-empty)."""
        s = self.strategy
        if s == "fifo":
            seq = next(iter(self.pending))
        elif s == "lifo":
            seq = next(reversed(self.pending))
        elif len(self.fast_bag):
            seq = self.fast_bag.choice(self.rng)
        else:
            seq = self.slow_bag.choice(self.rng)
        return self._take(seq, now)

    def overdue(self, now: int) -> list[PendingMessage]:
        return [m for m in self.pending.values() if m.deliver_by < now]


def scheduler_next(pending: list[PendingMessage], rng: random.Random, strategy: str) -> PendingMessage:
    """Stateless choice over an explicit pending set (slow classes treated as fast)."""
    if not pending:
        raise ValueError("no pending messages")
    ordered = sorted(pending, key=lambda m: (m.enqueued_at, m.seq))
    if strategy == "fifo":
        return ordered[0]
    if strategy == "lifo":
        return ordered[-1]
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown scheduler {strategy!r}")
    return ordered[rng.randrange(len(ordered))]
