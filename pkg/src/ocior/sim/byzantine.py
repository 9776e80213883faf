"""Byzantine node behaviours.

A faulty node runs the honest state machines internally and the behaviour
rewrites (or suppresses) what leaves the node.  Faulty nodes always send under
their own identity; the simulator stamps ``src``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

from ..codec import Share
from ..core import BOT, PartialVector, Tag

BEHAVIOURS = ("silent", "crash-after-k", "equivocator", "random-noise")

_BIT_PAIR = (Tag.EST, Tag.AUX)
_INDEX_BIT = (Tag.VOTE, Tag.READY, Tag.FINISH)
_RBC = (Tag.RBC_INIT, Tag.RBC_ECHO, Tag.RBC_READY)


def _flip_bytes(data: bytes) -> bytes:
    return bytes(b ^ 0xFF for b in data)


def _flip_value(value: Any) -> Any:
    if isinstance(value, Share):
        return Share(value.index, _flip_bytes(value.data))
    if isinstance(value, PartialVector):
        return PartialVector(x if x == BOT else 1 - x for x in value)
    if isinstance(value, (bytes, bytearray)):
        return _flip_bytes(bytes(value))
    return value


def equivocate(tag: Tag, payload: Any, high: bool) -> Any:
    """Variant of ``payload`` for one half of the recipients.

    Bits become 1 for the ``high`` half and 0 for the rest; RBC payloads stay
    original for the ``high`` half and are bit-flipped for the rest.
    """
    bit = 1 if high else 0
    if tag in _BIT_PAIR or tag in _INDEX_BIT:
        return (payload[0], bit)
    if tag is Tag.TERM:
        return bit
    if tag is Tag.ABBAVALUE:
        return (bit, bit)
    if tag in _RBC:
        return payload if high else _flip_value(payload)
    return payload


def _random_value(value: Any, n: int, rng: random.Random) -> Any:
    if isinstance(value, Share):
        return Share(value.index, rng.randbytes(len(value.data)))
    if isinstance(value, PartialVector):
        return PartialVector(rng.choice((0, 1, BOT)) for _ in range(n))
    if isinstance(value, (bytes, bytearray)):
        return rng.randbytes(len(value))
    return value


def noise(tag: Tag, payload: Any, n: int, rng: random.Random) -> Any:
    """A well-formed message of the same type with random contents."""
    if tag in _BIT_PAIR:
        return (payload[0], rng.randrange(2))
    if tag in _INDEX_BIT:
        return (rng.randint(1, n), rng.randrange(2))
    if tag in (Tag.READY_RBC, Tag.FINISH_RBC):
        return rng.randint(1, n)
    if tag is Tag.TERM:
        return rng.randrange(2)
    if tag is Tag.ABBAVALUE:
        return (rng.randrange(2), rng.randrange(2))
    if tag in _RBC:
        return _random_value(payload, n, rng)
    return payload


@dataclass
class Behaviour:
    """Output filter of one faulty node.

    ``step`` maps one outgoing item ``(instance, tag, payload, dst)`` produced by
    the node's internal honest logic to the list of ``(dst, instance, tag,
    payload)`` sends that actually leave the node.
    """

    name: str
    n: int
    rng: random.Random
    crash_after: int = 10
    events: int = field(default=0, init=False)

    def __post_init__(self):
        if self.name not in BEHAVIOURS:
            raise ValueError(f"unknown adversary {self.name!r}; choose from {BEHAVIOURS}")

    @property
    def processes_events(self) -> bool:
        if self.name == "silent":
            return False
        if self.name == "crash-after-k":
            return self.events < self.crash_after
        return True

    def count_event(self) -> None:
        self.events += 1

    def step(self, item: tuple) -> list[tuple]:
        iid, tag, payload, dst = item
        dsts = range(1, self.n + 1) if dst is None else (dst,)
        name = self.name
        if name == "silent":
            return []
        if name == "crash-after-k":
            if self.events > self.crash_after:
                return []
            return [(d, iid, tag, payload) for d in dsts]
        half = self.n // 2
        if name == "equivocator":
            return [(d, iid, tag, equivocate(tag, payload, d <= half)) for d in dsts]
        return [(d, iid, tag, noise(tag, payload, self.n, self.rng)) for d in dsts]


def byzantine_step(behaviour: Behaviour, outgoing: list[tuple]) -> list[tuple]:
    """Apply ``behaviour`` to every item the node's honest logic wanted to send."""
    out = []
    for item in outgoing:
        out.extend(behaviour.step(item))
    return out
