"""Shared vocabulary: instance identities, partial vectors, events, actions, envelopes.

Every protocol in this package is a per-node state machine.  The runtime feeds it
one :class:`Event` at a time and interprets the list of :class:`Action` values it
returns; protocols never block and never touch the network directly.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Any, ClassVar, Iterable, NamedTuple

BOT = 2
"""Encoding of a missing element inside a :class:`PartialVector`."""


class _BotDefault:
    """No-agreement top-level output; distinct from every byte string."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOT"

    def __reduce__(self):
        return (_BotDefault, ())


BOT_DEFAULT = _BotDefault()


def derived_id(base: str) -> str:
    """The fixed derivation ID -> ID' used for the second identity family."""
    return base + "'"


class InstanceId(tuple):
    """Hierarchical protocol identity.

    A path of components ``(label, base, *subscripts)``; the last component names
    the instance itself and the prefix names its parent.  Equality is plain tuple
    equality.
    """

    __slots__ = ()

    def __new__(cls, components: Iterable[tuple] = ()):
        return super().__new__(cls, tuple(tuple(c) for c in components))

    @classmethod
    def root(cls, label: str, base: str, *subs: int) -> "InstanceId":
        return cls(((label, base, *subs),))

    def child(self, label: str, base: str, *subs: int) -> "InstanceId":
        return InstanceId(self + ((label, base, *subs),))

    @property
    def parent(self) -> "InstanceId | None":
        if len(self) <= 1:
            return None
        return InstanceId(self[:-1])

    @property
    def label(self) -> str:
        return self[-1][0]

    @property
    def base(self) -> str:
        return self[-1][1]

    @property
    def subs(self) -> tuple:
        return self[-1][2:]

    def ancestors(self) -> list["InstanceId"]:
        """Proper ancestors, outermost first."""
        return [InstanceId(self[:k]) for k in range(1, len(self))]

    def __repr__(self) -> str:
        parts = []
        for label, base, *subs in self:
            inner = ", ".join([base, *map(str, subs)])
            parts.append(f"{label}<{inner}>")
        return "/".join(parts)


class PartialVector(tuple):
    """Length-n vector over {0, 1, BOT}.  Stored 0-based; indices in the API are 1-based."""

    __slots__ = ()

    def __new__(cls, elems: Iterable[int]):
        elems = tuple(elems)
        for x in elems:
            if x not in (0, 1, BOT):
                raise ValueError(f"partial vector element must be 0, 1 or BOT, got {x!r}")
        return super().__new__(cls, elems)

    @classmethod
    def missing(cls, n: int) -> "PartialVector":
        return cls((BOT,) * n)

    def at(self, j: int) -> int:
        return self[j - 1]

    def with_value(self, j: int, v: int) -> "PartialVector":
        lst = list(self)
        lst[j - 1] = v
        return PartialVector(lst)

    def nonmissing(self) -> set[int]:
        return nonmissing_set(self)

    def ones(self) -> list[int]:
        return [j for j, x in enumerate(self, 1) if x == 1]

    def __repr__(self) -> str:
        return "[" + ",".join("⊥" if x == BOT else str(x) for x in self) + "]"


def nonmissing_set(w: Iterable[int]) -> set[int]:
    """Indices (1-based) of the non-missing elements of ``w``."""
    return {j for j, x in enumerate(w, 1) if x != BOT}


class EventKind(Enum):
    INPUT = "input"
    MESSAGE = "message"
    CHILD_OUTPUT = "child_output"
    CHILD_DELIVER = "child_deliver"


class Event(NamedTuple):
    kind: EventKind
    instance: InstanceId
    payload: Any = None
    origin: int | None = None


class ActionKind(Enum):
    SEND_ALL = "send_all"
    SEND = "send"
    CHILD_INPUT = "child_input"
    OUTPUT = "output"
    # non-final upward notification (ACIDd hands C_i to APVA before it returns)
    DELIVER = "deliver"
    TERMINATE = "terminate"


class Action(NamedTuple):
    kind: ActionKind
    target: Any = None
    payload: Any = None


class Tag(Enum):
    INPUT = "INPUT"
    RBC_INIT = "RBC_INIT"
    RBC_ECHO = "RBC_ECHO"
    RBC_READY = "RBC_READY"
    EST = "EST"
    AUX = "AUX"
    TERM = "TERM"
    ABBAVALUE = "ABBAVALUE"
    VOTE = "VOTE"
    READY = "READY"
    FINISH = "FINISH"
    READY_RBC = "READY'"
    FINISH_RBC = "FINISH'"
    ELECTION = "ELECTION"
    CONFIRM = "CONFIRM"


class Envelope(NamedTuple):
    src: int
    dst: int
    instance: InstanceId
    tag: Tag
    payload: Any


ROUND_BITS = 8


def index_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def header_bits(n: int) -> int:
    return 16 + 2 * index_bits(n)


def value_bits(value: Any) -> int:
    """Wire size of an RBC payload."""
    if isinstance(value, PartialVector):
        return 2 * len(value)
    if isinstance(value, (bytes, bytearray)):
        return 8 * len(value)
    wire = getattr(value, "wire_bits", None)
    if wire is not None:
        return wire
    return 0


def payload_bits(tag: Tag, payload: Any, n: int) -> int:
    if tag in (Tag.RBC_INIT, Tag.RBC_ECHO, Tag.RBC_READY, Tag.INPUT):
        return value_bits(payload)
    if tag in (Tag.EST, Tag.AUX):
        return ROUND_BITS + 1
    if tag is Tag.TERM:
        return 1
    if tag is Tag.ABBAVALUE:
        return 2
    if tag in (Tag.VOTE, Tag.READY, Tag.FINISH):
        return index_bits(n) + 1
    if tag in (Tag.READY_RBC, Tag.FINISH_RBC):
        return index_bits(n)
    return 0


def bit_cost(env: Envelope, n: int) -> int:
    return payload_bits(env.tag, env.payload, n) + header_bits(n)


class Protocol:
    """Base class for per-node protocol state machines.

    Subclasses implement ``on_input``, ``on_message`` and ``on_child`` and return
    lists of actions.  Once terminated an instance absorbs every event.
    """

    label: ClassVar[str] = "?"

    def __init__(self, iid: InstanceId, me: int, n: int, t: int):
        self.iid = iid
        self.me = me
        self.n = n
        self.t = t
        self.terminated = False
        self.has_output = False
        self.output: Any = None

    def step(self, event: Event) -> list[Action]:
        if self.terminated:
            return []
        kind = event.kind
        if kind is EventKind.MESSAGE:
            tag, body = event.payload
            return self.on_message(event.origin, tag, body)
        if kind is EventKind.INPUT:
            return self.on_input(event.payload)
        if kind is EventKind.CHILD_OUTPUT:
            return self.on_child(event.instance, event.payload)
        if kind is EventKind.CHILD_DELIVER:
            return self.on_child_deliver(event.instance, event.payload)
        raise ValueError(f"unknown event kind {kind}")

    def on_input(self, value: Any) -> list[Action]:
        return []

    def on_message(self, sender: int, tag: Tag, body: Any) -> list[Action]:
        return []

    def on_child(self, child: InstanceId, value: Any) -> list[Action]:
        return []

    def on_child_deliver(self, child: InstanceId, value: Any) -> list[Action]:
        return []

    # helpers

    def send_all(self, tag: Tag, body: Any = None) -> Action:
        return Action(ActionKind.SEND_ALL, None, (tag, body))

    def send_to(self, dst: int, tag: Tag, body: Any = None) -> Action:
        return Action(ActionKind.SEND, dst, (tag, body))

    def child_input(self, child: InstanceId, value: Any) -> Action:
        return Action(ActionKind.CHILD_INPUT, child, value)

    def finish(self, value: Any, terminate: bool = True) -> list[Action]:
        """Emit the single Output (and usually Terminate) of this instance."""
        if self.has_output:
            raise RuntimeError(f"{self.iid!r} produced a second output")
        self.has_output = True
        self.output = value
        actions = [Action(ActionKind.OUTPUT, None, value)]
        if terminate:
            self.terminated = True
            actions.append(Action(ActionKind.TERMINATE))
        return actions
