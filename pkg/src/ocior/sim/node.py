"""Per-node runtime: instance registry, local event queue, action interpretation."""

from __future__ import annotations

from collections import deque
from typing import Any

from ..aba import OciorABA, OciorABAStar
from ..abba import ABBA
from ..abbba import ABBBA
from ..acidd import ACIDd
from ..apva import APVA
from ..coin import PENDING, CoinOracle
from ..core import ActionKind, Event, EventKind, InstanceId, Protocol
from ..rbc import RBC

FACTORY: dict[str, type[Protocol]] = {
    cls.label: cls for cls in (OciorABAStar, OciorABA, APVA, ACIDd, RBC, ABBA, ABBBA)
}
COIN_LABELS = ("Election", "Coin")

_SEND_ALL = ActionKind.SEND_ALL
_SEND = ActionKind.SEND
_CHILD_INPUT = ActionKind.CHILD_INPUT
_OUTPUT = ActionKind.OUTPUT
_DELIVER = ActionKind.DELIVER
_TERMINATE = ActionKind.TERMINATE


class Node:
    """Hosts every protocol instance of one node.

    Outgoing traffic accumulates in ``outbox`` as ``(instance, tag, payload, dst)``
    tuples, ``dst=None`` meaning every node; the simulator drains it after each
    delivered event.
    """

    def __init__(
        self, me: int, n: int, t: int, root: InstanceId, oracle: CoinOracle,
        apva_round_limit: int | None = None,
    ):
        self.me = me
        self.n = n
        self.t = t
        self.root = root
        self.oracle = oracle
        self.apva_round_limit = apva_round_limit
        self.instances: dict[InstanceId, Protocol] = {}
        self.children: dict[InstanceId, list[InstanceId]] = {}
        self.queue: deque = deque()
        self.outbox: list[tuple] = []
        self.outputs: dict[InstanceId, Any] = {}
        self.events_handled = 0
        self._get(root)

    @property
    def root_instance(self) -> Protocol:
        return self.instances[self.root]

    @property
    def done(self) -> bool:
        return self.instances[self.root].terminated

    def _get(self, iid: InstanceId) -> Protocol | None:
        inst = self.instances.get(iid)
        if inst is not None:
            return inst
        cls = FACTORY.get(iid[-1][0])
        if cls is None:
            return None
        parent = iid.parent
        if parent is None:
            if iid != self.root:
                return None
        else:
            p = self._get(parent)
            if p is None:
                return None
        try:
            inst = cls(iid, self.me, self.n, self.t)
        except (IndexError, TypeError, ValueError):
            return None
        if cls is APVA:
            inst.round_limit = self.apva_round_limit
        if parent is not None:
            if p.terminated:
                inst.terminated = True
            self.children.setdefault(parent, []).append(iid)
        self.instances[iid] = inst
        return inst

    def deliver(self, iid: InstanceId, tag, payload, src: int) -> None:
        self.events_handled += 1
        inst = self.instances.get(iid) or self._get(iid)
        if inst is None or inst.terminated:
            return
        # same as inst.step(Event(MESSAGE, ...)) without building the event
        self._apply(inst, inst.on_message(src, tag, payload))
        if self.queue:
            self._drain()

    def input(self, value: Any, iid: InstanceId | None = None) -> None:
        self.events_handled += 1
        iid = self.root if iid is None else iid
        inst = self._get(iid)
        if inst is None or inst.terminated:
            return
        self._apply(inst, inst.step(Event(EventKind.INPUT, iid, value)))
        self._drain()

    def coin_released(self, ident, value: int) -> None:
        if isinstance(ident, InstanceId):
            coin = ident
        else:
            abba, rnd = ident
            coin = abba.child("Coin", abba.base, rnd)
        self.queue.append((coin.parent, Event(EventKind.CHILD_OUTPUT, coin, value)))
        self._drain()

    def _coin(self, coin: InstanceId, payload: Any) -> None:
        if coin[-1][0] == "Election":
            value = self.oracle.election(coin, self.me)
        else:
            value = self.oracle.binary_coin(coin.parent, payload, self.me)
        if value is not PENDING:
            self.queue.append((coin.parent, Event(EventKind.CHILD_OUTPUT, coin, value)))

    def _drain(self) -> None:
        queue = self.queue
        while queue:
            iid, ev = queue.popleft()
            inst = self._get(iid)
            if inst is None or inst.terminated:
                continue
            self._apply(inst, inst.step(ev))

    def _apply(self, inst: Protocol, actions) -> None:
        for action in actions:
            kind = action.kind
            if kind is _SEND_ALL:
                tag, body = action.payload
                self.outbox.append((inst.iid, tag, body, None))
            elif kind is _SEND:
                tag, body = action.payload
                self.outbox.append((inst.iid, tag, body, action.target))
            elif kind is _CHILD_INPUT:
                target = action.target
                if target[-1][0] in COIN_LABELS:
                    self._coin(target, action.payload)
                else:
                    self.queue.append((target, Event(EventKind.INPUT, target, action.payload)))
            elif kind is _OUTPUT:
                self.outputs[inst.iid] = action.payload
                parent = inst.iid.parent
                if parent is not None:
                    self.queue.append((parent, Event(EventKind.CHILD_OUTPUT, inst.iid, action.payload)))
            elif kind is _DELIVER:
                parent = inst.iid.parent
                if parent is not None:
                    self.queue.append((parent, Event(EventKind.CHILD_DELIVER, inst.iid, action.payload)))
            elif kind is _TERMINATE:
                self._halt_subtree(inst.iid)

    def _halt_subtree(self, iid: InstanceId) -> None:
        stack = list(self.children.get(iid, ()))
        while stack:
            child = stack.pop()
            self.instances[child].terminated = True
            stack.extend(self.children.get(child, ()))

    def pending_instances(self) -> list[InstanceId]:
        """Live instances without an output yet (used in liveness reports)."""
        return [
            iid for iid, inst in self.instances.items()
            if not inst.terminated and not inst.has_output
        ]
