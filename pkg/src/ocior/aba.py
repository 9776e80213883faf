"""Top-level multi-valued agreement: OciorABA* (n parallel ABBA) and OciorABA (one APVA).

Both variants share the front end (encode the input, broadcast the node's own
share, compare every delivered leader share against the local codeword) and the
back end (pick the first t+1 indices agreed on as 1, wait for their shares,
decode).
"""

from __future__ import annotations

from typing import Any

from .codec import DecodeGarbage, Share, ec_decode, ec_encode
from .core import BOT, BOT_DEFAULT, Action, InstanceId, PartialVector, Protocol


def decode_value(n: int, k: int, shares: dict[int, Any]) -> Any:
    """Decode the shares delivered by the RBC instances in K.

    Positions come from the RBC leader index, not from the (untrusted) index
    carried inside a share.  Shares that cannot be interpolated together yield
    BOT_DEFAULT; a block that interpolates but does not parse is returned raw.
    """
    try:
        parts = [Share(j, bytes(s.data)) for j, s in shares.items()]
        out = ec_decode(n, k, parts)
    except (AttributeError, TypeError, ValueError):
        return BOT_DEFAULT
    if isinstance(out, DecodeGarbage):
        return out.raw
    return out


class _ABAFrontEnd(Protocol):
    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.id = iid.base
        self.codeword: list[Share] | None = None
        self.delivered: dict[int, Any] = {}
        self.votes = [BOT] * n
        self.ones: list[int] | None = None
        self.waiting_for: list[int] | None = None

    def rbc_id(self, j: int) -> InstanceId:
        return self.iid.child("RBC", self.id, j)

    def on_input(self, value: Any) -> list[Action]:
        if self.codeword is not None:
            return []
        if not isinstance(value, (bytes, bytearray)) or len(value) == 0:
            raise ValueError("agreement input must be a non-empty byte string")
        self.codeword = ec_encode(self.n, self.t + 1, bytes(value))
        actions = [self.child_input(self.rbc_id(self.me), self.codeword[self.me - 1])]
        for j in sorted(self.delivered):
            actions += self._compare(j)
        return actions

    def _compare(self, j: int) -> list[Action]:
        if self.codeword is None or self.votes[j - 1] != BOT:
            return []
        v = int(self.delivered[j] == self.codeword[j - 1])
        self.votes[j - 1] = v
        return self.on_vote(j, v)

    def on_rbc(self, j: int, share: Any) -> list[Action]:
        if j in self.delivered:
            return []
        self.delivered[j] = share
        actions = self._compare(j)
        if self.waiting_for is not None:
            actions += self._try_decode()
        return actions

    def on_vote(self, j: int, v: int) -> list[Action]:
        raise NotImplementedError

    def finalize(self, ones: list[int]) -> list[Action]:
        self.ones = sorted(ones)
        if len(self.ones) < self.t + 1:
            return self.finish(BOT_DEFAULT)
        self.waiting_for = self.ones[: self.t + 1]
        return self._try_decode()

    def _try_decode(self) -> list[Action]:
        if self.has_output or any(j not in self.delivered for j in self.waiting_for):
            return []
        shares = {j: self.delivered[j] for j in self.waiting_for}
        return self.finish(decode_value(self.n, self.t + 1, shares))


class OciorABAStar(_ABAFrontEnd):
    """n parallel binary agreements, one per leader."""

    label = "OciorABAStar"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.abba_input: set[int] = set()
        self.abba_out: dict[int, int] = {}
        self.backfilled = False

    def abba_id(self, j: int) -> InstanceId:
        return self.iid.child("ABBA", self.id, j)

    def on_vote(self, j: int, v: int) -> list[Action]:
        if j in self.abba_input:
            return []
        self.abba_input.add(j)
        return [self.child_input(self.abba_id(j), v)]

    def on_child(self, child: InstanceId, value: Any) -> list[Action]:
        if child.label == "RBC":
            return self.on_rbc(child.subs[0], value)
        if child.label != "ABBA":
            return []
        j = child.subs[0]
        self.abba_out[j] = value
        actions = []
        if len(self.abba_out) >= self.n - self.t and not self.backfilled:
            self.backfilled = True
            for k in range(1, self.n + 1):
                if k not in self.abba_input:
                    self.abba_input.add(k)
                    actions.append(self.child_input(self.abba_id(k), 0))
        if len(self.abba_out) == self.n and self.ones is None:
            actions += self.finalize([k for k, b in self.abba_out.items() if b == 1])
        return actions


class OciorABA(_ABAFrontEnd):
    """Agreement through a single partial vector agreement instance."""

    label = "OciorABA"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.apva_iid = iid.child("APVA", self.id)
        self.apva_output: PartialVector | None = None

    def on_vote(self, j: int, v: int) -> list[Action]:
        return [self.child_input(self.apva_iid, (j, v))]

    def on_child(self, child: InstanceId, value: Any) -> list[Action]:
        if child.label == "RBC":
            return self.on_rbc(child.subs[0], value)
        if child == self.apva_iid and self.ones is None:
            self.apva_output = value
            return self.finalize(value.ones())
        return []
