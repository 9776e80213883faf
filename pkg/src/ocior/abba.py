"""Coin-based asynchronous binary agreement for n >= 3t+1.

Each round runs a binary-value broadcast of estimates (EST), an AUX exchange over
the supported values and a common binary coin:

* EST(r, b) from t+1 senders is relayed; from 2t+1 senders ``b`` joins bin_values[r].
* The first value in bin_values[r] is sent as AUX(r, b).
* Once n-t AUX values all lie in bin_values[r], their set ``vals`` is fixed and
  the round coin ``s`` is requested.  ``vals == {v}``: est := v and decide v if
  v == s.  Otherwise est := s.

A node that decides broadcasts TERM(v).  t+1 TERM(v) is adopted as a decision,
2t+1 TERM(v) is the output, after which the instance halts.  Nodes that have not
received an input relay EST and TERM but cast no EST/AUX of their own.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Any

from .core import Action, InstanceId, Protocol, Tag


def _parse(body: Any) -> tuple[int, int | None]:
    try:
        rnd, b = body
    except (TypeError, ValueError):
        return 0, None
    if type(rnd) is not int or rnd < 1 or b not in (0, 1):
        return 0, None
    return rnd, b


class ABBA(Protocol):
    label = "ABBA"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.est: int | None = None
        self.round = 0
        self.decision: int | None = None
        self.decided_round: int | None = None
        self.est_from = defaultdict(lambda: (set(), set()))
        self.est_sent = defaultdict(set)
        self.bin_values = defaultdict(list)
        self.aux_from: dict[int, dict[int, int]] = defaultdict(dict)
        self.aux_sent: set[int] = set()
        self.vals: dict[int, frozenset] = {}
        self.coins: dict[int, int] = {}
        self.term_from = (set(), set())
        self.term_sent = False

    def coin_id(self, rnd: int) -> InstanceId:
        return self.iid.child("Coin", self.iid.base, rnd)

    def on_input(self, value: Any) -> list[Action]:
        if self.est is not None:
            return []
        if value not in (0, 1):
            raise ValueError(f"binary agreement input must be 0 or 1, got {value!r}")
        self.est = value
        self.round = 1
        actions = self._send_est(1, value)
        return actions + self._progress()

    def on_message(self, sender: int, tag: Tag, body: Any) -> list[Action]:
        if tag is Tag.EST:
            rnd, b = _parse(body)
            if b is None:
                return []
            senders = self.est_from[rnd][b]
            if sender in senders:
                return []
            senders.add(sender)
            actions = []
            if len(senders) >= self.t + 1:
                actions += self._send_est(rnd, b)
            if len(senders) >= 2 * self.t + 1 and b not in self.bin_values[rnd]:
                self.bin_values[rnd].append(b)
            return actions + self._progress()
        if tag is Tag.AUX:
            rnd, b = _parse(body)
            if b is None:
                return []
            aux = self.aux_from[rnd]
            if sender in aux:
                return []
            aux[sender] = b
            return self._progress()
        if tag is Tag.TERM:
            b = body
            if b not in (0, 1):
                return []
            senders = self.term_from[b]
            if sender in senders:
                return []
            senders.add(sender)
            actions = []
            if len(senders) >= self.t + 1 and not self.term_sent:
                if self.decision is None:
                    self.decision = b
                self.term_sent = True
                actions.append(self.send_all(Tag.TERM, b))
            if len(senders) >= 2 * self.t + 1:
                actions += self.finish(b)
            return actions
        return []

    def on_child(self, child: InstanceId, value: Any) -> list[Action]:
        # binary coin released by the oracle
        rnd = child.subs[0]
        self.coins[rnd] = value
        return self._progress()

    def _send_est(self, rnd: int, b: int) -> list[Action]:
        if b in self.est_sent[rnd]:
            return []
        self.est_sent[rnd].add(b)
        return [self.send_all(Tag.EST, (rnd, b))]

    def _progress(self) -> list[Action]:
        actions: list[Action] = []
        while self.round and not self.terminated:
            rnd = self.round
            bins = self.bin_values[rnd]
            if not bins:
                break
            if rnd not in self.aux_sent:
                self.aux_sent.add(rnd)
                actions.append(self.send_all(Tag.AUX, (rnd, bins[0])))
            if rnd not in self.vals:
                supported = [b for b in self.aux_from[rnd].values() if b in bins]
                if len(supported) < self.n - self.t:
                    break
                self.vals[rnd] = frozenset(supported)
                actions.append(self.child_input(self.coin_id(rnd), rnd))
            if rnd not in self.coins:
                break
            s = self.coins[rnd]
            vals = self.vals[rnd]
            if len(vals) == 1:
                (v,) = vals
                self.est = v
                if v == s and self.decision is None:
                    self.decision = v
                    self.decided_round = rnd
                    if not self.term_sent:
                        self.term_sent = True
                        actions.append(self.send_all(Tag.TERM, v))
            else:
                self.est = s
            self.round = rnd + 1
            actions += self._send_est(self.round, self.est)
        return actions
