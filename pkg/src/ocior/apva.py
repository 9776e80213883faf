"""Asynchronous partial vector agreement.

Inputs ``(j, v)`` go straight to the ACIDd child.  Once ACIDd returns its
indicator arrays the node runs election rounds r = 1..n; each round validates the
confirm vector of the elected node e:

    gate  ABBBA<ID', e, 0>(G[e], H[e])  ->  ABBA<ID', e>
    wait for RBC<ID', e> to deliver C_e; require |M(C_e)| >= n-t
    ABBBA<ID, e, j>(R^(C_e[j])[j], F^(C_e[j])[j]) for every j in M(C_e)
    final ABBA<ID, e>(all of them were 1)  ->  on 1 output C_e

Indicators keep growing after ACIDd returns.  When one that fed a pending ABBBA
(as alpha or beta) turns to 1, the same pair is passed in again as a late input
and that ABBBA outputs 1; otherwise an honest node whose indicators were still 0
at input time could wait on an ABBBA that never completes.

ABBA decisions are cached by e, so re-electing a node reuses them.  Rounds
continue past n unless ``round_limit`` is set: with n rounds only, a run in
which no election hits a node that completed dispersal early would stall.
"""

from __future__ import annotations

from enum import Enum
from typing import Any

from .acidd import INDICATOR_UPDATE
from .core import Action, InstanceId, PartialVector, Protocol, derived_id


class Phase(Enum):
    IDLE = "idle"
    AWAIT_COIN = "await_coin"
    AWAIT_GATE_ABBBA = "await_gate_abbba"
    AWAIT_GATE_ABBA = "await_gate_abba"
    AWAIT_RBC_VECTOR = "await_rbc_vector"
    AWAIT_PARALLEL_ABBBA = "await_parallel_abbba"
    AWAIT_FINAL_ABBA = "await_final_abba"
    EXHAUSTED = "exhausted"
    DONE = "done"


def coerce_vector(value: Any, n: int) -> PartialVector:
    """RBC outputs from a faulty leader may be ill-formed; map them to all-missing."""
    if isinstance(value, PartialVector) and len(value) == n:
        return value
    try:
        vec = PartialVector(value)
    except (TypeError, ValueError):
        return PartialVector.missing(n)
    return vec if len(vec) == n else PartialVector.missing(n)


class APVA(Protocol):
    label = "APVA"
    round_limit: int | None = None

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.id = iid.base
        self.id2 = derived_id(iid.base)
        self.acidd_iid = iid.child("ACIDd", self.id)
        self.indicators = None
        self.rbc_vectors: dict[int, PartialVector] = {}
        self.round = 0
        self.phase = Phase.IDLE
        self.elected: int | None = None
        self.gate_abbba: dict[int, int] = {}
        self.gate_abba: dict[int, int] = {}
        self.final_abba: dict[int, int] = {}
        self.index_abbba: dict[tuple[int, int], int] = {}
        self.pending_index: set[int] = set()
        self.abbba_input_sent: set[InstanceId] = set()
        self.election_log: list[int] = []
        self.output_round: int | None = None

    # child identities

    def rbc_id(self, j: int) -> InstanceId:
        return self.iid.child("RBC", self.id2, j)

    def election_id(self, r: int) -> InstanceId:
        return self.iid.child("Election", self.id, r)

    def gate_abbba_id(self, e: int) -> InstanceId:
        return self.iid.child("ABBBA", self.id2, e, 0)

    def gate_abba_id(self, e: int) -> InstanceId:
        return self.iid.child("ABBA", self.id2, e)

    def index_abbba_id(self, e: int, j: int) -> InstanceId:
        return self.iid.child("ABBBA", self.id, e, j)

    def final_abba_id(self, e: int) -> InstanceId:
        return self.iid.child("ABBA", self.id, e)

    # events

    def on_input(self, value: Any) -> list[Action]:
        j, v = value
        if v not in (0, 1):
            raise ValueError(f"APVA input for index {j} must be 0 or 1, got {v!r}")
        return [self.child_input(self.acidd_iid, ("vote", j, v))]

    def on_child_deliver(self, child: InstanceId, value: Any) -> list[Action]:
        if child != self.acidd_iid:
            return []
        if value == INDICATOR_UPDATE:
            return self._refresh()
        return [self.child_input(self.rbc_id(self.me), value)]

    def _refresh(self) -> list[Action]:
        """Late inputs for the ABBBA instances this round is waiting on."""
        ind, e = self.indicators, self.elected
        if ind is None:
            return []
        if self.phase is Phase.AWAIT_GATE_ABBBA:
            pair = (ind.rbc_ready[e], ind.rbc_finish[e])
            return [self.child_input(self.gate_abbba_id(e), pair)] if any(pair) else []
        if self.phase is Phase.AWAIT_PARALLEL_ABBBA:
            vec = self.rbc_vectors[e]
            actions = []
            for j in sorted(self.pending_index):
                b = vec[j - 1]
                pair = (ind.ready(b)[j], ind.finish(b)[j])
                if any(pair):
                    actions.append(self.child_input(self.index_abbba_id(e, j), pair))
            return actions
        return []

    def on_child(self, child: InstanceId, value: Any) -> list[Action]:
        label, base, subs = child.label, child.base, child.subs
        if child == self.acidd_iid:
            self.indicators = value
            return self._start_round(1)
        if label == "RBC" and base == self.id2:
            j = subs[0]
            vec = coerce_vector(value, self.n)
            self.rbc_vectors[j] = vec
            actions = [self.child_input(self.acidd_iid, ("rbc_vector", j, vec))]
            if self.phase is Phase.AWAIT_RBC_VECTOR and self.elected == j:
                actions += self._on_vector()
            return actions
        if label == "Election":
            if self.phase is Phase.AWAIT_COIN and subs[0] == self.round:
                return self._on_elected(value)
            return []
        if label == "ABBBA" and base == self.id2:
            e = subs[0]
            self.gate_abbba[e] = value
            if self.phase is Phase.AWAIT_GATE_ABBBA and self.elected == e:
                return self._gate_abba(e)
            return []
        if label == "ABBA" and base == self.id2:
            e = subs[0]
            self.gate_abba[e] = value
            if self.phase in (Phase.AWAIT_GATE_ABBBA, Phase.AWAIT_GATE_ABBA) and self.elected == e:
                return self._on_gate(value)
            return []
        if label == "ABBBA" and base == self.id:
            e, j = subs
            self.index_abbba[(e, j)] = value
            if self.phase is Phase.AWAIT_PARALLEL_ABBBA and self.elected == e:
                self.pending_index.discard(j)
                if not self.pending_index:
                    return self._final_abba()
            return []
        if label == "ABBA" and base == self.id:
            e = subs[0]
            self.final_abba[e] = value
            if self.phase in (Phase.AWAIT_PARALLEL_ABBBA, Phase.AWAIT_FINAL_ABBA) and self.elected == e:
                return self._on_final(value)
            return []
        return []

    # round machine

    def _start_round(self, r: int) -> list[Action]:
        self.round = r
        self.elected = None
        if self.round_limit is not None and r > self.round_limit:
            self.phase = Phase.EXHAUSTED
            return []
        self.phase = Phase.AWAIT_COIN
        return [self.child_input(self.election_id(r), r)]

    def _abbba_input(self, iid: InstanceId, pair: tuple[int, int]) -> list[Action]:
        # always sent, even when the ABBA it feeds is already decided: other
        # honest nodes may be waiting on this node's VALUE
        if iid in self.abbba_input_sent:
            return []
        self.abbba_input_sent.add(iid)
        return [self.child_input(iid, pair)]

    def _on_elected(self, e: int) -> list[Action]:
        self.elected = e
        self.election_log.append(e)
        ind = self.indicators
        actions = self._abbba_input(self.gate_abbba_id(e), (ind.rbc_ready[e], ind.rbc_finish[e]))
        if e in self.gate_abba:
            return actions + self._on_gate(self.gate_abba[e])
        if e in self.gate_abbba:
            return actions + self._gate_abba(e)
        self.phase = Phase.AWAIT_GATE_ABBBA
        return actions

    def _gate_abba(self, e: int) -> list[Action]:
        if e in self.gate_abba:
            return self._on_gate(self.gate_abba[e])
        self.phase = Phase.AWAIT_GATE_ABBA
        return [self.child_input(self.gate_abba_id(e), self.gate_abbba[e])]

    def _on_gate(self, bit: int) -> list[Action]:
        if bit == 0:
            return self._start_round(self.round + 1)
        self.phase = Phase.AWAIT_RBC_VECTOR
        if self.elected in self.rbc_vectors:
            return self._on_vector()
        return []

    def _on_vector(self) -> list[Action]:
        e = self.elected
        vec = self.rbc_vectors[e]
        present = sorted(vec.nonmissing())
        if len(present) < self.n - self.t:
            return self._start_round(self.round + 1)
        ind = self.indicators
        actions = []
        for j in present:
            b = vec[j - 1]
            actions += self._abbba_input(self.index_abbba_id(e, j), (ind.ready(b)[j], ind.finish(b)[j]))
        if e in self.final_abba:
            self.phase = Phase.AWAIT_FINAL_ABBA
            return actions + self._on_final(self.final_abba[e])
        self.phase = Phase.AWAIT_PARALLEL_ABBBA
        self.pending_index = {j for j in present if (e, j) not in self.index_abbba}
        if not self.pending_index:
            return actions + self._final_abba()
        return actions

    def _final_abba(self) -> list[Action]:
        e = self.elected
        present = self.rbc_vectors[e].nonmissing()
        bit = int(all(self.index_abbba[(e, j)] == 1 for j in present))
        if e in self.final_abba:
            self.phase = Phase.AWAIT_FINAL_ABBA
            return self._on_final(self.final_abba[e])
        self.phase = Phase.AWAIT_FINAL_ABBA
        return [self.child_input(self.final_abba_id(e), bit)]

    def _on_final(self, bit: int) -> list[Action]:
        if bit == 1:
            self.phase = Phase.DONE
            self.output_round = self.round
            return self.finish(self.rbc_vectors[self.elected])
        return self._start_round(self.round + 1)

    @property
    def exhausted(self) -> bool:
        return self.phase is Phase.EXHAUSTED

