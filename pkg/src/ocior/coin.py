"""Oracle stand-in for the assumed common coin.

Values are a keyed 64-bit hash of the coin identity, released to every caller
once t+1 distinct honest nodes have activated that identity.  The oracle is
owned by the simulator; schedulers never see it.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from typing import Hashable


class _Pending:
    def __repr__(self) -> str:
        return "PENDING"


PENDING = _Pending()


def prf64(seed: int, ident: Hashable) -> int:
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "big")
    h = hashlib.blake2b(repr(ident).encode(), digest_size=8, key=key)
    return int.from_bytes(h.digest(), "big")


class CoinOracle:
    def __init__(self, n: int, t: int, seed: int, honest: set[int] | None = None):
        self.n = n
        self.t = t
        self.seed = seed
        self.honest = set(range(1, n + 1)) if honest is None else set(honest)
        self.activated: dict[Hashable, set[int]] = defaultdict(set)
        self._waiting: dict[Hashable, list[int]] = defaultdict(list)
        self._released: set[Hashable] = set()
        self._outbox: list[tuple[int, Hashable, int]] = []

    def _value(self, ident: Hashable, modulus: int, offset: int) -> int:
        return prf64(self.seed, ident) % modulus + offset

    def _activate(self, ident: Hashable, public: Hashable, caller: int, modulus: int, offset: int):
        callers = self.activated[ident]
        if caller in callers:
            return self._value(ident, modulus, offset) if ident in self._released else PENDING
        callers.add(caller)
        if ident in self._released:
            return self._value(ident, modulus, offset)
        self._waiting[ident].append(caller)
        if len(callers & self.honest) >= self.t + 1:
            self._released.add(ident)
            value = self._value(ident, modulus, offset)
            for c in self._waiting.pop(ident):
                if c != caller:
                    self._outbox.append((c, public, value))
            return value
        return PENDING

    def election(self, ident: Hashable, caller: int):
        """Uniform value in [1..n], or PENDING until t+1 honest activations."""
        return self._activate(("election", ident), ident, caller, self.n, 1)

    def binary_coin(self, ident: Hashable, rnd: int, caller: int):
        return self._activate(("binary", ident, rnd), (ident, rnd), caller, 2, 0)

    def is_released(self, ident: Hashable, rnd: int | None = None) -> bool:
        key = ("election", ident) if rnd is None else ("binary", ident, rnd)
        return key in self._released

    def drain(self) -> list[tuple[int, Hashable, int]]:
        """Deferred releases for callers that got PENDING.

        Items are ``(caller, ident, value)`` for elections and
        ``(caller, (ident, round), value)`` for binary coins.
        """
        out, self._outbox = self._outbox, []
        return out
