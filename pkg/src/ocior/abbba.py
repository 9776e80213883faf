"""Asynchronous biased binary Byzantine agreement (one VALUE exchange).

Input (a, b): broadcast (VALUE, a, b); output 1 at once if a or b is 1.
Otherwise wait until CountA >= t+1 or CountB >= t+1 (output 1) or
CountC >= n-t (output 0), checking the 1-conditions first.

Honest outputs of this primitive may differ across nodes.

A second input is a late reading of the same two indicators.  It sends nothing;
if it contains a 1 and the instance has not output yet, it outputs 1.
"""

from __future__ import annotations

from typing import Any

from .core import Action, Protocol, Tag


class ABBBA(Protocol):
    label = "ABBBA"

    def __init__(self, iid, me, n, t):
        super().__init__(iid, me, n, t)
        self.inputs: tuple[int, int] | None = None
        self.count_a = 0
        self.count_b = 0
        self.count_c = 0
        self.seen: set[int] = set()
        self.late_one = False

    def on_input(self, value: Any) -> list[Action]:
        a, b = value
        if a not in (0, 1) or b not in (0, 1):
            raise ValueError(f"biased agreement inputs must be bits, got {value!r}")
        if self.inputs is not None:
            if a or b:
                self.late_one = True
                return self.finish(1)
            return []
        self.inputs = (a, b)
        actions = [self.send_all(Tag.ABBAVALUE, (a, b))]
        if a == 1 or b == 1:
            return actions + self.finish(1)
        return actions + self._check()

    def on_message(self, sender: int, tag: Tag, body: Any) -> list[Action]:
        if tag is not Tag.ABBAVALUE or sender in self.seen:
            return []
        try:
            a, b = body
        except (TypeError, ValueError):
            return []
        if a not in (0, 1) or b not in (0, 1):
            return []
        self.seen.add(sender)
        self.count_a += a
        self.count_b += b
        if b == 0:
            self.count_c += 1
        return self._check()

    def _check(self) -> list[Action]:
        if self.inputs is None:
            return []
        if self.count_a >= self.t + 1 or self.count_b >= self.t + 1:
            return self.finish(1)
        if self.count_c >= self.n - self.t:
            return self.finish(0)
        return []
