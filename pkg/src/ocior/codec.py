"""Systematic (n, k) Reed-Solomon erasure code over GF(2^8).

Share ``j`` is the evaluation at ``x = j`` of the degree < k polynomial that takes
the k data symbols at ``x = 1..k``, so shares ``1..k`` are the data symbols
themselves.  The data block is a 32-bit big-endian bit length, the message, and
zero padding up to ``k * m`` bytes with ``m = ceil((ell + 32) / (8 k))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

PRIM_POLY = 0x11D
LOG_Q = 8
PREFIX_BYTES = 4


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(512, dtype=np.int32)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIM_POLY
    exp[255:510] = exp[:255]
    return exp, log


GF_EXP, GF_LOG = _build_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(GF_EXP[GF_LOG[a] + GF_LOG[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(GF_EXP[255 - GF_LOG[a]])


def _scale(c: int, v: np.ndarray) -> np.ndarray:
    if c == 0:
        return np.zeros_like(v)
    out = GF_EXP[GF_LOG[v] + GF_LOG[c]].astype(np.uint8)
    out[v == 0] = 0
    return out


def lagrange_coeff(points: Sequence[int], i: int, x: int) -> int:
    """Basis polynomial for ``points[i]`` over ``points``, evaluated at ``x``."""
    xi = points[i]
    num = den = 1
    for m, xm in enumerate(points):
        if m == i:
            continue
        num = gf_mul(num, x ^ xm)
        den = gf_mul(den, xi ^ xm)
    return gf_mul(num, gf_inv(den))


@lru_cache(maxsize=1024)
def _matrix(points: tuple[int, ...], targets: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(lagrange_coeff(points, i, x) for i in range(len(points)))
        for x in targets
    )


def _combine(row: Sequence[int], symbols: Sequence[np.ndarray]) -> bytes:
    acc = np.zeros(len(symbols[0]), dtype=np.uint8)
    for c, s in zip(row, symbols):
        acc ^= _scale(c, s)
    return acc.tobytes()


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    m: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > 255:
            raise ValueError("GF(256) supports at most 255 shares")
        if self.m < 1:
            raise ValueError("symbol length must be positive")

    @staticmethod
    def symbol_len(ell: int, k: int) -> int:
        return -(-(ell + 8 * PREFIX_BYTES) // (8 * k))

    @classmethod
    def for_message(cls, n: int, k: int, ell: int) -> "CodeParams":
        return cls(n, k, cls.symbol_len(ell, k))


@dataclass(frozen=True)
class Share:
    index: int
    data: bytes

    @property
    def wire_bits(self) -> int:
        return 8 * (1 + len(self.data))

    def to_wire(self) -> bytes:
        return bytes([self.index]) + self.data

    @classmethod
    def from_wire(cls, raw: bytes) -> "Share":
        return cls(raw[0], bytes(raw[1:]))


@dataclass(frozen=True)
class DecodeGarbage:
    """Interpolation succeeded but the block does not parse as an encoded message."""

    raw: bytes


def ec_encode(n: int, k: int, message: bytes) -> list[Share]:
    ell = 8 * len(message)
    if ell == 0:
        raise ValueError("cannot encode an empty message")
    params = CodeParams.for_message(n, k, ell)
    m = params.m
    block = ell.to_bytes(PREFIX_BYTES, "big") + bytes(message)
    block += bytes(k * m - len(block))
    data = [block[i * m:(i + 1) * m] for i in range(k)]
    shares = [Share(j, data[j - 1]) for j in range(1, k + 1)]
    if n > k:
        symbols = [np.frombuffer(d, dtype=np.uint8) for d in data]
        points = tuple(range(1, k + 1))
        rows = _matrix(points, tuple(range(k + 1, n + 1)))
        for j, row in zip(range(k + 1, n + 1), rows):
            shares.append(Share(j, _combine(row, symbols)))
    return shares


def interpolate_block(n: int, k: int, shares: Iterable[Share]) -> bytes:
    """Recover the k data symbols (concatenated) from any k shares."""
    shares = sorted(shares, key=lambda s: s.index)
    if len(shares) != k:
        raise ValueError(f"need exactly {k} shares, got {len(shares)}")
    idx = [s.index for s in shares]
    if len(set(idx)) != k:
        raise ValueError(f"duplicate share indices {idx}")
    if any(not 1 <= j <= n for j in idx):
        raise ValueError(f"share index out of range 1..{n}: {idx}")
    m = len(shares[0].data)
    if m == 0 or any(len(s.data) != m for s in shares):
        raise ValueError("shares have inconsistent lengths")
    if idx == list(range(1, k + 1)):
        return b"".join(s.data for s in shares)
    symbols = [np.frombuffer(s.data, dtype=np.uint8) for s in shares]
    rows = _matrix(tuple(idx), tuple(range(1, k + 1)))
    return b"".join(_combine(row, symbols) for row in rows)


def ec_decode(n: int, k: int, shares: Iterable[Share]) -> bytes | DecodeGarbage:
    block = interpolate_block(n, k, shares)
    m = len(block) // k
    ell = int.from_bytes(block[:PREFIX_BYTES], "big")
    size, rem = divmod(ell, 8)
    if (
        ell == 0
        or rem
        or PREFIX_BYTES + size > len(block)
        or CodeParams.symbol_len(ell, k) != m
        or any(block[PREFIX_BYTES + size:])
    ):
        return DecodeGarbage(block)
    return block[PREFIX_BYTES:PREFIX_BYTES + size]
