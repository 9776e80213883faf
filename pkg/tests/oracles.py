"""Slow, table-free reference implementations used to derive frozen test values."""

from __future__ import annotations


def gf_mul_slow(a: int, b: int) -> int:
    """Shift-and-add multiplication modulo x^8 + x^4 + x^3 + x^2 + 1."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
    return out


def gf_pow_slow(a: int, e: int) -> int:
    out = 1
    for _ in range(e):
        out = gf_mul_slow(out, a)
    return out


def gf_inv_slow(a: int) -> int:
    return gf_pow_slow(a, 254)


def interpolate_at(points: list[tuple[int, int]], x: int) -> int:
    """Value at x of the unique polynomial of degree < len(points) through points."""
    acc = 0
    for i, (xi, yi) in enumerate(points):
        num = den = 1
        for m, (xm, _) in enumerate(points):
            if m != i:
                num = gf_mul_slow(num, x ^ xm)
                den = gf_mul_slow(den, xi ^ xm)
        acc ^= gf_mul_slow(yi, gf_mul_slow(num, gf_inv_slow(den)))
    return acc


def encode_slow(n: int, k: int, message: bytes) -> list[bytes]:
    ell = 8 * len(message)
    m = -(-(ell + 32) // (8 * k))
    block = ell.to_bytes(4, "big") + message
    block += bytes(k * m - len(block))
    data = [block[i * m:(i + 1) * m] for i in range(k)]
    shares = []
    for x in range(1, n + 1):
        shares.append(bytes(
            interpolate_at([(j + 1, data[j][c]) for j in range(k)], x) for c in range(m)
        ))
    return shares
