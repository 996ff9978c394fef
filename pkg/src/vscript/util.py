"""Low-level helpers shared across the package: hashing, seeded PRNG, ids."""

from __future__ import annotations

import secrets
import time

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class Splitmix64:
    """Deterministic 64-bit PRNG (splitmix64).

    Cheap to seed and fork; every consumer derives its own instance from an
    explicit seed so results are reproducible regardless of call order
    elsewhere in the process.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return self.next_u64() / 2**64

    def next_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.next_below(len(seq))]


def mix64(*parts: int | str | bytes) -> int:
    """Fold ints and strings into a single 64-bit seed, order-sensitive.

    Each part is hashed with a type tag so mix64(1, "a") != mix64("1a").
    """
    h = _FNV_OFFSET
    for part in parts:
        if isinstance(part, bytes):
            tag, data = b"b", part
        elif isinstance(part, str):
            tag, data = b"s", part.encode("utf-8")
        else:
            tag, data = b"i", (int(part) & _MASK64).to_bytes(8, "little")
        for b in tag + len(data).to_bytes(4, "little") + data:
            h ^= b
            h = (h * _FNV_PRIME) & _MASK64
    return h


_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def new_ulid(timestamp_ms: int | None = None, entropy: int | None = None) -> str:
    """Sortable 26-char unique id: 48-bit ms timestamp + 80 bits entropy.

    Both components can be pinned for deterministic tests.
    """
    if timestamp_ms is None:
        timestamp_ms = int(time.time() * 1000)
    if entropy is None:
        entropy = secrets.randbits(80)
    value = ((timestamp_ms & ((1 << 48) - 1)) << 80) | (entropy & ((1 << 80) - 1))
    chars = []
    for shift in range(125, -1, -5):
        chars.append(_CROCKFORD[(value >> shift) & 0x1F])
    return "".join(chars)


def normalize_ws(text: str) -> str:
    """Collapse all whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())
