"""Counter-based, hierarchically derivable random streams.

A stream is identified by a 64-bit key. The ``k``-th draw is a pure function
of ``(key, k)`` (SplitMix64 output function applied to ``key + k * golden``),
so streams can be created anywhere, in any order and on any thread, and still
reproduce the same numbers. Child streams are derived by hashing an integer
identifier into the parent key::

    image_rng = RngStream(seed).child(step, index)
    view_rng = image_rng.child(VIEW_DOMAIN, view)
    slot_rng = view_rng.child(slot)

Only the standard library is used; the draw rate (~1 µs) is far below the cost
of any image kernel.
"""

from __future__ import annotations

__all__ = ["RngStream"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_CHILD_SALT = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / (1 << 53)


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _derive(key: int, ident: int) -> int:
    return _mix64(key ^ _mix64(((ident & _MASK) * _CHILD_SALT + _GOLDEN) & _MASK))


class RngStream:
    """A keyed random stream with a private draw counter.

    The counter is the only mutable state; two streams with equal keys produce
    identical sequences. Streams are cheap to create and are not meant to be
    shared between threads (derive a child instead).
    """

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, *path: int):
        key = _mix64((int(seed) & _MASK) ^ _GOLDEN)
        for ident in path:
            key = _derive(key, int(ident))
        self.key = key
        self.counter = 0

    @classmethod
    def from_key(cls, key: int) -> RngStream:
        stream = cls.__new__(cls)
        stream.key = key & _MASK
        stream.counter = 0
        return stream

    def child(self, *path: int) -> RngStream:
        """Return an independent stream keyed by this stream's key and ``path``.

        Derivation ignores how many numbers have been drawn from ``self``.
        """
        key = self.key
        for ident in path:
            key = _derive(key, int(ident))
        return RngStream.from_key(key)

    def next_u64(self) -> int:
        self.counter += 1
        return _mix64((self.key + self.counter * _GOLDEN) & _MASK)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of resolution."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in the half-open range [low, high)."""
        n = high - low
        if n <= 0:
            raise ValueError(f"empty integer range [{low}, {high})")
        # multiply-shift; bias is n / 2**64, negligible for image-sized ranges
        return low + ((self.next_u64() * n) >> 64)

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(0, i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def __repr__(self) -> str:
        return f"RngStream(key=0x{self.key:016x}, counter={self.counter})"
