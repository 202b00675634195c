"""Portable pseudo-random generator for reproducible sampling.

The evaluation protocol must replicate across implementations, so
instead of a platform RNG this module pins the full algorithm:

* Generator: xoshiro256** (Blackman & Vigna), 256-bit state.
* Seeding: the 64-bit seed is expanded into the four state words with
  four successive outputs of splitmix64.
* Bounded integers: ``bounded(n)`` is the multiply-shift map
  ``(next_u64() * n) >> 64``; its bias is below n / 2**64 and it needs
  exactly one draw, which keeps sequences aligned across ports.
* Sampling without replacement: a partial Fisher-Yates shuffle that
  draws ``bounded(remaining)`` per position.

All arithmetic is modulo 2**64.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded from a single 64-bit integer via splitmix64."""

    def __init__(self, seed: int) -> None:
        sm = seed & _MASK64
        state = []
        for _ in range(4):
            sm, word = _splitmix64(sm)
            state.append(word)
        self._s = state

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def bounded(self, n: int) -> int:
        """Uniform-ish integer in [0, n) using one draw (multiply-shift)."""
        if n < 1:
            raise ValueError(f"bound must be positive, got {n}")
        return (self.next_u64() * n) >> 64

    def sample_without_replacement(self, count: int, population: int) -> list[int]:
        """``count`` distinct indices from range(population), order-significant."""
        if count < 0 or count > population:
            raise ValueError(f"cannot draw {count} from a population of {population}")
        pool = list(range(population))
        for i in range(count):
            j = i + self.bounded(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]
