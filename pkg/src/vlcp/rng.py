"""Deterministic randomness: a portable 64-bit PRNG and seed derivation.

Every stochastic choice in this library draws from splitmix64 seeded
through :func:`derive_seed`, so identical inputs reproduce bit-for-bit
regardless of platform, process, or thread scheduling. The constants
below are the reference ones from Vigna's public-domain splitmix64 and
are small enough to reimplement in any language.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 generator; state advances by the golden-gamma constant."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_below(self, n: int) -> int:
        """Uniform-ish integer in [0, n) via modulo reduction.

        The modulo bias for the n used here (dataset sizes) is far below
        anything observable; reduction is kept plain so other languages
        can match it exactly.
        """
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        return self.next_u64() % n

    def next_double(self) -> float:
        """Float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def derive_seed(master_seed: int, *parts: str | int) -> int:
    """Derive a child 64-bit seed from a master seed and a part path.

    Each part is length-prefixed (u32 LE) and fed to SHA-256; the child
    seed is the first 8 digest bytes read little-endian. Strings are
    UTF-8 encoded, integers are 8-byte little-endian. Callers pass a
    domain tag as the first part (e.g. ``"class"``, ``"pair"``) so seeds
    for different purposes never collide.
    """
    chunks = [(master_seed & _MASK64).to_bytes(8, "little")]
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (str, int)):
            raise TypeError(f"seed parts must be str or int, got {type(part).__name__}")
        chunks.append(part.encode("utf-8") if isinstance(part, str) else (part & _MASK64).to_bytes(8, "little"))
    h = hashlib.sha256()
    for chunk in chunks:
        h.update(len(chunk).to_bytes(4, "little"))
        h.update(chunk)
    return int.from_bytes(h.digest()[:8], "little")
