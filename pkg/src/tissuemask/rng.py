"""Portable deterministic random generator.

A 64-bit linear congruential generator with Knuth's MMIX constants:

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64

Draws take the top 31 bits (``state >> 33``).  The algorithm is spelled
out so fold assignments and augmentation draws reproduce bit-for-bit on
any platform or language, independent of library RNGs.
"""

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = (seed ^ 0x9E3779B97F4A7C15) & _MASK
        # burn one step so small seeds decorrelate
        self._step()

    def _step(self) -> int:
        self.state = (_MULT * self.state + _INC) & _MASK
        return self.state >> 33

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via modulo of a 31-bit draw."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self._step() % n

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform real in [lo, hi)."""
        return lo + (hi - lo) * (self._step() / float(1 << 31))

    def coin(self) -> bool:
        return self._step() & 1 == 1


def shuffled(seq, seed: int) -> list:
    """Fisher-Yates shuffle driven by Lcg64; pure, input untouched."""
    out = list(seq)
    rng = Lcg64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
