"""SplitMix64 pseudo-random stream.

A tiny fixed generator is used instead of numpy's so that simulated
hypnograms and every seeded model reproduce bit-exactly from the integer
seed alone, independent of library versions.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for task `index` (recording, fold, tree) of a master seed."""
    return _mix64((seed ^ (((index + 1) * GOLDEN_GAMMA) & MASK64)) & MASK64)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    ``next_u64`` advances the state by the golden gamma and returns the
    mixed state; ``random`` takes the top 53 bits as a double in [0, 1).
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = MASK64 + 1 - ((MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, n: int, k: int) -> list[int]:
        """`k` distinct indices from range(n), partial Fisher-Yates order."""
        pool = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
