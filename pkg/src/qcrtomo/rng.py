"""Counter-based random substreams.

Every draw is a pure function of ``(key, index)``, where ``key`` is derived
from a master seed and a trial index. The same mixing function is used by the
scalar path (:class:`Substream`), the numpy batch path and the numba kernel,
so a trial produces the same uniforms no matter which path evaluates it or how
trials are split across workers.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
UNIT = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit unsigned integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def seed_key(master_seed: int) -> int:
    """Scramble a user seed into the key space shared by all trials."""
    if master_seed < 0:
        raise ValueError(f"seed must be non-negative, got {master_seed}")
    return mix64(master_seed & MASK64)


def trial_key(master_seed: int, trial: int) -> int:
    return mix64(seed_key(master_seed) + (trial + 1) * GAMMA)


def derive_seed(master_seed: int, tag: int) -> int:
    """Child seed for an independent run (e.g. the second rooted extraction)."""
    return mix64(seed_key(master_seed) ^ mix64(tag * GAMMA + 0x632BE59BD9B4E019))


def uniform(key: int, index: int) -> float:
    """The ``index``-th uniform in [0, 1) of the substream ``key``."""
    return (mix64(key + (index + 1) * GAMMA) >> 11) * UNIT


class Substream:
    """Sequential view of one trial's counter-based stream.

    Quacks like :class:`numpy.random.Generator` for the single method the
    channel code needs (``random()``), so either can be passed as ``rng``.
    """

    __slots__ = ("key", "position")

    def __init__(self, key: int, position: int = 0) -> None:
        self.key = key & MASK64
        self.position = position

    @classmethod
    def for_trial(cls, master_seed: int, trial: int) -> "Substream":
        return cls(trial_key(master_seed, trial))

    def random(self) -> float:
        u = uniform(self.key, self.position)
        self.position += 1
        return u
