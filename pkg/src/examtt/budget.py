"""Run budgets and seed derivation.

Two clocks are available. ``wall`` measures real elapsed time. ``work``
converts the kernels' operation counts into nominal seconds, so a run's
stopping point, and therefore its result, depends only on its seed and
config, not on machine load or concurrent jobs.
"""

from __future__ import annotations

import hashlib
import time

from . import kernels

# Operation counts per nominal second; roughly the compiled kernels' rate on
# one core, so nominal and real seconds are comparable for the default backend.
WORK_RATE = 60_000_000


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary printable parts (order-sensitive)."""
    key = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1


def make_rng(*parts):
    return kernels.Rng(derive_seed(*parts))


class Budget:
    """Soft time limit, checked by callers between coarse steps."""

    def __init__(self, limit: float, clock: str = "work", rate: float = WORK_RATE):
        if limit <= 0:
            raise ValueError("time limit must be positive")
        if clock not in ("work", "wall"):
            raise ValueError(f"unknown clock {clock!r}")
        self.limit = float(limit)
        self.clock = clock
        self.rate = float(rate)
        self.work = 0
        self._t0 = time.perf_counter()

    def charge(self, work: int) -> None:
        self.work += int(work)

    def elapsed(self) -> float:
        if self.clock == "wall":
            return time.perf_counter() - self._t0
        return self.work / self.rate

    def expired(self) -> bool:
        return self.elapsed() >= self.limit
