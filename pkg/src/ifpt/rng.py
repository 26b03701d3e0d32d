"""Deterministic, keyed random number streams.

Every draw consumed by the solver comes from a Philox counter-based
generator whose key is a hash of ``(seed, label, step, slot)``.  Blocks are
always generated at the full ensemble width and indexed by particle id, so
a particle's noise depends only on the seed, the step and its id -- never
on execution order, thread count, or which other particles are alive.
This is what makes common-random-number coupling across runs exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# fixed labels for the top-level stream families
INIT_LABEL = 0x11
STEP_LABEL = 0x22
SAMPLE_LABEL = 0x33


def _mix64(z: int) -> int:
    """splitmix64 finalizer; avalanches a 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, *path: int) -> np.ndarray:
    """Two-word Philox key derived from a seed and an integer path."""
    h = _mix64(seed & _MASK)
    for p in path:
        h = _mix64((h + _GOLDEN) ^ _mix64(int(p) & _MASK))
    return np.array([h, _mix64(h ^ _GOLDEN)], dtype=np.uint64)


def generator(seed: int, *path: int) -> np.random.Generator:
    """Independent generator keyed by (seed, path)."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *path)))


def derive_seed(seed: int, *path: int) -> int:
    """64-bit sub-seed, used to hand independent seeds to sub-runs."""
    return int(stream_key(seed, *path)[0])


@dataclass(frozen=True)
class StreamKeys:
    """Per-particle RNG keys for one calibration or verification step.

    ``ids`` selects the rows of the step's draw blocks that belong to the
    particles being advanced; ``n_total`` is the width at which blocks are
    generated (the full ensemble size).
    """

    seed: int
    step_index: int
    ids: np.ndarray
    n_total: int

    def _gen(self, slot: int) -> np.random.Generator:
        return generator(self.seed, STEP_LABEL, self.step_index, slot)

    def normals(self, slot: int = 0) -> np.ndarray:
        return self._gen(slot).standard_normal(self.n_total)[self.ids]

    def normal_block(self, rows: int, slot: int = 0) -> np.ndarray:
        """(rows, len(ids)) block of standard normals, row-major layout."""
        block = self._gen(slot).standard_normal((rows, self.n_total))
        return block[:, self.ids]

    def uniforms(self, slot: int = 0) -> np.ndarray:
        return self._gen(slot).random(self.n_total)[self.ids]

    def poisson_full(self, lam: float, slot: int = 0) -> np.ndarray:
        """Full-width Poisson block; the caller slices by id."""
        return self._gen(slot).poisson(lam, self.n_total)

    def uniform_rows(self, slot: int = 0):
        """Yields successive full-width uniform rows from one keyed stream.

        Row j is a contiguous counter block, so entry (j, id) never depends
        on how many rows other particles needed.
        """
        gen = self._gen(slot)
        while True:
            yield gen.random(self.n_total)
