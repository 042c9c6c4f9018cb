"""Reproducible, splittable random streams.

Every stochastic routine in the package takes a StreamKey rather than a
shared generator.  A key is a root seed plus a path of child indices; the
same key yields the same stream on every platform, and distinct paths give
statistically independent streams.  Derivation is counter-based (numpy's
SeedSequence spawn keys feeding a Philox counter generator), so replicates
may run in any order or in parallel without changing their draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class StreamKey:
    """Value-like handle for a deterministic random stream."""

    root: int
    path: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= self.root < 2**64:
            raise ValueError("root seed must fit in 64 bits")
        if any(i < 0 for i in self.path):
            raise ValueError("child indices must be nonnegative")

    def child(self, index: int) -> "StreamKey":
        """Derive the index-th child key. Same (key, index) -> same stream."""
        if index < 0:
            raise ValueError("child index must be nonnegative")
        return StreamKey(self.root, self.path + (index,))

    def generator(self) -> np.random.Generator:
        """Fresh Generator for this key; repeated calls restart the stream."""
        ss = np.random.SeedSequence(self.root, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def derive_stream(key: StreamKey, child: int) -> StreamKey:
    return key.child(child)
