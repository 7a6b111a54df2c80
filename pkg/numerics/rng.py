"""Seeded counter-based random number generator.

The generator is numpy's Philox-4x64-10 bit generator keyed by the run
seed: output block ``i`` is the Philox bijection of counter ``i`` under
key ``seed``, so a stream is fully described by ``(seed, counter)``.
Independent streams for a given seed come from ``derive(stream)``, which
advances the counter by ``stream * 2**128`` (``Philox.jumped``). Draws go
through ``numpy.random.Generator`` so the float and Gaussian conversions
are numpy's documented ones.
"""
from __future__ import annotations

from typing import Any, Dict

import numpy as np


class SeededRng:
    """Single-owner random stream; never share one instance between threads."""

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.stream = int(stream)
        bit_generator = np.random.Philox(key=self.seed)
        if self.stream:
            bit_generator = bit_generator.jumped(self.stream)
        self._generator = np.random.Generator(bit_generator)

    def derive(self, stream: int) -> "SeededRng":
        """Independent stream ``stream`` (>= 1) for the same seed."""
        if stream < 1:
            raise ValueError("derived streams start at 1")
        return SeededRng(self.seed, stream)

    # draws

    def uniform(self, low: float, high: float, size=None) -> np.ndarray:
        return self._generator.uniform(low, high, size=size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray:
        return self._generator.normal(loc, scale, size=size)

    def random(self, size=None) -> np.ndarray:
        return self._generator.random(size=size)

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self._generator.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self._generator.choice(n, size=size, replace=replace)

    # state

    def get_state(self) -> Dict[str, Any]:
        """JSON-safe snapshot of the stream position."""
        state = self._generator.bit_generator.state
        return {
            "seed": self.seed,
            "stream": self.stream,
            "bit_generator": state["bit_generator"],
            "counter": [int(v) for v in state["state"]["counter"]],
            "key": [int(v) for v in state["state"]["key"]],
            "buffer": [int(v) for v in state["buffer"]],
            "buffer_pos": int(state["buffer_pos"]),
            "has_uint32": int(state["has_uint32"]),
            "uinteger": int(state["uinteger"]),
        }

    def set_state(self, snapshot: Dict[str, Any]) -> None:
        self.seed = int(snapshot["seed"])
        self.stream = int(snapshot["stream"])
        self._generator.bit_generator.state = {
            "bit_generator": snapshot["bit_generator"],
            "state": {
                "counter": np.array(snapshot["counter"], dtype=np.uint64),
                "key": np.array(snapshot["key"], dtype=np.uint64),
            },
            "buffer": np.array(snapshot["buffer"], dtype=np.uint64),
            "buffer_pos": int(snapshot["buffer_pos"]),
            "has_uint32": int(snapshot["has_uint32"]),
            "uinteger": int(snapshot["uinteger"]),
        }

    @classmethod
    def from_state(cls, snapshot: Dict[str, Any]) -> "SeededRng":
        rng = cls(int(snapshot["seed"]), int(snapshot["stream"]))
        rng.set_state(snapshot)
        return rng
