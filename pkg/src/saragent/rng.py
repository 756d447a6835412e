"""Seeded RNG hub with named substreams.

Each consumer (detector, network, backend, ...) pulls its own substream so
adding a consumer never perturbs the draws seen by the others.
"""
from __future__ import annotations

import zlib

import numpy as np


class RngHub:
    def __init__(self, seed: int):
        self.seed = int(seed)

    def substream(self, name: str) -> np.random.Generator:
        key = zlib.crc32(name.encode("utf-8"))
        return np.random.default_rng(np.random.SeedSequence([self.seed, key]))
