"""Reproducible per-device random streams.

A stream is identified by (master_seed, device_index, label).  The three
inputs are folded into one 64-bit key with SplitMix64:

    key = mix(mix(mix(seed) ^ device_index) ^ crc32(label))
    mix(x): x += 0x9E3779B97F4A7C15
            x  = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
            x  = (x ^ (x >> 27)) * 0x94D049BB133111EB
            x  =  x ^ (x >> 31)                 (all mod 2^64)

and the key seeds numpy's PCG64 bit generator.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def stream_key(master_seed: int, device_index: int, label: str) -> int:
    k = splitmix64(master_seed & MASK64)
    k = splitmix64(k ^ (device_index & MASK64))
    return splitmix64(k ^ zlib.crc32(label.encode("utf-8")))


def rng_stream(master_seed: int, device_index: int, label: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stream_key(master_seed, device_index, label)))
