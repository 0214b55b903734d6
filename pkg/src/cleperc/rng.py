"""Deterministic seed derivation for replica streams.

A master 64-bit seed is expanded with numpy's SeedSequence; replica k uses
spawn key (k,), so streams are reproducible and collision-free regardless
of how work is sharded across processes.  The compiled kernels consume raw
xorshift128+ state words derived the same way.
"""
from __future__ import annotations

import numpy as np


def replica_seed_sequence(master_seed: int, replica: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(replica,))


def replica_generator(master_seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(replica_seed_sequence(master_seed, replica)))


def lane_states(master_seed: int, replica: int, n_lanes: int) -> np.ndarray:
    """(n_lanes, 2) uint64 xorshift128+ states; zero states are patched."""
    ss = replica_seed_sequence(master_seed, replica)
    st = ss.generate_state(2 * n_lanes, np.uint64).reshape(n_lanes, 2)
    bad = (st[:, 0] == 0) & (st[:, 1] == 0)
    st[bad, 0] = np.uint64(0x9E3779B97F4A7C15)
    return st
