"""Seed derivation and reproducible random generators.

Every stochastic routine in this package takes an explicit
``numpy.random.Generator``. Child seeds are derived from a root seed by
hashing ``(root, role, index)``, so adding trials to a sweep never perturbs
the streams of existing trials.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "make_rng"]


def derive_seed(root_seed: int, role: str, index: int = 0) -> int:
    """Stable 64-bit child seed for (root seed, role string, trial index)."""
    payload = f"{root_seed}/{role}/{index}".encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(root_seed: int, role: str, index: int = 0) -> np.random.Generator:
    """Generator seeded from the derived child seed."""
    return np.random.default_rng(derive_seed(root_seed, role, index))
