"""State tracking on the permutation group of five elements.

Each of the 120 permutations is a skill; a sample is a sequence of k
permutations and the target is their composition, emitted as raw tokens
over the vocabulary {1..5} (five tokens per permutation, no intermediate
steps). Composition reads left to right: (g o h)(x) = h(g(x)), i.e. the
first permutation in the sequence is applied first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "PermutationS5",
    "S5_SIZE",
    "s5_identity",
    "s5_compose",
    "s5_inverse",
    "all_permutations",
    "perm_rank",
    "gen_state_tracking",
]

S5_SIZE = 120
_DEGREE = 5


@dataclass(frozen=True)
class PermutationS5:
    """Permutation as the image tuple (g(1), ..., g(5)), 1-based."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, _DEGREE + 1)):
            raise ValueError(f"not a permutation of 1..5: {self.mapping}")

    def __call__(self, x: int) -> int:
        return self.mapping[x - 1]


def s5_identity() -> PermutationS5:
    return PermutationS5(tuple(range(1, _DEGREE + 1)))


def s5_compose(g: PermutationS5, h: PermutationS5) -> PermutationS5:
    """Apply g first, then h: (g o h)(x) = h(g(x))."""
    return PermutationS5(tuple(h.mapping[g.mapping[i] - 1] for i in range(_DEGREE)))


def s5_inverse(g: PermutationS5) -> PermutationS5:
    inv = [0] * _DEGREE
    for i, img in enumerate(g.mapping):
        inv[img - 1] = i + 1
    return PermutationS5(tuple(inv))


def all_permutations() -> list[PermutationS5]:
    """All 120 elements in lexicographic order of their image tuples."""
    return [PermutationS5(m) for m in itertools.permutations(range(1, _DEGREE + 1))]


def perm_rank(g: PermutationS5) -> int:
    """Lexicographic index of a permutation among the 120."""
    return _PERM_INDEX[g.mapping]


_ALL = all_permutations()
_PERM_INDEX = {g.mapping: i for i, g in enumerate(_ALL)}


def gen_state_tracking(
    k: int,
    dist,
    n: int,
    rng: np.random.Generator,
    hop_mixture: dict[int, float] | None = None,
) -> list[dict]:
    """Generate n composition records over the 120 permutation skills.

    ``dist`` must cover exactly the 120 group elements; its ordering decides
    which permutation gets which frequency rank. With ``hop_mixture`` the
    hop count of each record is drawn from the given {hops: prob} map
    (an explicit easy-to-hard curriculum when mixed over small hop counts).
    """
    if dist.d != S5_SIZE:
        raise ValueError(f"distribution must cover all {S5_SIZE} permutations, got d={dist.d}")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    hops_choices = None
    if hop_mixture:
        hops_choices = sorted(hop_mixture)
        hop_probs = np.array([hop_mixture[h] for h in hops_choices], dtype=np.float64)
        if np.any(hop_probs < 0) or abs(hop_probs.sum() - 1.0) > 1e-9:
            raise ValueError("hop mixture probabilities must be nonnegative and sum to 1")
    records = []
    for _ in range(n):
        hops = k if hops_choices is None else int(rng.choice(hops_choices, p=hop_probs))
        idx = np.atleast_1d(dist.sample(rng, size=hops))
        perms = [_ALL[i] for i in idx]
        target = reduce(s5_compose, perms)
        input_tokens = [tok for g in perms for tok in g.mapping]
        records.append(
            {
                "task": "state_tracking",
                "prompt": "(" + " ".join(map(str, input_tokens)) + ")",
                "answer": "(" + " ".join(map(str, target.mapping)) + ")",
                "skills": [int(i) for i in idx],
                "meta": {
                    "k": hops,
                    "input_tokens": input_tokens,
                    "target_tokens": list(target.mapping),
                },
            }
        )
    return records
