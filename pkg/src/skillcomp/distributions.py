"""Skill-frequency distributions: uniform, Zipf, and binned (coarse) Zipf.

A distribution assigns a sampling probability to each of ``d`` skills. Rank
weights are always monotone non-increasing; the rank-to-skill ``ordering``
decides which concrete skill receives which rank (identity, reversed, or a
seeded shuffle), so frequency and skill identity can be decoupled.

Skill indices are 0-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SkillDistribution",
    "zipf_weights",
    "uniform_weights",
    "binned_zipf_weights",
    "bin_sizes",
    "identity_ordering",
    "reversed_ordering",
    "random_ordering",
    "apply_ordering",
    "dist_from_spec",
]

_NORMALIZATION_ATOL = 1e-12


def zipf_weights(d: int, alpha: float) -> np.ndarray:
    """Rank weights p_j = j^(-alpha) / H with H = sum_{t<=d} t^(-alpha).

    The normalizer is accumulated from the smallest terms (j = d down to 1)
    to keep floating-point error low; there is no closed form.
    """
    if d < 1:
        raise ValueError(f"need at least one skill, got d={d}")
    if alpha <= 0:
        raise ValueError(f"zipf exponent must be positive, got alpha={alpha}")
    ranks = np.arange(1, d + 1, dtype=np.float64)
    raw = ranks ** (-float(alpha))
    norm = raw[::-1].sum()
    return raw / norm


def uniform_weights(d: int) -> np.ndarray:
    """Rank weights 1/d for every rank."""
    if d < 1:
        raise ValueError(f"need at least one skill, got d={d}")
    return np.full(d, 1.0 / d)


def bin_sizes(d: int, m: int) -> np.ndarray:
    """Contiguous bin sizes: the first d mod m bins take the extra skill."""
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    base, extra = divmod(d, m)
    return np.array([base + 1] * extra + [base] * (m - extra), dtype=np.int64)


def binned_zipf_weights(d: int, m: int, alpha: float) -> np.ndarray:
    """Coarse power law: bin i (of m) gets total mass prop. to i^(-alpha),
    split uniformly inside the bin. m = d reduces exactly to zipf_weights."""
    if alpha <= 0:
        raise ValueError(f"zipf exponent must be positive, got alpha={alpha}")
    sizes = bin_sizes(d, m)
    totals = zipf_weights(m, alpha)
    return np.repeat(totals / sizes, sizes)


def identity_ordering(d: int) -> np.ndarray:
    return np.arange(d, dtype=np.int64)


def reversed_ordering(d: int) -> np.ndarray:
    return np.arange(d - 1, -1, -1, dtype=np.int64)


def random_ordering(d: int, seed: int) -> np.ndarray:
    """Seeded shuffle; the same seed always yields the same rank map."""
    return np.random.default_rng(seed).permutation(d).astype(np.int64)


def _check_ordering(ordering: np.ndarray, d: int) -> np.ndarray:
    ordering = np.asarray(ordering, dtype=np.int64)
    if ordering.shape != (d,) or not np.array_equal(np.sort(ordering), np.arange(d)):
        raise ValueError("ordering must be a permutation of range(d)")
    return ordering


@dataclass(frozen=True)
class SkillDistribution:
    """Immutable skill-sampling distribution.

    ``weights[i]`` is the probability of skill ``i`` after the ordering has
    been applied; ``ordering[j]`` is the skill holding rank ``j`` (rank 0 is
    the most frequent). Safe to share across concurrent trials.
    """

    kind: str
    d: int
    weights: np.ndarray
    ordering: np.ndarray
    alpha: float | None = None
    num_bins: int | None = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.shape != (self.d,):
            raise ValueError(f"weights must have length d={self.d}")
        if np.any(weights <= 0):
            raise ValueError("every skill weight must be strictly positive")
        if abs(weights.sum() - 1.0) > _NORMALIZATION_ATOL:
            raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")
        ordering = _check_ordering(self.ordering, self.d)
        weights.flags.writeable = False
        ordering.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "ordering", ordering)
        cum = np.cumsum(weights)
        cum.flags.writeable = False
        object.__setattr__(self, "_cum", cum)

    @property
    def rank_weights(self) -> np.ndarray:
        """Weights listed by rank (monotone non-increasing for Zipf kinds)."""
        return self.weights[self.ordering]

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | int:
        """Draw skill indices by inverse CDF over the cumulative table."""
        u = rng.random(size)
        idx = np.searchsorted(self._cum, u, side="right")
        return np.minimum(idx, self.d - 1)


def apply_ordering(
    rank_weights: np.ndarray,
    ordering: np.ndarray,
    kind: str = "custom",
    alpha: float | None = None,
    num_bins: int | None = None,
) -> SkillDistribution:
    """Assign the rank-j weight to skill ordering[j]."""
    rank_weights = np.asarray(rank_weights, dtype=np.float64)
    d = rank_weights.shape[0]
    ordering = _check_ordering(ordering, d)
    weights = np.empty(d)
    weights[ordering] = rank_weights
    return SkillDistribution(
        kind=kind, d=d, weights=weights, ordering=ordering, alpha=alpha, num_bins=num_bins
    )


def _resolve_ordering(d: int, spec) -> np.ndarray:
    if spec is None or spec == "identity":
        return identity_ordering(d)
    if spec == "reversed":
        return reversed_ordering(d)
    if isinstance(spec, dict) and set(spec) == {"random"}:
        return random_ordering(d, int(spec["random"]))
    if isinstance(spec, (list, tuple, np.ndarray)):
        return _check_ordering(np.asarray(spec), d)
    raise ValueError(f"unknown ordering spec: {spec!r}")


def dist_from_spec(spec: dict) -> SkillDistribution:
    """Build a distribution from a config mapping.

    Shape: {kind, d, alpha?, m?, ordering: "identity" | "reversed" | {"random": seed}}
    """
    known = {"kind", "d", "alpha", "m", "ordering"}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"unknown distribution keys: {sorted(unknown)}")
    kind = spec.get("kind")
    d = spec.get("d")
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    ordering = _resolve_ordering(d, spec.get("ordering"))
    if kind == "uniform":
        return apply_ordering(uniform_weights(d), ordering, kind="uniform")
    if kind in ("zipf", "binned_zipf") and "alpha" not in spec:
        raise ValueError(f'kind "{kind}" requires "alpha"')
    if kind == "zipf":
        alpha = float(spec["alpha"])
        return apply_ordering(zipf_weights(d, alpha), ordering, kind="zipf", alpha=alpha)
    if kind == "binned_zipf":
        if "m" not in spec:
            raise ValueError('kind "binned_zipf" requires "m"')
        alpha = float(spec["alpha"])
        m = int(spec["m"])
        return apply_ordering(
            binned_zipf_weights(d, m, alpha), ordering,
            kind="binned_zipf", alpha=alpha, num_bins=m,
        )
    raise ValueError(f"unknown distribution kind: {kind!r}")
