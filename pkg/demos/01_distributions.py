"""Skill-frequency distributions: uniform, Zipf, binned Zipf, and orderings.

The rank weights decide how often each frequency rank is sampled; the
ordering decides which concrete skill holds which rank. Shuffling the
ordering keeps the frequency profile but detaches it from skill identity.
"""

import numpy as np

from skillcomp.distributions import (
    apply_ordering,
    binned_zipf_weights,
    dist_from_spec,
    random_ordering,
    uniform_weights,
    zipf_weights,
)
from skillcomp.rng import make_rng

d = 10
print("uniform weights:", np.round(uniform_weights(d), 4))
print("zipf(1.0)      :", np.round(zipf_weights(d, 1.0), 4))
print("zipf(2.0)      :", np.round(zipf_weights(d, 2.0), 4))
print("binned m=2     :", np.round(binned_zipf_weights(d, 2, 1.0), 4))
print()

dist = apply_ordering(zipf_weights(d, 1.5), random_ordering(d, seed=7), kind="zipf", alpha=1.5)
print("shuffled zipf(1.5): skill -> weight")
for skill, w in enumerate(dist.weights):
    bar = "#" * int(120 * w)
    print(f"  skill {skill}: {w:.4f} {bar}")
print()

rng = make_rng(0, "demo-draws")
draws = dist.sample(rng, size=200_000)
freq = np.bincount(draws, minlength=d) / len(draws)
print("empirical frequency vs weight (200k draws):")
print("  max abs deviation:", float(np.abs(freq - dist.weights).max()))

spec = {"kind": "binned_zipf", "d": 120, "m": 5, "alpha": 1.5, "ordering": {"random": 3}}
coarse = dist_from_spec(spec)
print()
print(f"config spec {spec}")
print("  first bin (24 skills) holds", round(float(np.sort(coarse.weights)[-24:].sum()), 4), "of the mass")
