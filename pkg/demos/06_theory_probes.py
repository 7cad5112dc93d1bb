"""Executable spot checks of the theory: stationary points, initialization
scales, the PL inequality along a run, and the hypercube packing that makes
uniform correlational queries uninformative.
"""

import numpy as np

from skillcomp.distributions import uniform_weights, zipf_weights
from skillcomp.learner import default_step_size, random_sign_vector
from skillcomp.population import population_gd_trajectory
from skillcomp.probes import (
    PackingConfig,
    check_init_concentration,
    check_pl_inequality,
    check_stationary_points,
    hoeffding_overlap_bound,
    hypercube_packing,
)
from skillcomp.rng import make_rng

d, k = 20, 4
p = zipf_weights(d, 1.5)
wstar = random_sign_vector(d, make_rng(1, "wstar"))

rep = check_stationary_points(wstar, p, k, 1000, make_rng(1, "probes"))
print("stationary points: gradient norms", {n: f"{v:.1e}" for n, v in rep.stationary_norms.items()})
print(f"  smallest gradient norm over 1000 random probes: {rep.min_probe_norm:.2e} (> 0)")

w0 = 0.1 * make_rng(1, "init").standard_normal(d)
log = population_gd_trajectory(w0, wstar, p, k, default_step_size(k, p), 50_000)
pl = check_pl_inequality(log, p, k)
print(f"PL inequality: min ratio {pl.min_ratio:.4f} over {pl.num_checked} steps, "
      f"{pl.num_skipped} at-minimum steps skipped -> passed={pl.passed}")

print()
big_d, r = 10_000, 0.1
for name, weights in (("zipf(1.5)", zipf_weights(big_d, 1.5)), ("uniform", uniform_weights(big_d))):
    conc = check_init_concentration(big_d, r, weights, 2000, make_rng(1, "conc" + name))
    print(f"init scale under {name:9s}: median |A(0)| = {conc.median_abs_overlap:.5f} "
          f"(r*||p|| = {r * conc.p_norm:.5f})")

print()
cfg = PackingConfig(d=400, epsilon=0.31, num_vectors=100, k=4, seed=0)
pack = hypercube_packing(cfg)
print(f"hypercube packing d=400, q=100: max overlap {pack.max_overlap:.3f} "
      f"(Hoeffding bound {hoeffding_overlap_bound(400, 100):.3f})")
print(f"  correlation after {cfg.k} hops: {pack.max_correlation:.2e} "
      "- the signal a correlational learner has to work with")
