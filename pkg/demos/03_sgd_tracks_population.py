"""Minibatch SGD follows the population trajectory.

With a moderate batch the stochastic run shadows the deterministic one:
batch gradients are unbiased, and once the run escapes the flat region the
batch noise is a small fraction of the population gradient. The learner
here sees only samples.
"""

import numpy as np

from skillcomp.distributions import dist_from_spec
from skillcomp.experiments.runner import sgd_trajectory
from skillcomp.learner import default_step_size, random_sign_vector
from skillcomp.population import population_gd_state, population_gd_trajectory
from skillcomp.probes import estimate_gradient_noise
from skillcomp.rng import make_rng

d, k, r, batch, steps = 30, 4, 0.1, 1024, 60_000
dist = dist_from_spec({"kind": "zipf", "d": d, "alpha": 1.5})
wstar = random_sign_vector(d, make_rng(4, "wstar"))
w0 = r * make_rng(4, "init").standard_normal(d)
eta = default_step_size(k, dist.weights)

pop = population_gd_trajectory(w0, wstar, dist.weights, k, eta, steps, log_every=100)
sgd = sgd_trajectory(dist, wstar, w0, k, eta, batch, steps, make_rng(4, "data"), log_every=100)

print(f"d={d} k={k} batch={batch}")
print("      step   population loss   SGD population loss")
for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
    i = min(int(frac * (len(sgd.step) - 1)), len(sgd.step) - 1)
    j = min(int(np.searchsorted(pop.step, sgd.step[i])), len(pop.step) - 1)
    print(f"  {sgd.step[i]:>8d}   {pop.loss[j]:15.3e}   {sgd.loss[i]:19.3e}")
print(f"\nfinal recovery error: population {pop.recovery[-1]:.2e}, SGD {sgd.recovery[-1]:.2e}")

w_mid = population_gd_state(w0, wstar, dist.weights, k, eta, steps // 2)
noise = estimate_gradient_noise(w_mid, wstar, dist, k, batch, 200, make_rng(4, "noise"))
print(
    f"\nbatch-noise at the mid-run point: E||noise|| = {noise.mean_noise_norm:.2e}, "
    f"||population grad|| = {noise.population_grad_norm:.2e}, "
    f"fraction of batches above 1/8 of the gradient: {noise.violation_fraction:.1%}"
)
