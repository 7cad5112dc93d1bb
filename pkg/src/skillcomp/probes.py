"""Executable checks of the theory: PL inequality, stationary points,
initialization concentration, gradient-noise concentration, hypercube
packing, and the uniform-vs-power-law sample-budget separation.

Each probe is deterministic given its seeds and returns a small report
object; nothing here mutates model state owned by another run.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import SkillDistribution, identity_ordering, uniform_weights, zipf_weights
from .learner import (
    DivergenceError,
    batch_gradient,
    default_step_size,
    generate_batch,
    random_sign_vector,
    recovery_error,
)
from .population import (
    _ipow,
    pl_ratios,
    population_gradient,
    population_loss,
    weighted_norm_sq,
    weighted_overlap,
)
from .rng import derive_seed, make_rng

__all__ = [
    "PLReport",
    "check_pl_inequality",
    "StationaryReport",
    "check_stationary_points",
    "InitConcentration",
    "check_init_concentration",
    "GradientNoiseStats",
    "estimate_gradient_noise",
    "PackingConfig",
    "PackingReport",
    "hoeffding_overlap_bound",
    "hypercube_packing",
    "SeparationReport",
    "separation_experiment",
]

PL_SLACK = 1e-9


@dataclass(frozen=True)
class PLReport:
    """Per-step PL ratios along a trajectory; pass iff all >= 1 - slack."""

    steps: np.ndarray
    ratios: np.ndarray
    num_checked: int
    num_skipped: int
    min_ratio: float
    passed: bool


def check_pl_inequality(trajectory, p, k: int) -> PLReport:
    """Verify ||grad||^2 >= 2 k p_min A^(2k-2) L at every logged step.

    Steps whose loss sits at the floor are skipped (the ratio is undefined
    at the minimum).
    """
    p_min = float(np.asarray(p).min())
    ratios = pl_ratios(trajectory.loss, trajectory.grad_norm, trajectory.overlap, p_min, k)
    valid = ~np.isnan(ratios)
    checked = ratios[valid]
    min_ratio = float(checked.min()) if checked.size else math.inf
    return PLReport(
        steps=trajectory.step[valid],
        ratios=checked,
        num_checked=int(valid.sum()),
        num_skipped=int((~valid).sum()),
        min_ratio=min_ratio,
        passed=bool(checked.size == 0 or min_ratio >= 1.0 - PL_SLACK),
    )


@dataclass(frozen=True)
class StationaryReport:
    """Gradient norms at the three candidate stationary points vs random probes."""

    stationary_norms: dict
    max_stationary_norm: float
    min_probe_norm: float
    num_probes: int
    passed: bool


def check_stationary_points(
    wstar: np.ndarray,
    p: np.ndarray,
    k: int,
    num_probes: int,
    rng: np.random.Generator,
    *,
    probe_scale: float = 1.0,
    min_distance: float = 1e-3,
    stationary_tol: float = 1e-12,
) -> StationaryReport:
    """Gradient vanishes only at 0 and +/- the hidden vector.

    For odd k the negated hidden vector is not stationary (the fixed-point
    equation lambda^k = 1 has no real root at -1), so it is probed as an
    ordinary point instead of a candidate.

    Probes are Gaussian points re-drawn until they sit at least
    ``min_distance`` away (inf-norm, both signs) from all candidates.
    """
    wstar = np.asarray(wstar, dtype=np.float64)
    d = wstar.shape[0]
    norms = {
        "zero": float(np.linalg.norm(population_gradient(np.zeros(d), wstar, p, k))),
        "plus": float(np.linalg.norm(population_gradient(wstar, wstar, p, k))),
    }
    if k % 2 == 0:
        norms["minus"] = float(np.linalg.norm(population_gradient(-wstar, wstar, p, k)))
    probe_norms = np.empty(num_probes)
    for i in range(num_probes):
        while True:
            w = probe_scale * rng.standard_normal(d)
            far_from_zero = np.abs(w).max() >= min_distance
            far_from_star = min(np.abs(w - wstar).max(), np.abs(w + wstar).max()) >= min_distance
            if far_from_zero and far_from_star:
                break
        probe_norms[i] = np.linalg.norm(population_gradient(w, wstar, p, k))
    max_static = max(norms.values())
    min_probe = float(probe_norms.min())
    return StationaryReport(
        stationary_norms=norms,
        max_stationary_norm=max_static,
        min_probe_norm=min_probe,
        num_probes=num_probes,
        passed=bool(max_static <= stationary_tol and min_probe > 0.0),
    )


@dataclass(frozen=True)
class InitConcentration:
    """Scale statistics of the initial overlap and weighted norm."""

    d: int
    r: float
    p_norm: float
    num_trials: int
    median_abs_overlap: float
    overlap_scale_quantiles: dict      # of |A(0)| / (r ||p||_2)
    norm_dev_quantiles: dict           # of |B(0) - r^2| / (r^2 ||p||_2)
    frac_overlap_in_bracket: float
    frac_norm_dev_ok: float
    passed: bool


def check_init_concentration(
    d: int,
    r: float,
    p: np.ndarray,
    num_trials: int,
    rng: np.random.Generator,
    *,
    overlap_bracket: tuple[float, float] = (1e-3, 5.0),
    norm_dev_cap: float = 10.0,
    chunk: int = 1024,
) -> InitConcentration:
    """Empirical check that |A(0)| concentrates at scale r ||p||_2 and
    B(0) at r^2. The brackets stand in for unspecified absolute constants."""
    if num_trials < 1000:
        raise ValueError(f"need num_trials >= 1000, got {num_trials}")
    p = np.asarray(p, dtype=np.float64)
    p_norm = float(np.linalg.norm(p))
    abs_a = np.empty(num_trials)
    b_dev = np.empty(num_trials)
    done = 0
    while done < num_trials:
        n = min(chunk, num_trials - done)
        g = rng.standard_normal((n, d))
        w = r * g
        abs_a[done : done + n] = np.abs(w @ p)  # hidden vector of all ones wlog
        b_dev[done : done + n] = np.abs((w * w) @ p - r * r)
        done += n
    a_scale = abs_a / (r * p_norm)
    b_scale = b_dev / (r * r * p_norm)
    qs = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]
    frac_a = float(np.mean((a_scale >= overlap_bracket[0]) & (a_scale <= overlap_bracket[1])))
    frac_b = float(np.mean(b_scale <= norm_dev_cap))
    return InitConcentration(
        d=d,
        r=r,
        p_norm=p_norm,
        num_trials=num_trials,
        median_abs_overlap=float(np.median(abs_a)),
        overlap_scale_quantiles={q: float(np.quantile(a_scale, q)) for q in qs},
        norm_dev_quantiles={q: float(np.quantile(b_scale, q)) for q in qs},
        frac_overlap_in_bracket=frac_a,
        frac_norm_dev_ok=frac_b,
        passed=bool(frac_a >= 0.99 and frac_b >= 0.99),
    )


@dataclass(frozen=True)
class GradientNoiseStats:
    """Monte-Carlo batch-noise magnitudes against the population gradient."""

    batch_size: int
    num_batches: int
    mean_noise_norm: float
    population_grad_norm: float
    ratio: float
    violation_fraction: float  # fraction of batches with ||noise|| > ||grad|| / 8


def estimate_gradient_noise(
    w: np.ndarray,
    wstar: np.ndarray,
    dist,
    k: int,
    batch_size: int,
    num_batches: int,
    rng: np.random.Generator,
) -> GradientNoiseStats:
    """Estimate E||batch grad - population grad|| at a fixed parameter point."""
    if num_batches < 100:
        raise ValueError(f"need num_batches >= 100, got {num_batches}")
    w = np.asarray(w, dtype=np.float64)
    pop = population_gradient(w, wstar, dist.weights, k)
    pop_norm = float(np.linalg.norm(pop))
    noise_norms = np.empty(num_batches)
    for i in range(num_batches):
        idx, labels = generate_batch(wstar, dist, k, batch_size, rng)
        g, _ = batch_gradient(w, idx, labels)
        noise_norms[i] = np.linalg.norm(g - pop)
    mean_noise = float(noise_norms.mean())
    return GradientNoiseStats(
        batch_size=batch_size,
        num_batches=num_batches,
        mean_noise_norm=mean_noise,
        population_grad_norm=pop_norm,
        ratio=mean_noise / pop_norm if pop_norm > 0 else math.inf,
        violation_fraction=float(np.mean(noise_norms > pop_norm / 8.0)),
    )


@dataclass(frozen=True)
class PackingConfig:
    """Random hypercube packing: q sign vectors in d dimensions."""

    d: int
    epsilon: float
    num_vectors: int
    k: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.num_vectors < 2:
            raise ValueError("need at least two vectors to measure overlaps")

    @property
    def packing_budget(self) -> float:
        """Size guaranteed to exist with pairwise overlap <= epsilon."""
        return math.exp(0.25 * self.epsilon**2 * self.d)


def hoeffding_overlap_bound(d: int, q: int, fail_prob: float = 0.001) -> float:
    """Overlap epsilon with 2 q^2 exp(-d eps^2 / 2) <= fail_prob (union bound)."""
    return math.sqrt(2.0 * math.log(2.0 * q * q / fail_prob) / d)


@dataclass(frozen=True)
class PackingReport:
    config: PackingConfig
    max_overlap: float           # max_{i != j} |w_i . w_j| / d
    max_correlation: float       # max_overlap ** k
    passed: bool


def hypercube_packing(config: PackingConfig) -> PackingReport:
    """Draw q i.i.d. sign vectors and report the worst normalized overlap.

    The k-th power of the overlap is the model-correlation decay that makes
    correlational queries uninformative under the uniform distribution.
    """
    if config.num_vectors > config.packing_budget:
        warnings.warn(
            f"q={config.num_vectors} exceeds the packing budget "
            f"{config.packing_budget:.3g} for (d={config.d}, eps={config.epsilon})",
            stacklevel=2,
        )
    rng = make_rng(config.seed, "packing")
    signs = rng.integers(0, 2, size=(config.num_vectors, config.d)).astype(np.float64) * 2 - 1
    gram = (signs @ signs.T) / config.d
    np.fill_diagonal(gram, 0.0)
    max_overlap = float(np.abs(gram).max())
    return PackingReport(
        config=config,
        max_overlap=max_overlap,
        max_correlation=_ipow(max_overlap, config.k),
        passed=max_overlap <= config.epsilon,
    )


@dataclass
class ArmTrace:
    """One SGD arm of the separation experiment."""

    kind: str
    eta: float
    data_seed: int
    samples: np.ndarray          # cumulative sample counts at each step
    pop_loss: np.ndarray
    recovery: np.ndarray
    samples_to_success: int | None


@dataclass
class SeparationReport:
    """Paired uniform-vs-power-law SGD runs under matched budgets."""

    d: int
    k: int
    alpha: float
    batch_size: int
    success_recovery: float
    budgets: list[int]
    zipf_arms: list[ArmTrace]
    uniform_arms: list[ArmTrace]
    n_star: int | None                      # median zipf samples-to-success
    uniform_loss_at_n_star: list[float]
    median_uniform_loss_at_n_star: float | None

    def curve(self, kind: str, quantity: str) -> np.ndarray:
        """Median per-budget curve across seeds for one arm."""
        arms = self.zipf_arms if kind == "zipf" else self.uniform_arms
        out = np.empty((len(arms), len(self.budgets)))
        for i, arm in enumerate(arms):
            vals = getattr(arm, quantity)
            pos = np.searchsorted(arm.samples, self.budgets, side="left")
            pos = np.minimum(pos, len(vals) - 1)
            out[i] = vals[pos]
        return np.median(out, axis=0)


def _sgd_arm(
    kind: str,
    dist,
    wstar: np.ndarray,
    w0: np.ndarray,
    k: int,
    eta: float,
    batch_size: int,
    max_steps: int,
    data_seed: int,
    success_recovery: float,
) -> ArmTrace:
    rng = np.random.default_rng(data_seed)
    w = np.array(w0, dtype=np.float64)
    p = dist.weights
    pop_loss = np.empty(max_steps + 1)
    rec = np.empty(max_steps + 1)
    samples = np.arange(max_steps + 1, dtype=np.int64) * batch_size
    success = None
    steps_run = max_steps
    for t in range(max_steps + 1):
        pop_loss[t] = population_loss(w, wstar, p, k)
        rec[t] = recovery_error(w, wstar)
        if success is None and rec[t] <= success_recovery:
            success = int(samples[t])
            steps_run = t
            break
        if t == max_steps:
            break
        idx, labels = generate_batch(wstar, dist, k, batch_size, rng)
        g, _ = batch_gradient(w, idx, labels)
        w -= eta * g
        if not np.all(np.isfinite(w)):
            raise DivergenceError(t + 1)
    n = steps_run + 1
    return ArmTrace(
        kind=kind,
        eta=eta,
        data_seed=data_seed,
        samples=samples[:n],
        pop_loss=pop_loss[:n],
        recovery=rec[:n],
        samples_to_success=success,
    )


def separation_experiment(
    d: int,
    k: int,
    alpha: float,
    sample_budgets: list[int],
    num_seeds: int,
    *,
    batch_size: int = 512,
    r: float = 0.1,
    root_seed: int = 0,
    success_recovery: float = 0.1,
) -> SeparationReport:
    """Run matched SGD arms (identical hidden vector, init, and step-size
    policy; only the index distribution differs) and record each arm's
    progress per sample budget.

    The power-law arm's budget-to-success (recovery error <= 0.1 by default)
    defines N*; the uniform arm is then read out at the same budget.
    """
    ident = identity_ordering(d)
    zipf = SkillDistribution("zipf", d, zipf_weights(d, alpha), ident, alpha=alpha)
    unif = SkillDistribution("uniform", d, uniform_weights(d), ident)
    max_budget = max(sample_budgets)
    max_steps = math.ceil(max_budget / batch_size)

    seeds = [
        (
            random_sign_vector(d, make_rng(root_seed, "wstar", s)),
            r * make_rng(root_seed, "init", s).standard_normal(d),
            derive_seed(root_seed, "data", s),
        )
        for s in range(num_seeds)
    ]
    zipf_arms = [
        _sgd_arm("zipf", zipf, wstar, w0, k, default_step_size(k, zipf.weights),
                 batch_size, max_steps, data_seed, success_recovery)
        for wstar, w0, data_seed in seeds
    ]
    successes = [a.samples_to_success for a in zipf_arms if a.samples_to_success is not None]
    n_star = int(np.median(successes)) if len(successes) == len(zipf_arms) else None

    # the uniform arm is read out at the power-law arm's success budget,
    # so it only needs to run that far; the same data seed drives both
    # arms' index samplers through their own inverse CDFs
    uniform_steps = max_steps if n_star is None else min(max_steps, math.ceil(n_star / batch_size))
    uniform_arms = [
        _sgd_arm("uniform", unif, wstar, w0, k, default_step_size(k, unif.weights),
                 batch_size, uniform_steps, data_seed, success_recovery)
        for wstar, w0, data_seed in seeds
    ]
    losses_at_nstar: list[float] = []
    if n_star is not None:
        for arm in uniform_arms:
            pos = min(np.searchsorted(arm.samples, n_star, side="left"), len(arm.pop_loss) - 1)
            losses_at_nstar.append(float(arm.pop_loss[pos]))
    return SeparationReport(
        d=d,
        k=k,
        alpha=alpha,
        batch_size=batch_size,
        success_recovery=success_recovery,
        budgets=list(sample_budgets),
        zipf_arms=zipf_arms,
        uniform_arms=uniform_arms,
        n_star=n_star,
        uniform_loss_at_n_star=losses_at_nstar,
        median_uniform_loss_at_n_star=float(np.median(losses_at_nstar)) if losses_at_nstar else None,
    )
