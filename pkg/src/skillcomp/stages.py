"""Stage-wise instrumentation: rank bins, bin-restricted metrics,
head-helps-tail gradient norms, stage boundaries, and 2D loss-landscape
slices spanned by the top principal components of checkpoint differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .learner import _leave_one_out
from .population import _ipow, _loss_from_stats, population_loss

__all__ = [
    "RankBins",
    "assign_bins",
    "binwise_population_loss",
    "tail_gradient_norm",
    "StageThresholds",
    "StageReport",
    "detect_stages",
    "first_step_below",
    "PCAResult",
    "pca_top2",
    "LandscapeSlice",
    "landscape_slice",
    "project_onto_slice",
    "max_directional_slope",
]


@dataclass(frozen=True)
class RankBins:
    """Partition of ranks 0..d-1 into contiguous percentile bins.

    When d is not divisible, earlier bins take the extra rank. ``skills[b]``
    lists the skill indices in bin b (rank order mapped through the
    distribution's ordering); ``bin_of_skill[i]`` is the inverse lookup.
    """

    d: int
    num_bins: int
    sizes: np.ndarray
    skills: list[np.ndarray]
    bin_of_skill: np.ndarray


def assign_bins(dist, num_bins: int = 5) -> RankBins:
    """Split the distribution's ranks into contiguous bins of skills."""
    from .distributions import bin_sizes

    sizes = bin_sizes(dist.d, num_bins)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    skills = [dist.ordering[bounds[b] : bounds[b + 1]].copy() for b in range(num_bins)]
    bin_of_skill = np.empty(dist.d, dtype=np.int64)
    for b, idx in enumerate(skills):
        bin_of_skill[idx] = b
    return RankBins(d=dist.d, num_bins=num_bins, sizes=sizes, skills=skills, bin_of_skill=bin_of_skill)


def binwise_population_loss(w, wstar, p, k: int, bins: RankBins, bin_id: int) -> float:
    """Population loss restricted to sequences whose k indices all come from
    one bin, with within-bin weights renormalized."""
    idx = bins.skills[bin_id]
    if idx.size == 0:
        raise ValueError(f"bin {bin_id} is empty")
    p = np.asarray(p, dtype=np.float64)
    pb = p[idx]
    pb = pb / pb.sum()
    w = np.asarray(w, dtype=np.float64)[idx]
    ws = np.asarray(wstar, dtype=np.float64)[idx]
    a = float(np.dot(pb * ws, w))
    b = float(np.dot(pb, w * w))
    return _loss_from_stats(a, b, k)


def tail_gradient_norm(
    w,
    wstar,
    dist,
    k: int,
    bins: RankBins,
    tail_bin: int,
    context_bins,
    num_samples: int,
    rng: np.random.Generator,
) -> float:
    """Expected per-sample gradient norm when exactly one position carries a
    tail-bin skill and the other k-1 positions are drawn from the context
    bins (within-group weights renormalized). Monte-Carlo estimate."""
    w = np.asarray(w, dtype=np.float64)
    wstar = np.asarray(wstar, dtype=np.float64)
    tail_idx = bins.skills[tail_bin]
    ctx_idx = np.concatenate([bins.skills[b] for b in np.atleast_1d(context_bins)])
    if tail_idx.size == 0 or ctx_idx.size == 0:
        raise ValueError("tail and context bins must be nonempty")
    p = dist.weights
    p_tail = p[tail_idx] / p[tail_idx].sum()
    p_ctx = p[ctx_idx] / p[ctx_idx].sum()

    idx = ctx_idx[rng.choice(ctx_idx.size, size=(num_samples, k), p=p_ctx)]
    tail_draws = tail_idx[rng.choice(tail_idx.size, size=num_samples, p=p_tail)]
    pos = rng.integers(0, k, size=num_samples)
    idx[np.arange(num_samples), pos] = tail_draws

    vals = w[idx]
    resid = np.prod(vals, axis=1) - np.prod(wstar[idx], axis=1)
    loo = _leave_one_out(vals)
    # positions sharing a skill accumulate, so reduce per sample via bincount
    norms = np.empty(num_samples)
    contrib = resid[:, None] * loo
    for i in range(num_samples):
        g = np.bincount(idx[i], weights=contrib[i], minlength=1)
        norms[i] = np.sqrt(np.sum(g * g))
    return float(norms.mean())


@dataclass(frozen=True)
class StageThresholds:
    """Operational stage boundaries for the scalar model.

    Stage 1 ends once the total loss has dropped by ``total_drop`` relative
    to its initial value; stage 2 begins once the bin-0 (head) restricted
    loss falls to ``head_fraction`` of the initial total loss.
    """

    total_drop: float = 0.05
    head_fraction: float = 0.5


@dataclass(frozen=True)
class StageReport:
    stage1_exit_step: int | None
    stage2_entry_step: int | None
    initial_loss: float
    bin_half_steps: list[int | None]   # first step each bin's loss <= half its start


def first_step_below(steps: np.ndarray, values: np.ndarray, threshold: float) -> int | None:
    """First logged step at which ``values`` reaches the threshold."""
    hits = np.nonzero(values <= threshold)[0]
    return int(steps[hits[0]]) if hits.size else None


def detect_stages(log, thresholds: StageThresholds = StageThresholds()) -> StageReport:
    """Locate stage boundaries in a trajectory with bin-wise logging."""
    if log.bin_losses is None:
        raise ValueError("trajectory was logged without bin-wise losses")
    l0 = float(log.loss[0])
    stage1 = first_step_below(log.step, log.loss, (1.0 - thresholds.total_drop) * l0)
    stage2 = first_step_below(log.step, log.bin_losses[:, 0], thresholds.head_fraction * l0)
    halves = [
        first_step_below(log.step, log.bin_losses[:, b], 0.5 * log.bin_losses[0, b])
        for b in range(log.bin_losses.shape[1])
    ]
    return StageReport(
        stage1_exit_step=stage1,
        stage2_entry_step=stage2,
        initial_loss=l0,
        bin_half_steps=halves,
    )


@dataclass(frozen=True)
class PCAResult:
    dir1: np.ndarray
    dir2: np.ndarray
    explained: tuple[float, float]   # variance fractions, sum <= 1
    degenerate: bool                 # second component carries no variance


def _power_iteration(matvec, d: int, rng: np.random.Generator, tol: float, max_iters: int):
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        y = matvec(v)
        lam = float(np.dot(v, y))
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, v
        y /= norm
        if np.linalg.norm(y - np.sign(np.dot(y, v)) * v) < tol:
            v = y
            break
        v = y
    return lam, v


def pca_top2(
    checkpoint_diffs,
    *,
    tol: float = 1e-10,
    max_iters: int = 10_000,
    seed: int = 0,
) -> PCAResult:
    """Top-2 principal directions of mean-centered checkpoint differences,
    by power iteration with deflation (matrix-free, deterministic start)."""
    x = np.asarray(checkpoint_diffs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two difference vectors")
    n, d = x.shape
    x = x - x.mean(axis=0)
    total_var = float(np.sum(x * x)) / n
    rng = np.random.default_rng(seed)

    def cov(v):
        return x.T @ (x @ v) / n

    lam1, dir1 = _power_iteration(cov, d, rng, tol, max_iters)

    def cov_deflated(v):
        return cov(v) - lam1 * np.dot(dir1, v) * dir1

    lam2, dir2 = _power_iteration(cov_deflated, d, rng, tol, max_iters)
    dir2 = dir2 - np.dot(dir2, dir1) * dir1
    nrm = np.linalg.norm(dir2)
    degenerate = total_var == 0.0 or lam2 <= 1e-12 * max(lam1, 1e-300) or nrm < 1e-12
    if degenerate or nrm == 0.0:
        # arbitrary orthonormal completion so slices stay well-defined
        probe = np.zeros(d)
        probe[int(np.argmin(np.abs(dir1)))] = 1.0
        dir2 = probe - np.dot(probe, dir1) * dir1
        dir2 /= np.linalg.norm(dir2)
        lam2 = 0.0
    else:
        dir2 /= nrm
    if total_var == 0.0:
        explained = (0.0, 0.0)
    else:
        explained = (max(lam1, 0.0) / total_var, max(lam2, 0.0) / total_var)
    return PCAResult(dir1=dir1, dir2=dir2, explained=explained, degenerate=bool(degenerate))


@dataclass
class LandscapeSlice:
    """Population loss on an affine 2D slice center + a*dir1 + b*dir2."""

    center: np.ndarray
    dir1: np.ndarray
    dir2: np.ndarray
    a_coords: np.ndarray
    b_coords: np.ndarray
    grid: np.ndarray                      # shape (len(a_coords), len(b_coords))
    trajectory: np.ndarray | None = None  # projected (a, b) checkpoint coords


def landscape_slice(
    center,
    dir1,
    dir2,
    extents: tuple[float, float],
    resolution: tuple[int, int],
    wstar,
    p,
    k: int,
) -> LandscapeSlice:
    """Evaluate the population loss on a centered rectangular grid.

    Extents are half-widths; resolutions should be odd so the center is a
    grid point.
    """
    center = np.asarray(center, dtype=np.float64)
    dir1 = np.asarray(dir1, dtype=np.float64)
    dir2 = np.asarray(dir2, dtype=np.float64)
    if abs(np.dot(dir1, dir2)) > 1e-10:
        raise ValueError("slice directions must be orthogonal")
    wstar = np.asarray(wstar, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    n1, n2 = resolution
    a_coords = np.linspace(-extents[0], extents[0], n1)
    b_coords = np.linspace(-extents[1], extents[1], n2)
    pws = p * wstar
    grid = np.empty((n1, n2))
    for i, a in enumerate(a_coords):
        rows = center[None, :] + a * dir1[None, :] + b_coords[:, None] * dir2[None, :]
        ar = rows @ pws
        br = (rows * rows) @ p
        grid[i] = np.maximum(0.0, 0.5 * (br**k - 2.0 * ar**k + 1.0))
    return LandscapeSlice(
        center=center, dir1=dir1, dir2=dir2,
        a_coords=a_coords, b_coords=b_coords, grid=grid,
    )


def project_onto_slice(slc: LandscapeSlice, checkpoints) -> np.ndarray:
    """(a, b) coordinates of parameter checkpoints on the slice plane."""
    pts = np.asarray(checkpoints, dtype=np.float64) - slc.center
    return np.stack([pts @ slc.dir1, pts @ slc.dir2], axis=1)


def max_directional_slope(
    center,
    dir1,
    dir2,
    radius: float,
    wstar,
    p,
    k: int,
    *,
    num_angles: int = 64,
    num_radii: int = 5,
) -> float:
    """Largest |loss(center + rho u) - loss(center)| / rho over in-plane
    directions u within the given radius of the slice center."""
    center = np.asarray(center, dtype=np.float64)
    base = population_loss(center, wstar, p, k)
    angles = np.linspace(0.0, 2.0 * np.pi, num_angles, endpoint=False)
    radii = np.linspace(radius / num_radii, radius, num_radii)
    best = 0.0
    for rho in radii:
        for th in angles:
            u = np.cos(th) * np.asarray(dir1) + np.sin(th) * np.asarray(dir2)
            val = population_loss(center + rho * u, wstar, p, k)
            best = max(best, abs(val - base) / rho)
    return best
