"""Closed-form population quantities and deterministic gradient descent.

Because the k input skills are independent, the expected loss depends on the
parameter vector only through two sufficient statistics: the weighted
overlap with the hidden vector and the weighted squared norm (logged as the
CSV columns A and B). Population loss is 0.5 * (B^k - 2 A^k + 1) and the
gradient of coordinate j is k * p_j * (B^(k-1) w_j - A^(k-1) wstar_j), which
makes exact million-step trajectories cheap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .learner import DivergenceError, StepSizeWarning, check_sign_vector, recovery_error, stability_step_bound

__all__ = [
    "weighted_overlap",
    "weighted_norm_sq",
    "population_loss",
    "population_gradient",
    "HessianBound",
    "hessian_opnorm_bound",
    "TrajectoryLog",
    "population_gd_trajectory",
    "population_gd_state",
    "pl_ratios",
    "default_num_steps",
]

LOSS_FLOOR = 1e-14  # below this the PL ratio is undefined (at the minimum)


def _ipow(x: float, n: int) -> float:
    """x**n by repeated multiplication; exact sign handling for negative x."""
    out = 1.0
    for _ in range(n):
        out *= x
    return out


def weighted_overlap(w, wstar, p) -> float:
    """Distribution-weighted inner product of w with the hidden vector."""
    w = np.asarray(w)
    wstar = np.asarray(wstar)
    if w.shape != wstar.shape:
        raise ValueError("length mismatch between w and the hidden vector")
    return float(np.dot(np.asarray(p) * wstar, w))


def weighted_norm_sq(w, p) -> float:
    """Distribution-weighted squared norm of w."""
    w = np.asarray(w)
    return float(np.dot(np.asarray(p), w * w))


def _loss_from_stats(a: float, b: float, k: int) -> float:
    # the loss is an expected square; the clamp guards float drift when the
    # weights sum to 1 only within rounding
    return max(0.0, 0.5 * (_ipow(b, k) - 2.0 * _ipow(a, k) + 1.0))


def population_loss(w, wstar, p, k: int) -> float:
    """Exact expected loss over the sampling distribution."""
    wstar = check_sign_vector(wstar)
    a = weighted_overlap(w, wstar, p)
    b = weighted_norm_sq(w, p)
    return _loss_from_stats(a, b, k)


def population_gradient(w, wstar, p, k: int) -> np.ndarray:
    """Exact expected gradient over the sampling distribution."""
    wstar = check_sign_vector(wstar)
    w = np.asarray(w, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    a = weighted_overlap(w, wstar, p)
    b = weighted_norm_sq(w, p)
    return k * p * (_ipow(b, k - 1) * w - _ipow(a, k - 1) * wstar)


@dataclass(frozen=True)
class HessianBound:
    """Operator-norm bound on the population Hessian at a point."""

    explicit: float     # 2k(2k-1) p_max |A|^(k-1) + k(k-1) ||p||_2^2 |A|^(k-2)
    universal: float    # 3 k^2 ||p||_2, valid anywhere in the stable region
    value: float        # reported bound (explicit capped at universal)
    stable: bool        # B^k <= 2 |A|^k held at this point
    degenerate: bool    # A == 0 with k >= 3: explicit form collapses


def hessian_opnorm_bound(w, wstar, p, k: int) -> HessianBound:
    """Bound the Hessian operator norm at w; the stable region is checked."""
    wstar = check_sign_vector(wstar)
    p = np.asarray(p, dtype=np.float64)
    a = weighted_overlap(w, wstar, p)
    b = weighted_norm_sq(w, p)
    p_max = float(p.max())
    p_norm = float(np.linalg.norm(p))
    universal = 3.0 * k * k * p_norm
    stable = _ipow(b, k) <= 2.0 * _ipow(abs(a), k) + 1e-15
    degenerate = a == 0.0 and k >= 3
    explicit = (
        2.0 * k * (2 * k - 1) * p_max * _ipow(abs(a), k - 1)
        + k * (k - 1) * p_norm * p_norm * _ipow(abs(a), k - 2)
    )
    if degenerate or not stable:
        value = universal
    else:
        value = min(explicit, universal)
    return HessianBound(
        explicit=explicit, universal=universal, value=value,
        stable=stable, degenerate=degenerate,
    )


@dataclass
class TrajectoryLog:
    """Per-step records of a (population or SGD) trajectory.

    Columns mirror the CSV schema: step, loss, A (overlap), B (weighted
    squared norm), grad_norm, recovery_error, pl_ratio. Binwise losses and
    parameter checkpoints are attached when requested.
    """

    step: np.ndarray
    loss: np.ndarray
    overlap: np.ndarray
    norm_sq: np.ndarray
    grad_norm: np.ndarray
    recovery: np.ndarray
    pl_ratio: np.ndarray
    bin_losses: np.ndarray | None = None
    checkpoint_steps: list[int] = field(default_factory=list)
    checkpoints: list[np.ndarray] = field(default_factory=list)
    final_w: np.ndarray | None = None
    steps_to_loss_target: int | None = None
    steps_to_recovery_target: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.step)


def pl_ratios(loss, grad_norm, overlap, p_min: float, k: int) -> np.ndarray:
    """||grad||^2 / (2 k p_min A^(2k-2) L); NaN where the loss is at the floor."""
    loss = np.asarray(loss, dtype=np.float64)
    grad_norm = np.asarray(grad_norm, dtype=np.float64)
    overlap = np.asarray(overlap, dtype=np.float64)
    denom = 2.0 * k * p_min * overlap ** (2 * k - 2) * loss
    out = np.full(loss.shape, np.nan)
    ok = (loss > LOSS_FLOOR) & (denom != 0.0)
    out[ok] = grad_norm[ok] ** 2 / denom[ok]
    return out


def default_num_steps(
    eta: float, k: int, p, a0: float, l0: float, eps_target: float, cap: int = 10_000_000
) -> int:
    """Step budget from the guaranteed per-step loss decrement rate."""
    p_min = float(np.asarray(p).min())
    rate = eta * k * p_min * _ipow(abs(a0), 2 * k - 2)
    if rate <= 0 or l0 <= eps_target:
        return 1
    return min(cap, math.ceil(6.0 / rate * math.log(l0 / eps_target)))


def population_gd_trajectory(
    w0: np.ndarray,
    wstar: np.ndarray,
    p: np.ndarray,
    k: int,
    eta: float,
    num_steps: int,
    *,
    log_every: int = 1,
    loss_target: float | None = None,
    recovery_target: float | None = None,
    stop_at_targets: bool = False,
    checkpoint_every: int | None = None,
    bin_index_lists: list[np.ndarray] | None = None,
) -> TrajectoryLog:
    """Deterministic gradient descent on the population loss.

    Logs every ``log_every`` steps (plus the final state). First-crossing
    steps for the optional loss/recovery targets are detected at every step
    regardless of the logging cadence; with ``stop_at_targets`` the run ends
    once all supplied targets are met. Raises :class:`DivergenceError` with
    the offending step on non-finite iterates.
    """
    wstar = check_sign_vector(wstar)
    w = np.array(w0, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if eta > stability_step_bound(k, p):
        warnings.warn(
            f"eta={eta:g} exceeds the stability bound {stability_step_bound(k, p):g}; "
            "monotone descent is no longer guaranteed",
            StepSizeWarning,
            stacklevel=2,
        )
    pws = p * wstar
    kp = k * p
    kpws = k * pws
    p_min = float(p.min())

    bins = None
    if bin_index_lists is not None:
        bins = []
        for idx in bin_index_lists:
            idx = np.asarray(idx, dtype=np.int64)
            pb = p[idx]
            sb = pb.sum()
            bins.append((idx, pb / sb, (pb / sb) * wstar[idx]))

    max_logs = num_steps // log_every + 2
    log_step = np.empty(max_logs, dtype=np.int64)
    log_loss = np.empty(max_logs)
    log_a = np.empty(max_logs)
    log_b = np.empty(max_logs)
    log_gn = np.empty(max_logs)
    log_rec = np.empty(max_logs)
    log_bins = np.empty((max_logs, len(bins))) if bins else None
    n_logged = 0
    checkpoint_steps: list[int] = []
    checkpoints: list[np.ndarray] = []
    steps_to_loss = None
    steps_to_rec = None

    t = 0
    while True:
        a = float(np.dot(pws, w))
        b = float(np.dot(p, w * w))
        a_pow = _ipow(a, k - 1)
        b_pow = _ipow(b, k - 1)
        loss = max(0.0, 0.5 * (b_pow * b - 2.0 * a_pow * a + 1.0))
        if not math.isfinite(a) or not math.isfinite(b):
            raise DivergenceError(t)
        grad = b_pow * (kp * w) - a_pow * kpws
        gn = float(np.linalg.norm(grad))
        # recovery is only computed when logged or while a target is tracked
        rec = None
        if recovery_target is not None and steps_to_rec is None:
            rec = recovery_error(w, wstar)
            if rec <= recovery_target:
                steps_to_rec = t

        if steps_to_loss is None and loss_target is not None and loss <= loss_target:
            steps_to_loss = t
        targets_met = (loss_target is None or steps_to_loss is not None) and (
            recovery_target is None or steps_to_rec is not None
        )
        has_target = loss_target is not None or recovery_target is not None
        done = t >= num_steps or (stop_at_targets and has_target and targets_met)

        if t % log_every == 0 or done:
            if rec is None:
                rec = recovery_error(w, wstar)
            log_step[n_logged] = t
            log_loss[n_logged] = loss
            log_a[n_logged] = a
            log_b[n_logged] = b
            log_gn[n_logged] = gn
            log_rec[n_logged] = rec
            if bins:
                for j, (idx, pb, pbs) in enumerate(bins):
                    wb = w[idx]
                    ab = float(np.dot(pbs, wb))
                    bb = float(np.dot(pb, wb * wb))
                    log_bins[n_logged, j] = _loss_from_stats(ab, bb, k)
            n_logged += 1
        if checkpoint_every is not None and (t % checkpoint_every == 0 or done):
            checkpoint_steps.append(t)
            checkpoints.append(w.copy())
        if done:
            break
        w -= eta * grad
        t += 1

    sl = slice(0, n_logged)
    return TrajectoryLog(
        step=log_step[sl].copy(),
        loss=log_loss[sl].copy(),
        overlap=log_a[sl].copy(),
        norm_sq=log_b[sl].copy(),
        grad_norm=log_gn[sl].copy(),
        recovery=log_rec[sl].copy(),
        pl_ratio=pl_ratios(log_loss[sl], log_gn[sl], log_a[sl], p_min, k),
        bin_losses=log_bins[sl].copy() if log_bins is not None else None,
        checkpoint_steps=checkpoint_steps,
        checkpoints=checkpoints,
        final_w=w,
        steps_to_loss_target=steps_to_loss,
        steps_to_recovery_target=steps_to_rec,
        meta={"k": k, "eta": eta, "num_steps": num_steps, "p_min": p_min},
    )


def population_gd_state(
    w0: np.ndarray, wstar: np.ndarray, p: np.ndarray, k: int, eta: float, t: int
) -> np.ndarray:
    """Parameter vector after exactly t population-GD steps (no logging)."""
    wstar = check_sign_vector(wstar)
    w = np.array(w0, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    pws = p * wstar
    kp = k * p
    kpws = k * pws
    for step in range(t):
        a = float(np.dot(pws, w))
        b = float(np.dot(p, w * w))
        w -= eta * (_ipow(b, k - 1) * (kp * w) - _ipow(a, k - 1) * kpws)
        if not math.isfinite(a) or not math.isfinite(b):
            raise DivergenceError(step)
    return w
