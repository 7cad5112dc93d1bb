"""The minimalist multiplicative-composition learner.

A sample is a length-k sequence of skill indices; its label is the product
of hidden +/-1 scalars behind those skills. The learner is a single real
vector w scored by f(w, X) = prod_t w[X_t] under squared loss. This module
holds exact per-sample quantities and the minibatch SGD step; closed-form
expectations live in :mod:`skillcomp.population`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DivergenceError",
    "StepSizeWarning",
    "Sample",
    "ModelState",
    "random_sign_vector",
    "check_sign_vector",
    "init_gaussian",
    "generate_sample",
    "generate_batch",
    "predict",
    "sample_loss",
    "sample_gradient",
    "batch_gradient",
    "minibatch_step",
    "recovery_error",
    "stability_step_bound",
    "default_step_size",
]


class DivergenceError(RuntimeError):
    """Raised when an update produces a non-finite parameter vector."""

    def __init__(self, step: int):
        super().__init__(f"non-finite parameters after update at step {step}")
        self.step = step


class StepSizeWarning(UserWarning):
    """Step size exceeds the guaranteed-stability bound 1/(10 k^2 ||p||_2)."""


@dataclass
class Sample:
    """One training example: skill indices and the +/-1 product label."""

    indices: np.ndarray
    label: float


@dataclass
class ModelState:
    """Learner parameters with step counter; owned by a single trial."""

    w: np.ndarray
    step: int = 0
    init_scale: float = 0.0


def random_sign_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. Rademacher hidden vector in {-1, +1}^d."""
    return rng.integers(0, 2, size=d).astype(np.float64) * 2.0 - 1.0


def check_sign_vector(wstar: np.ndarray) -> np.ndarray:
    wstar = np.asarray(wstar, dtype=np.float64)
    if not np.all(np.abs(wstar) == 1.0):
        raise ValueError("hidden vector entries must be exactly -1 or +1")
    return wstar


def init_gaussian(d: int, r: float, rng: np.random.Generator) -> ModelState:
    """Initial state with i.i.d. N(0, r^2) coordinates."""
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if r <= 0:
        raise ValueError(f"init scale must be positive, got r={r}")
    return ModelState(w=r * rng.standard_normal(d), step=0, init_scale=float(r))


def generate_sample(wstar, dist, k: int, rng: np.random.Generator) -> Sample:
    """Draw k i.i.d. skill indices and attach the product label."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    idx = np.atleast_1d(dist.sample(rng, size=k))
    label = float(np.prod(np.asarray(wstar)[idx]))
    return Sample(indices=idx, label=label)


def generate_batch(wstar, dist, k: int, batch_size: int, rng: np.random.Generator):
    """Vectorized sample generation: (batch_size, k) indices and labels."""
    if k < 1 or batch_size < 1:
        raise ValueError(f"need k >= 1 and batch_size >= 1, got k={k}, B={batch_size}")
    idx = dist.sample(rng, size=(batch_size, k))
    labels = np.prod(np.asarray(wstar)[idx], axis=1)
    return idx, labels


def predict(w: np.ndarray, sample: Sample) -> float:
    """Model output: product of the addressed coordinates."""
    w = np.asarray(w)
    idx = np.asarray(sample.indices)
    if idx.min() < 0 or idx.max() >= w.shape[0]:
        raise ValueError("sample index out of range")
    return float(np.prod(w[idx]))


def sample_loss(w: np.ndarray, sample: Sample) -> float:
    """Half squared residual on one sample."""
    diff = predict(w, sample) - sample.label
    return 0.5 * diff * diff


def _leave_one_out(vals: np.ndarray) -> np.ndarray:
    """Products of all entries but one, via prefix/suffix arrays (no division)."""
    pref = np.ones_like(vals)
    suf = np.ones_like(vals)
    pref[..., 1:] = np.cumprod(vals[..., :-1], axis=-1)
    suf[..., :-1] = np.cumprod(vals[..., :0:-1], axis=-1)[..., ::-1]
    return pref * suf


def sample_gradient(w: np.ndarray, sample: Sample) -> np.ndarray:
    """Exact per-sample gradient, dense length-d with at most k nonzeros.

    Positions sharing a skill index accumulate their leave-one-out products.
    """
    w = np.asarray(w, dtype=np.float64)
    idx = np.asarray(sample.indices)
    vals = w[idx]
    resid = float(np.prod(vals)) - sample.label
    loo = _leave_one_out(vals)
    grad = np.zeros_like(w)
    np.add.at(grad, idx, resid * loo)
    return grad


def batch_gradient(w: np.ndarray, idx: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, float]:
    """Mean gradient and mean loss over a batch of index rows."""
    w = np.asarray(w, dtype=np.float64)
    vals = w[idx]
    preds = np.prod(vals, axis=1)
    resid = preds - labels
    loo = _leave_one_out(vals)
    contrib = resid[:, None] * loo
    grad = np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=w.shape[0])
    grad /= idx.shape[0]
    loss = 0.5 * float(np.mean(resid * resid))
    return grad, loss


def stability_step_bound(k: int, p: np.ndarray) -> float:
    """Largest step size with guaranteed descent: 1 / (10 k^2 ||p||_2)."""
    return 1.0 / (10.0 * k * k * float(np.linalg.norm(p)))


def default_step_size(k: int, p: np.ndarray) -> float:
    """Half the stability bound; the package-wide default."""
    return 0.5 * stability_step_bound(k, p)


def minibatch_step(
    state: ModelState,
    dist,
    wstar: np.ndarray,
    k: int,
    eta: float,
    batch_size: int,
    rng: np.random.Generator,
) -> float:
    """One SGD update on a fresh batch; mutates ``state`` and returns batch loss."""
    if eta <= 0:
        raise ValueError(f"step size must be positive, got eta={eta}")
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    if eta > stability_step_bound(k, dist.weights):
        warnings.warn(
            f"eta={eta:g} exceeds the stability bound "
            f"{stability_step_bound(k, dist.weights):g}",
            StepSizeWarning,
            stacklevel=2,
        )
    idx, labels = generate_batch(wstar, dist, k, batch_size, rng)
    grad, loss = batch_gradient(state.w, idx, labels)
    state.w -= eta * grad
    state.step += 1
    if not np.all(np.isfinite(state.w)):
        raise DivergenceError(state.step)
    return loss


def recovery_error(w: np.ndarray, wstar: np.ndarray) -> float:
    """Max-coordinate deviation from the hidden vector, up to global sign."""
    w = np.asarray(w)
    wstar = np.asarray(wstar)
    if w.shape != wstar.shape:
        raise ValueError("length mismatch between w and the hidden vector")
    return float(min(np.abs(w - wstar).max(), np.abs(w + wstar).max()))
