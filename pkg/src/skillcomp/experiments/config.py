"""Experiment config files: a JSON object per run, validated strictly.

Unknown keys are hard errors (silent hyperparameter typos are the main
reproducibility hazard), and validation reports every violation at once.
The distribution sub-spec follows
{kind, d, alpha?, m?, ordering: "identity" | "reversed" | {"random": seed}}.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

__all__ = ["ConfigError", "EXPERIMENT_KINDS", "load_config", "validate_config", "config_hash"]

EXPERIMENT_KINDS = (
    "minimal-run",
    "population-run",
    "sweep-alpha",
    "separation",
    "landscape",
    "probes",
    "gen-data",
)


class ConfigError(ValueError):
    """Invalid experiment config; lists every violation found."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid config:\n  - " + "\n  - ".join(problems))


def _is_int(v, lo=None, hi=None):
    if not isinstance(v, int) or isinstance(v, bool):
        return "must be an integer"
    if lo is not None and v < lo:
        return f"must be >= {lo}"
    if hi is not None and v > hi:
        return f"must be <= {hi}"
    return None


def _is_num(v, lo=None, strict=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return "must be a number"
    if lo is not None and (v <= lo if strict else v < lo):
        return f"must be {'>' if strict else '>='} {lo}"
    return None


def _is_bool(v):
    return None if isinstance(v, bool) else "must be true or false"


def _is_str_in(options):
    def check(v):
        return None if v in options else f"must be one of {sorted(options)}"

    return check


def _is_list_of(elem_check, min_len=1):
    def check(v):
        if not isinstance(v, list) or len(v) < min_len:
            return f"must be a list with at least {min_len} element(s)"
        for i, e in enumerate(v):
            err = elem_check(e)
            if err:
                return f"element {i} {err}"
        return None

    return check


def _is_dist_spec(v):
    if not isinstance(v, dict):
        return "must be a distribution object"
    try:
        from ..distributions import dist_from_spec

        dist_from_spec(v)
    except (ValueError, KeyError, TypeError) as exc:
        return f"is not a valid distribution spec ({exc})"
    return None


def _is_ordering(v):
    if v in ("identity", "reversed"):
        return None
    if isinstance(v, dict) and set(v) == {"random"} and _is_int(v["random"]) is None:
        return None
    return 'must be "identity", "reversed", or {"random": seed}'


# key -> (required, checker); checkers return an error string or None
_COMMON = {
    "kind": (True, _is_str_in(EXPERIMENT_KINDS)),
    "seed": (True, lambda v: _is_int(v, 0)),
    "out": (False, lambda v: None if isinstance(v, str) else "must be a string path"),
}

_TRIAL_PARAMS = {
    "d": (True, lambda v: _is_int(v, 1)),
    "k": (True, lambda v: _is_int(v, 1)),
    "r": (True, lambda v: _is_num(v, 0, strict=True)),
    "eta": (False, lambda v: _is_num(v, 0, strict=True)),
    "steps": (True, lambda v: _is_int(v, 1)),
    "log_every": (False, lambda v: _is_int(v, 1)),
}

SCHEMAS: dict[str, dict] = {
    "minimal-run": {
        **_COMMON,
        **_TRIAL_PARAMS,
        "batch_size": (True, lambda v: _is_int(v, 1)),
        "distribution": (True, _is_dist_spec),
        "num_trials": (False, lambda v: _is_int(v, 1)),
        "wstar": (False, _is_str_in({"rademacher", "ones"})),
    },
    "population-run": {
        **_COMMON,
        **_TRIAL_PARAMS,
        "distribution": (True, _is_dist_spec),
        "bins": (False, lambda v: _is_int(v, 1)),
        "loss_target": (False, lambda v: _is_num(v, 0, strict=True)),
        "recovery_target": (False, lambda v: _is_num(v, 0, strict=True)),
        "stop_at_targets": (False, _is_bool),
        "checkpoint_every": (False, lambda v: _is_int(v, 1)),
        "wstar": (False, _is_str_in({"rademacher", "ones"})),
    },
    "sweep-alpha": {
        **_COMMON,
        **_TRIAL_PARAMS,
        "alphas": (True, _is_list_of(lambda v: _is_num(v, 0, strict=True))),
        "num_seeds": (True, lambda v: _is_int(v, 1)),
        "loss_threshold": (True, lambda v: _is_num(v, 0, strict=True)),
        "eta_policy": (False, _is_str_in({"half-bound", "bound"})),
        "ordering": (False, _is_ordering),
        "stop_at_targets": (False, _is_bool),
    },
    "separation": {
        **_COMMON,
        "d": (True, lambda v: _is_int(v, 1)),
        "k": (True, lambda v: _is_int(v, 1)),
        "r": (True, lambda v: _is_num(v, 0, strict=True)),
        "alpha": (True, lambda v: _is_num(v, 0, strict=True)),
        "budgets": (True, _is_list_of(lambda v: _is_int(v, 1))),
        "num_seeds": (True, lambda v: _is_int(v, 1)),
        "batch_size": (True, lambda v: _is_int(v, 1)),
        "success_recovery": (False, lambda v: _is_num(v, 0, strict=True)),
    },
    "landscape": {
        **_COMMON,
        "d": (True, lambda v: _is_int(v, 1)),
        "k": (True, lambda v: _is_int(v, 1)),
        "r": (True, lambda v: _is_num(v, 0, strict=True)),
        "alpha": (True, lambda v: _is_num(v, 0, strict=True)),
        "pca_steps": (True, lambda v: _is_int(v, 2)),
        "checkpoint_every": (True, lambda v: _is_int(v, 1)),
        "pca_range": (False, _is_list_of(lambda v: _is_int(v, 0), min_len=2)),
        "extent": (True, lambda v: _is_num(v, 0, strict=True)),
        "resolution": (True, lambda v: _is_int(v, 3)),
        "slope_radius": (False, lambda v: _is_num(v, 0, strict=True)),
    },
    "probes": {
        **_COMMON,
        "d": (True, lambda v: _is_int(v, 1)),
        "k": (True, lambda v: _is_int(v, 1)),
        "r": (True, lambda v: _is_num(v, 0, strict=True)),
        "distribution": (True, _is_dist_spec),
        "which": (
            True,
            _is_list_of(_is_str_in({"pl", "stationary", "init-concentration", "noise", "packing"})),
        ),
        "steps": (False, lambda v: _is_int(v, 1)),
        "num_probes": (False, lambda v: _is_int(v, 1)),
        "num_trials": (False, lambda v: _is_int(v, 1000)),
        "batch_size": (False, lambda v: _is_int(v, 1)),
        "num_batches": (False, lambda v: _is_int(v, 100)),
        "packing": (False, lambda v: None if isinstance(v, dict) else "must be an object"),
    },
    "gen-data": {
        **_COMMON,
        "task": (True, _is_str_in({"arithmetic", "state_tracking", "multihop_qa", "gsm"})),
        "n": (True, lambda v: _is_int(v, 1)),
        "distribution": (True, _is_dist_spec),
        "k": (False, lambda v: _is_int(v, 1)),
        "num_ops": (False, lambda v: _is_int(v, 1)),
        "num_ops_range": (False, _is_list_of(lambda v: _is_int(v, 2, 8), min_len=2)),
        "operand_lo": (False, lambda v: _is_int(v, 0)),
        "num_entities": (False, lambda v: _is_int(v, 2)),
        "num_relations": (False, lambda v: _is_int(v, 1)),
        "allow_self_loops": (False, _is_bool),
        "include_facts": (False, _is_bool),
        "fact_ratio": (False, lambda v: _is_num(v, 0)),
        "modulus": (False, lambda v: _is_int(v, 2)),
        "multi_hop_template": (False, _is_bool),
        "hop_mixture": (False, lambda v: None if isinstance(v, dict) else "must be an object"),
    },
}


def validate_config(config: dict) -> dict:
    """Return the config unchanged or raise ConfigError listing all problems."""
    problems: list[str] = []
    if not isinstance(config, dict):
        raise ConfigError(["config must be a JSON object"])
    kind = config.get("kind")
    if kind not in SCHEMAS:
        raise ConfigError([f'"kind" must be one of {list(EXPERIMENT_KINDS)}, got {kind!r}'])
    schema = SCHEMAS[kind]
    for key in config:
        if key not in schema:
            problems.append(f'unknown key "{key}" for kind "{kind}"')
    for key, (required, check) in schema.items():
        if key not in config:
            if required:
                problems.append(f'missing required key "{key}"')
            continue
        err = check(config[key])
        if err:
            problems.append(f'key "{key}" {err}')
    if problems:
        raise ConfigError(problems)
    if config.get("k") is not None and config["k"] % 2 == 1 and kind != "gen-data":
        import warnings

        warnings.warn(
            f"k={config['k']} is odd: outside the proved even-hop regime",
            UserWarning,
            stacklevel=2,
        )
    return config


def load_config(path) -> dict:
    """Read and validate a JSON config file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    return validate_config(config)


def config_hash(config: dict) -> str:
    """Content hash of the canonical JSON form of a config."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
