"""Experiment dispatch: build trials from a validated config, run them
(optionally in parallel), and write trajectory CSVs, probe reports,
datasets, and a manifest with content hashes.

Every artifact is a pure function of (config, code version): seeds are
derived per trial from the root seed, floats are serialized via repr, and
no timestamps are embedded, so reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..distributions import (
    SkillDistribution,
    dist_from_spec,
    identity_ordering,
    uniform_weights,
    zipf_weights,
)
from ..learner import (
    DivergenceError,
    batch_gradient,
    default_step_size,
    generate_batch,
    random_sign_vector,
    recovery_error,
    stability_step_bound,
)
from ..population import (
    TrajectoryLog,
    _ipow,
    pl_ratios,
    population_gd_trajectory,
    population_gradient,
    population_loss,
    weighted_norm_sq,
    weighted_overlap,
)
from ..probes import (
    PackingConfig,
    check_init_concentration,
    check_pl_inequality,
    check_stationary_points,
    estimate_gradient_noise,
    hypercube_packing,
    separation_experiment,
)
from ..rng import derive_seed, make_rng
from ..stages import (
    assign_bins,
    detect_stages,
    landscape_slice,
    max_directional_slope,
    pca_top2,
    project_onto_slice,
)
from ..tasks import gen_arithmetic, gen_gsm, gen_multihop_qa, gen_relation_graph, gen_state_tracking, write_dataset
from .config import config_hash, validate_config

__all__ = ["RunResult", "run_experiment", "sgd_trajectory", "sweep_alpha", "trajectory_csv"]

MANIFEST_SCHEMA = "run-manifest-v1"


@dataclass
class RunResult:
    kind: str
    out_dir: Path
    files: dict[str, str] = field(default_factory=dict)
    diverged: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if self.diverged else 0


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _csv(schema: str, cfg_hash: str, header: list[str], rows) -> str:
    lines = [f"#schema={schema},config_hash={cfg_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (float, np.floating)) or v is None else str(v) for v in row))
    return "\n".join(lines) + "\n"


def trajectory_csv(log: TrajectoryLog, cfg_hash: str, schema: str = "trajectory-v1") -> str:
    """Serialize a trajectory to the step,loss,A,B,... column layout."""
    header = ["step", "loss", "A", "B", "grad_norm", "recovery_error", "pl_ratio"]
    columns = [log.step, log.loss, log.overlap, log.norm_sq, log.grad_norm, log.recovery, log.pl_ratio]
    if log.bin_losses is not None:
        for b in range(log.bin_losses.shape[1]):
            header.append(f"bin{b + 1}_loss")
            columns.append(log.bin_losses[:, b])
    batch_loss = log.meta.get("batch_loss")
    if batch_loss is not None:
        header.append("batch_loss")
        columns.append(batch_loss)
    rows = (
        [int(columns[0][i])] + [float(c[i]) for c in columns[1:]]
        for i in range(len(log.step))
    )
    return _csv(schema, cfg_hash, header, rows)


def _write(out_dir: Path, name: str, content: str, files: dict[str, str]) -> None:
    path = out_dir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    files[name] = hashlib.sha256(content.encode()).hexdigest()


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _make_wstar(d: int, seed: int, index: int, flavor: str) -> np.ndarray:
    if flavor == "ones":
        return np.ones(d)
    return random_sign_vector(d, make_rng(seed, "wstar", index))


def _resolve_eta(config: dict, k: int, p: np.ndarray) -> float:
    eta = config.get("eta")
    if eta is not None:
        return float(eta)
    return default_step_size(k, p)


def sgd_trajectory(
    dist: SkillDistribution,
    wstar: np.ndarray,
    w0: np.ndarray,
    k: int,
    eta: float,
    batch_size: int,
    num_steps: int,
    rng: np.random.Generator,
    *,
    log_every: int = 1,
) -> TrajectoryLog:
    """Minibatch SGD, one logged row per executed step at the given cadence.

    Each row holds the population statistics of the pre-update state plus
    the average loss of the batch consumed at that step.
    """
    w = np.array(w0, dtype=np.float64)
    p = dist.weights
    p_min = float(p.min())
    max_logs = (num_steps - 1) // log_every + 1
    cols = {name: np.empty(max_logs) for name in ("loss", "a", "b", "gn", "rec", "batch")}
    steps = np.empty(max_logs, dtype=np.int64)
    n = 0
    for t in range(num_steps):
        log_now = t % log_every == 0
        if log_now:
            a = weighted_overlap(w, wstar, p)
            b = weighted_norm_sq(w, p)
            steps[n] = t
            cols["loss"][n] = max(0.0, 0.5 * (_ipow(b, k) - 2.0 * _ipow(a, k) + 1.0))
            cols["a"][n] = a
            cols["b"][n] = b
            cols["gn"][n] = float(np.linalg.norm(population_gradient(w, wstar, p, k)))
            cols["rec"][n] = recovery_error(w, wstar)
        idx, labels = generate_batch(wstar, dist, k, batch_size, rng)
        grad, batch_loss = batch_gradient(w, idx, labels)
        if log_now:
            cols["batch"][n] = batch_loss
            n += 1
        w -= eta * grad
        if not np.all(np.isfinite(w)):
            raise DivergenceError(t + 1)
    sl = slice(0, n)
    return TrajectoryLog(
        step=steps[sl].copy(),
        loss=cols["loss"][sl].copy(),
        overlap=cols["a"][sl].copy(),
        norm_sq=cols["b"][sl].copy(),
        grad_norm=cols["gn"][sl].copy(),
        recovery=cols["rec"][sl].copy(),
        pl_ratio=pl_ratios(cols["loss"][sl], cols["gn"][sl], cols["a"][sl], p_min, k),
        final_w=w,
        meta={"k": k, "eta": eta, "batch_loss": cols["batch"][sl].copy()},
    )


# ---------------------------------------------------------------- trials


def _minimal_trial(args: tuple) -> tuple[int, str | None, dict]:
    """One SGD trial; returns (index, csv or None, summary row)."""
    config, index = args
    dist = dist_from_spec(config["distribution"])
    seed = config["seed"]
    k = config["k"]
    wstar = _make_wstar(config["d"], seed, index, config.get("wstar", "rademacher"))
    w0 = config["r"] * make_rng(seed, "init", index).standard_normal(config["d"])
    eta = _resolve_eta(config, k, dist.weights)
    rng = make_rng(seed, "data", index)
    try:
        log = sgd_trajectory(
            dist, wstar, w0, k, eta, config["batch_size"], config["steps"], rng,
            log_every=config.get("log_every", 1),
        )
    except DivergenceError as exc:
        return index, None, {"trial": index, "status": f"diverged@{exc.step}"}
    csv = trajectory_csv(log, config_hash(config), schema="sgd-trajectory-v1")
    summary = {
        "trial": index,
        "status": "ok",
        "final_loss": float(log.loss[-1]),
        "final_recovery": float(log.recovery[-1]),
    }
    return index, csv, summary


def _sweep_trial(args: tuple) -> tuple[str, str | None, dict]:
    """One (alpha, seed) population trial of an exponent sweep."""
    config, alpha, seed_index = args
    d, k = config["d"], config["k"]
    ordering = config.get("ordering", "identity")
    dist = dist_from_spec({"kind": "zipf", "d": d, "alpha": alpha, "ordering": ordering})
    p = dist.weights
    eta = (
        stability_step_bound(k, p)
        if config.get("eta_policy", "half-bound") == "bound"
        else default_step_size(k, p)
    )
    seed = config["seed"]
    wstar = _make_wstar(d, seed, seed_index, "rademacher")
    w0 = config["r"] * make_rng(seed, "init", seed_index).standard_normal(d)
    name = f"alpha{alpha:g}_seed{seed_index}"
    try:
        log = population_gd_trajectory(
            w0, wstar, p, k, eta, config["steps"],
            log_every=config.get("log_every", 1),
            loss_target=config["loss_threshold"],
            stop_at_targets=config.get("stop_at_targets", False),
        )
    except DivergenceError as exc:
        return name, None, {"alpha": alpha, "seed": seed_index, "status": f"diverged@{exc.step}"}
    row = {
        "alpha": alpha,
        "seed": seed_index,
        "status": "ok",
        "steps_to_threshold": log.steps_to_loss_target,
        "final_loss": float(log.loss[-1]),
        "final_recovery": float(log.recovery[-1]),
    }
    return name, trajectory_csv(log, config_hash(config)), row


def _parallel_map(fn, jobs, parallelism: int):
    if parallelism <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, jobs))


# ------------------------------------------------------------- run kinds


def _run_minimal(config: dict, out: Path, parallelism: int) -> RunResult:
    result = RunResult("minimal-run", out)
    jobs = [(config, i) for i in range(config.get("num_trials", 1))]
    rows = []
    for index, csv, summary in _parallel_map(_minimal_trial, jobs, parallelism):
        if csv is None:
            result.diverged.append(f"trial_{index:03d}")
        else:
            _write(out, f"trial_{index:03d}.csv", csv, result.files)
        rows.append(summary)
    header = ["trial", "status", "final_loss", "final_recovery"]
    body = ([r["trial"], r["status"], r.get("final_loss"), r.get("final_recovery")] for r in rows)
    _write(out, "summary.csv", _csv("sgd-summary-v1", config_hash(config), header, body), result.files)
    return result


def _run_population(config: dict, out: Path) -> RunResult:
    result = RunResult("population-run", out)
    dist = dist_from_spec(config["distribution"])
    d, k, seed = config["d"], config["k"], config["seed"]
    if dist.d != d:
        raise ValueError(f"distribution d={dist.d} does not match config d={d}")
    wstar = _make_wstar(d, seed, 0, config.get("wstar", "rademacher"))
    w0 = config["r"] * make_rng(seed, "init", 0).standard_normal(d)
    bins = assign_bins(dist, config["bins"]).skills if "bins" in config else None
    try:
        log = population_gd_trajectory(
            w0, wstar, dist.weights, k, _resolve_eta(config, k, dist.weights), config["steps"],
            log_every=config.get("log_every", 1),
            loss_target=config.get("loss_target"),
            recovery_target=config.get("recovery_target"),
            stop_at_targets=config.get("stop_at_targets", False),
            checkpoint_every=config.get("checkpoint_every"),
            bin_index_lists=bins,
        )
    except DivergenceError as exc:
        result.diverged.append(f"trajectory@{exc.step}")
        return result
    _write(out, "trajectory.csv", trajectory_csv(log, config_hash(config)), result.files)
    report = {
        "steps_to_loss_target": log.steps_to_loss_target,
        "steps_to_recovery_target": log.steps_to_recovery_target,
        "final_loss": float(log.loss[-1]),
        "final_recovery": float(log.recovery[-1]),
    }
    _write(out, "report.json", _dump_json(report), result.files)
    if bins is not None:
        stages = detect_stages(log)
        _write(
            out, "stages.json",
            _dump_json(
                {
                    "stage1_exit_step": stages.stage1_exit_step,
                    "stage2_entry_step": stages.stage2_entry_step,
                    "initial_loss": stages.initial_loss,
                    "bin_half_steps": stages.bin_half_steps,
                }
            ),
            result.files,
        )
    return result


def sweep_alpha(config: dict, parallelism: int = 1) -> tuple[list[dict], dict[str, str]]:
    """Run the exponent grid; returns summary rows and trajectory CSVs."""
    jobs = [
        (config, alpha, s)
        for alpha in config["alphas"]
        for s in range(config["num_seeds"])
    ]
    rows: list[dict] = []
    csvs: dict[str, str] = {}
    for name, csv, row in _parallel_map(_sweep_trial, jobs, parallelism):
        if csv is not None:
            csvs[name] = csv
        rows.append(row)
    rows.sort(key=lambda r: (r["alpha"], r["seed"]))
    return rows, csvs


def _run_sweep(config: dict, out: Path, parallelism: int) -> RunResult:
    result = RunResult("sweep-alpha", out)
    rows, csvs = sweep_alpha(config, parallelism)
    for name, csv in csvs.items():
        _write(out, f"{name}.csv", csv, result.files)
    for row in rows:
        if row["status"] != "ok":
            result.diverged.append(f"alpha{row['alpha']:g}_seed{row['seed']}")
    header = ["alpha", "seed", "status", "steps_to_threshold", "final_loss", "final_recovery"]
    body = (
        [
            r["alpha"], r["seed"], r["status"],
            "" if r.get("steps_to_threshold") is None else r["steps_to_threshold"],
            r.get("final_loss"), r.get("final_recovery"),
        ]
        for r in rows
    )
    _write(out, "summary.csv", _csv("sweep-summary-v1", config_hash(config), header, body), result.files)
    return result


def _run_separation(config: dict, out: Path) -> RunResult:
    result = RunResult("separation", out)
    report = separation_experiment(
        config["d"], config["k"], config["alpha"], config["budgets"], config["num_seeds"],
        batch_size=config["batch_size"],
        r=config["r"],
        root_seed=config["seed"],
        success_recovery=config.get("success_recovery", 0.1),
    )
    rows = []
    for arms in (report.zipf_arms, report.uniform_arms):
        for s, arm in enumerate(arms):
            pos = np.minimum(
                np.searchsorted(arm.samples, report.budgets, side="left"), len(arm.recovery) - 1
            )
            for budget, j in zip(report.budgets, pos):
                rows.append([arm.kind, s, budget, float(arm.recovery[j]), float(arm.pop_loss[j])])
    _write(
        out, "curves.csv",
        _csv("separation-curves-v1", config_hash(config),
             ["arm", "seed", "budget", "recovery_error", "population_loss"], rows),
        result.files,
    )
    summary = {
        "n_star": report.n_star,
        "zipf_samples_to_success": [a.samples_to_success for a in report.zipf_arms],
        "uniform_loss_at_n_star": report.uniform_loss_at_n_star,
        "median_uniform_loss_at_n_star": report.median_uniform_loss_at_n_star,
        "arm_data_seeds": [a.data_seed for a in report.zipf_arms],
    }
    _write(out, "report.json", _dump_json(summary), result.files)
    return result


def _run_landscape(config: dict, out: Path) -> RunResult:
    result = RunResult("landscape", out)
    d, k, seed = config["d"], config["k"], config["seed"]
    wstar = _make_wstar(d, seed, 0, "rademacher")
    w0 = config["r"] * make_rng(seed, "init", 0).standard_normal(d)
    ident = identity_ordering(d)
    arms = {
        "uniform": SkillDistribution("uniform", d, uniform_weights(d), ident),
        "zipf": SkillDistribution(
            "zipf", d, zipf_weights(d, config["alpha"]), ident, alpha=config["alpha"]
        ),
    }
    sidecar: dict = {}
    for name, dist in arms.items():
        p = dist.weights
        log = population_gd_trajectory(
            w0, wstar, p, k, default_step_size(k, p), config["pca_steps"],
            log_every=max(1, config["pca_steps"] // 100),
            checkpoint_every=config["checkpoint_every"],
        )
        ckpts = np.asarray(log.checkpoints)
        lo, hi = config.get("pca_range", [0, len(ckpts)])
        diffs = np.diff(ckpts[lo:hi], axis=0)
        pca = pca_top2(diffs)
        extent = config["extent"]
        res = config["resolution"]
        slc = landscape_slice(w0, pca.dir1, pca.dir2, (extent, extent), (res, res), wstar, p, k)
        slc.trajectory = project_onto_slice(slc, ckpts)
        grid_rows = ([float(a)] + [float(v) for v in slc.grid[i]] for i, a in enumerate(slc.a_coords))
        _write(
            out, f"slice_{name}.csv",
            _csv("landscape-grid-v1", config_hash(config),
                 ["a"] + [_fmt(b) for b in slc.b_coords], grid_rows),
            result.files,
        )
        proj_rows = ([int(s)] + [float(x) for x in ab] for s, ab in zip(log.checkpoint_steps, slc.trajectory))
        _write(
            out, f"projection_{name}.csv",
            _csv("landscape-projection-v1", config_hash(config), ["step", "a", "b"], proj_rows),
            result.files,
        )
        sidecar[name] = {
            "dir1": [float(x) for x in pca.dir1],
            "dir2": [float(x) for x in pca.dir2],
            "explained_variance": list(pca.explained),
            "degenerate": pca.degenerate,
            "extent": extent,
            "resolution": res,
            "max_slope_near_init": max_directional_slope(
                w0, pca.dir1, pca.dir2, config.get("slope_radius", 0.05), wstar, p, k
            ),
        }
    _write(out, "slices.json", _dump_json(sidecar), result.files)
    return result


def _run_probes(config: dict, out: Path) -> RunResult:
    result = RunResult("probes", out)
    dist = dist_from_spec(config["distribution"])
    d, k, seed = config["d"], config["k"], config["seed"]
    p = dist.weights
    wstar = _make_wstar(d, seed, 0, "rademacher")
    w0 = config["r"] * make_rng(seed, "init", 0).standard_normal(d)
    for which in config["which"]:
        if which == "pl":
            log = population_gd_trajectory(
                w0, wstar, p, k, default_step_size(k, p), config.get("steps", 10_000)
            )
            rep = check_pl_inequality(log, p, k)
            payload = {
                "passed": rep.passed,
                "min_ratio": rep.min_ratio,
                "num_checked": rep.num_checked,
                "num_skipped": rep.num_skipped,
            }
        elif which == "stationary":
            rep = check_stationary_points(
                wstar, p, k, config.get("num_probes", 1000), make_rng(seed, "probes", 0)
            )
            payload = {
                "passed": rep.passed,
                "stationary_norms": rep.stationary_norms,
                "min_probe_norm": rep.min_probe_norm,
            }
        elif which == "init-concentration":
            rep = check_init_concentration(
                d, config["r"], p, config.get("num_trials", 10_000), make_rng(seed, "init-conc", 0)
            )
            payload = {
                "passed": rep.passed,
                "median_abs_overlap": rep.median_abs_overlap,
                "overlap_scale_quantiles": rep.overlap_scale_quantiles,
                "norm_dev_quantiles": rep.norm_dev_quantiles,
                "frac_overlap_in_bracket": rep.frac_overlap_in_bracket,
                "frac_norm_dev_ok": rep.frac_norm_dev_ok,
            }
        elif which == "noise":
            rep = estimate_gradient_noise(
                w0, wstar, dist, k,
                config.get("batch_size", 4096), config.get("num_batches", 200),
                make_rng(seed, "noise", 0),
            )
            payload = {
                "batch_size": rep.batch_size,
                "mean_noise_norm": rep.mean_noise_norm,
                "population_grad_norm": rep.population_grad_norm,
                "ratio": rep.ratio,
                "violation_fraction": rep.violation_fraction,
            }
        elif which == "packing":
            pk = config.get("packing", {})
            cfg = PackingConfig(
                d=pk.get("d", d), epsilon=pk.get("epsilon", 0.31),
                num_vectors=pk.get("q", 100), k=pk.get("k", k), seed=seed,
            )
            rep = hypercube_packing(cfg)
            payload = {
                "passed": rep.passed,
                "max_overlap": rep.max_overlap,
                "max_correlation": rep.max_correlation,
                "epsilon": cfg.epsilon,
                "packing_budget": cfg.packing_budget,
            }
        else:  # pragma: no cover - schema forbids
            raise ValueError(f"unknown probe {which}")
        _write(out, f"probe_{which}.json", _dump_json(payload), result.files)
    return result


def _run_gen_data(config: dict, out: Path) -> RunResult:
    result = RunResult("gen-data", out)
    dist = dist_from_spec(config["distribution"])
    seed = config["seed"]
    task = config["task"]
    rng = make_rng(seed, "data", 0)
    if task == "arithmetic":
        lo = config.get("operand_lo", 1)
        records = gen_arithmetic(
            dist, config["n"], rng,
            num_ops=config.get("num_ops", 4),
            operand_range=(lo, lo + dist.d - 1),
        )
    elif task == "state_tracking":
        mixture = config.get("hop_mixture")
        if mixture is not None:
            mixture = {int(h): float(q) for h, q in mixture.items()}
        records = gen_state_tracking(config.get("k", 4), dist, config["n"], rng, hop_mixture=mixture)
    elif task == "multihop_qa":
        graph = gen_relation_graph(
            config.get("num_entities", 50),
            config.get("num_relations", dist.d),
            make_rng(seed, "graph", 0),
            allow_self_loops=config.get("allow_self_loops", True),
        )
        records = gen_multihop_qa(
            graph, config.get("k", 3), dist, config["n"], rng,
            include_facts=config.get("include_facts", False),
            fact_ratio=config.get("fact_ratio", 0.0),
        )
    else:
        num_ops = config.get("num_ops")
        if num_ops is None:
            num_ops = tuple(config.get("num_ops_range", (2, 8)))
        records = gen_gsm(
            dist, config["n"], rng,
            num_ops=num_ops,
            modulus=config.get("modulus"),
            multi_hop_template=config.get("multi_hop_template", False),
        )
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"{task}.jsonl"
    manifest = write_dataset(records, data_path, config, seed)
    result.files[data_path.name] = manifest["sha256"]
    manifest_name = data_path.name + ".manifest.json"
    result.files[manifest_name] = hashlib.sha256((out / manifest_name).read_bytes()).hexdigest()
    return result


def run_experiment(config: dict, out_dir, parallelism: int = 1) -> RunResult:
    """Validate, dispatch, and write the run manifest; returns the result."""
    config = validate_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kind = config["kind"]
    if kind == "minimal-run":
        result = _run_minimal(config, out, parallelism)
    elif kind == "population-run":
        result = _run_population(config, out)
    elif kind == "sweep-alpha":
        result = _run_sweep(config, out, parallelism)
    elif kind == "separation":
        result = _run_separation(config, out)
    elif kind == "landscape":
        result = _run_landscape(config, out)
    elif kind == "probes":
        result = _run_probes(config, out)
    else:
        result = _run_gen_data(config, out)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "kind": kind,
        "config": config,
        "config_hash": config_hash(config),
        "files": dict(sorted(result.files.items())),
        "diverged": result.diverged,
    }
    (out / "manifest.json").write_text(_dump_json(manifest), encoding="utf-8")
    result.files["manifest.json"] = "-"
    return result
