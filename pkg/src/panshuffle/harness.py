"""Experiment runner with reproducible, byte-stable outputs.

An :class:`ExperimentSpec` names a registered experiment kind, its parameters,
a trial count, and a master seed. :func:`run_spec` executes it and writes two
files into the output directory:

* ``<experiment_id>.csv`` - the data rows. Every float is serialized with
  ``repr`` (shortest round-trip form), rows are emitted in a canonical order,
  and each trial draws from a stream derived only from (master seed, kind,
  experiment id, trial index). Reruns of the same spec therefore produce
  byte-identical CSVs at any worker count.
* ``<experiment_id>.manifest.json`` - the spec echo, a hash of the canonical
  spec encoding, package and library versions, and wall time. The manifest is
  bookkeeping, not data: it is excluded from byte-identity claims.

Registered kinds: ``mean_error``, ``audit``, ``norm``, ``distinguish``,
``wrapper_gap``, ``selection_sweep``.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from .baselines import (
    ProblemInstance,
    feature_matrix,
    find_selection_threshold,
    instance_candidates,
    private_feature_means,
)
from .distributions import (
    ParametricHardDistribution,
    ParityIndex,
    densify,
    family_enumerate,
    from_descriptor,
)
from .errors import GuardError
from .mechanisms import (
    PrivacyBudget,
    ShuffleProtocol,
    histogram_analyzer,
    mechanism_from_manifest,
    threshold_analyzer,
)
from .metrics import infty_to_2_norm_bruteforce, parity_family_norm_bound_sq
from .reductions import (
    LearnerDistinguisher,
    PlantedLearner,
    PlugInParityLearner,
    ShuffleToPanWrapper,
    threshold_distinguisher,
    wrapper_escape_mass,
)
from . import exact as ex
from .rng import make_generator

__all__ = [
    "ExperimentSpec",
    "RunResult",
    "run_spec",
    "fit_scaling",
    "ScalingFit",
    "write_rows_csv",
    "EXPERIMENT_KINDS",
]


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    experiment_id: str
    params: dict = field(default_factory=dict)
    trials: int = 1
    master_seed: int = 0
    workers: int = 1

    def canonical_json(self) -> str:
        payload = {
            "kind": self.kind,
            "experiment_id": self.experiment_id,
            "params": self.params,
            "trials": self.trials,
            "master_seed": self.master_seed,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunResult:
    csv_path: Path
    manifest_path: Path
    summary: dict


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    """Write rows with repr-serialized floats and unix newlines."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _trial_rng(spec: ExperimentSpec, trial: int) -> np.random.Generator:
    return make_generator(spec.master_seed, spec.kind, spec.experiment_id, trial)


def _pmap(fn, spec: ExperimentSpec, indices: list[int]) -> list:
    """Run fn(spec, i) over indices, optionally in worker processes.

    Results are reassembled by index, so the output never depends on worker
    scheduling.
    """
    if spec.workers <= 1:
        return [fn(spec, i) for i in indices]
    results: dict[int, object] = {}
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        for i, value in zip(indices, pool.map(fn, [spec] * len(indices), indices, chunksize=8)):
            results[i] = value
    return [results[i] for i in indices]


# ---------------------------------------------------------------------------
# experiment kinds


def _mean_error_trial(spec: ExperimentSpec, trial: int) -> tuple:
    p = spec.params
    rng = _trial_rng(spec, trial)
    inst = ProblemInstance(
        problem=p.get("problem", "sparse-mean"),
        model=p["model"],
        d=int(p["d"]),
        k=int(p.get("k", 1)),
        alpha=float(p["alpha"]),
        n=int(p["n"]),
        epsilon=float(p["epsilon"]),
        delta=float(p.get("delta", 1e-6)),
        truth=p["truth"],
    )
    samples = inst.sample_data(rng)
    member = from_descriptor(inst.truth)
    features = feature_matrix(inst, samples)
    means = private_feature_means(inst, features, rng)
    if isinstance(member, ParametricHardDistribution):
        with_label = inst.problem == "parity-learning"
        true_means = np.array(
            [
                member.parity_mean(s + (inst.d + 1,) if with_label else s)
                for s in instance_candidates(inst)
            ]
        )
    else:
        true_means = np.zeros(means.shape)
    err = float(np.abs(means - true_means).max())
    return (trial, err)


def _run_mean_error(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    rows = _pmap(_mean_error_trial, spec, list(range(spec.trials)))
    rows.sort(key=lambda r: r[0])
    errs = np.array([r[1] for r in rows])
    summary = {
        "mean_err": float(errs.mean()),
        "median_err": float(np.median(errs)),
        "max_err": float(errs.max()),
    }
    return ["trial", "err_linf"], rows, summary


def _run_audit(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    p = spec.params
    mech = mechanism_from_manifest(p["mechanism"])
    stream_a = [tuple(x) if isinstance(x, list) else x for x in p["stream_a"]]
    stream_b = [tuple(x) if isinstance(x, list) else x for x in p["stream_b"]]
    eps_grid = [float(e) for e in p["eps_grid"]]
    times = p.get("intrusion_times")
    curve = ex.audit_privacy(
        mech, (stream_a, stream_b), eps_grid,
        intrusion_times=[int(t) for t in times] if times else None,
    )
    rows = [
        (float(e), float(f), float(b), float(m))
        for e, f, b, m in zip(
            curve.epsilons, curve.delta_forward, curve.delta_backward, curve.delta_max
        )
    ]
    summary = {"worst_delta": float(curve.delta_max.max())}
    return ["epsilon", "delta_forward", "delta_backward", "delta_max"], rows, summary


def _run_norm(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    p = spec.params
    d, k, alpha = int(p["d"]), int(p["k"]), float(p["alpha"])
    family = p.get("family", "plain")
    members = [densify(m) for m in family_enumerate(d, k, alpha, family)]
    bound = parity_family_norm_bound_sq(d, k, alpha)
    report = infty_to_2_norm_bruteforce(members, bound_sq=bound)
    rows = [(d, k, alpha, family, report.value_sq, bound, report.value_sq / bound)]
    summary = {
        "value_sq": report.value_sq,
        "bound_sq": bound,
        "tight": bool(abs(report.value_sq - bound) < 1e-9),
    }
    return ["d", "k", "alpha", "family", "value_sq", "bound_sq", "ratio"], rows, summary


def _run_distinguish(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    p = spec.params
    d = int(p["d"])
    alpha = float(p["alpha"])
    planted = ParityIndex(tuple(p.get("planted_subset", [1])), int(p.get("planted_sign", 1)))
    if p.get("learner", "planted") == "plugin":
        learner = PlugInParityLearner(d=d, k=int(p.get("k", 1)))
    else:
        learner = PlantedLearner(index=planted)
    dist = LearnerDistinguisher(
        learner=learner,
        d=d,
        alpha=alpha,
        epsilon=float(p["epsilon"]),
        n_learn=int(p.get("n_learn", 0)),
        test_phase_scale=float(p.get("test_phase_scale", 24.0)),
    )
    rng = _trial_rng(spec, 0)
    z_p = dist.run_batch(planted, spec.trials, rng)
    z_u = dist.run_batch(None, spec.trials, rng)
    report = threshold_distinguisher(z_p, z_u, min_samples=min(spec.trials, 10_000))
    rows = [(report.tau, report.advantage, report.ci_low, report.ci_high)]
    summary = report.to_json() | {"test_len": dist.test_len}
    return ["tau", "advantage", "ci_low", "ci_high"], rows, summary


def _run_wrapper_gap(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    p = spec.params
    n = int(p["n"])
    randomizer = mechanism_from_manifest(p["randomizer"])
    cutoff = p.get("cutoff")
    analyzer = threshold_analyzer(int(cutoff)) if cutoff is not None else histogram_analyzer()
    protocol = ShuffleProtocol(
        randomizer=randomizer, analyzer=analyzer, n=n,
        budget=PrivacyBudget(epsilon=float(p.get("epsilon", 1.0)),
                             delta=float(p.get("delta", 0.0)),
                             gamma=1.0 / 3.0),
    )
    ref = {int(k): float(v) for k, v in p["reference"].items()}
    wrapper = ShuffleToPanWrapper(protocol=protocol, reference=ref)
    null_law = wrapper.exact_output_distribution(ref)
    null_target = ex.exact_output_distribution(protocol, [ref] * n)
    tv_null = ex.tv_dicts(null_law, null_target)
    inp = {int(k): float(v) for k, v in p["input"].items()}
    diluted = {k: 2.0 / 9.0 * inp.get(k, 0.0) + 7.0 / 9.0 * ref.get(k, 0.0)
               for k in set(inp) | set(ref)}
    real_law = wrapper.exact_output_distribution(inp)
    real_target = ex.exact_output_distribution(protocol, [diluted] * n)
    tv_real = ex.tv_dicts(real_law, real_target)
    bound = wrapper_escape_mass(n)
    rows = [(n, tv_null, tv_real, bound)]
    summary = {"tv_null": tv_null, "tv_real": tv_real, "escape_bound": bound}
    return ["n", "tv_null", "tv_real", "escape_bound"], rows, summary


def _run_selection_sweep(spec: ExperimentSpec) -> tuple[list[str], list[tuple], dict]:
    p = spec.params
    dims = [int(d) for d in p["dims"]]
    model = p.get("model", "pan")
    rows = []
    for d in dims:
        res = find_selection_threshold(
            d=d,
            model=model,
            epsilon=float(p.get("epsilon", 1.0)),
            delta=float(p.get("delta", 1e-6)),
            alpha=float(p.get("alpha", 0.2)),
            target=float(p.get("target", 0.9)),
            pilot_trials=int(p.get("pilot_trials", 300)),
            confirm_trials=spec.trials,
            master_seed=spec.master_seed,
            tag=spec.experiment_id,
            corridor_divisor=int(p.get("corridor_divisor", 8)),
        )
        rows.append(
            (d, res.n_star, res.success_at_n_star, res.corridor_n, res.corridor_success)
        )
    fit = fit_scaling([r[0] for r in rows], [r[1] for r in rows])
    summary = {"slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr,
               "model": model}
    return ["d", "n_star", "success", "corridor_n", "corridor_success"], rows, summary


EXPERIMENT_KINDS = {
    "mean_error": _run_mean_error,
    "audit": _run_audit,
    "norm": _run_norm,
    "distinguish": _run_distinguish,
    "wrapper_gap": _run_wrapper_gap,
    "selection_sweep": _run_selection_sweep,
}


def run_spec(spec: ExperimentSpec, out_dir) -> RunResult:
    if spec.kind not in EXPERIMENT_KINDS:
        raise ValueError(f"unknown experiment kind {spec.kind!r}; "
                         f"known: {sorted(EXPERIMENT_KINDS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    header, rows, summary = EXPERIMENT_KINDS[spec.kind](spec)
    wall = time.time() - started
    csv_path = out / f"{spec.experiment_id}.csv"
    write_rows_csv(csv_path, header, rows)
    manifest = {
        "spec": json.loads(spec.canonical_json()),
        "spec_hash": spec.spec_hash(),
        "workers": spec.workers,
        "summary": summary,
        "versions": {
            "package": _pkg_version,
            "numpy": np.__version__,
        },
        "wall_time_s": wall,
    }
    manifest_path = out / f"{spec.experiment_id}.manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunResult(csv_path=csv_path, manifest_path=manifest_path, summary=summary)


# ---------------------------------------------------------------------------
# scaling fits


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through (log2 x, log2 y) with a residual-based slope error."""

    slope: float
    intercept: float
    stderr: float
    n_points: int

    def to_json(self) -> dict:
        return asdict(self)


def fit_scaling(xs, ys) -> ScalingFit:
    """Fit log2(y) = slope * log2(x) + intercept by least squares.

    Needs at least four points; the slope's standard error comes from the
    residual variance, so a clean power law reports a tight band.
    """
    lx = np.log2(np.asarray(xs, dtype=np.float64))
    ly = np.log2(np.asarray(ys, dtype=np.float64))
    m = len(lx)
    if m < 4 or len(ly) != m:
        raise GuardError(f"need >= 4 matched points for a scaling fit, got {m}")
    a = np.vstack([lx, np.ones(m)]).T
    coef, residuals, _, _ = np.linalg.lstsq(a, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - a @ coef
    dof = m - 2
    var = float(resid @ resid) / dof if dof > 0 else 0.0
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    stderr = math.sqrt(var / sxx) if sxx > 0 else math.inf
    return ScalingFit(slope=slope, intercept=intercept, stderr=stderr, n_points=m)
