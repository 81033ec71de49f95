"""Reference estimators and problem solvers across the four trust models.

The estimators all reduce to means of +-1 feature values:

* ``empirical_means`` is the noiseless path, computed from integer sums so two
  callers on the same samples produce bit-identical floats;
* ``central_mean_vector`` adds calibrated Laplace noise to the sums;
* ``local_mean_vector`` sends each feature bit through randomized response at
  a per-feature split of the budget and debiases the counts;
* ``shuffle_mean_vector`` does the same through :func:`calibrate_rr`, whose
  flip probability is certified against the shuffled count law itself (exact
  audit for small cohorts, a closed-form amplification rate otherwise);
* ``pan_mean_vector`` releases a noise-initialized, noise-published sum per
  feature, splitting the budget between the two noise draws.

Problem instances (selection, sparse mean estimation, parity release, simple
hypothesis testing, parity learning) share one pipeline: build the +-1 feature
matrix for the instance's candidate set, estimate feature means under the
instance's trust model, and apply a deterministic decision rule. With an
infinite budget every model collapses to ``empirical_means``, so decisions
then agree exactly with the plug-in solver - a property the tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .distributions import (
    ParametricHardDistribution,
    ParityIndex,
    from_descriptor,
    member_descriptor,
    sample as draw_from,
)
from .errors import GuardError, InsufficientCohortError
from .metrics import hockey_stick
from .rng import as_generator, gaussian, laplace, make_generator

EXACT_AUDIT_MAX_N = 12

__all__ = [
    "CalibratedRR",
    "calibrate_rr",
    "rr_count_pmf",
    "empirical_means",
    "central_mean_vector",
    "local_mean_vector",
    "shuffle_mean_vector",
    "pan_mean_vector",
    "pan_noise_parameters",
    "wilson_interval",
    "PROBLEMS",
    "MODELS",
    "ProblemInstance",
    "random_instance",
    "instance_candidates",
    "feature_matrix",
    "decide",
    "score",
    "solve",
    "plug_in_solve",
    "selection_success_fast",
    "ThresholdSearchResult",
    "find_selection_threshold",
    "advanced_split",
    "private_feature_means",
]


# ---------------------------------------------------------------------------
# randomized-response calibration


def rr_count_pmf(n_ones: int, n_zeros: int, flip_p: float) -> np.ndarray:
    """Law of the 1-count after per-user flips: Bin(n1, 1-p) + Bin(n0, p)."""
    a = np.zeros(n_ones + 1)
    for k in range(n_ones + 1):
        a[k] = math.comb(n_ones, k) * (1 - flip_p) ** k * flip_p ** (n_ones - k)
    b = np.zeros(n_zeros + 1)
    for k in range(n_zeros + 1):
        b[k] = math.comb(n_zeros, k) * flip_p**k * (1 - flip_p) ** (n_zeros - k)
    return np.convolve(a, b)


def _rr_audit_delta(n: int, flip_p: float, epsilon: float) -> float:
    """Worst hockey-stick gap over all one-user neighbor pairs, both directions."""
    worst = 0.0
    for k in range(n):
        p = rr_count_pmf(k, n - k, flip_p)
        q = rr_count_pmf(k + 1, n - k - 1, flip_p)
        worst = max(worst, hockey_stick(p, q, epsilon), hockey_stick(q, p, epsilon))
    return worst


@dataclass(frozen=True)
class CalibratedRR:
    """Flip probability plus how it was certified."""

    flip_p: float
    epsilon: float
    delta: float
    n: int
    method: str  # "exact-audit" or "closed-form"

    def audit_delta(self) -> float:
        """Re-audit the shuffled count law at the calibrated flip probability."""
        return _rr_audit_delta(self.n, self.flip_p, self.epsilon)


def calibrate_rr(epsilon: float, delta: float, n: int) -> CalibratedRR:
    """Smallest certifiable randomized-response flip probability for a cohort.

    For cohorts up to ``EXACT_AUDIT_MAX_N`` the flip probability is found by
    bisection against the exact audit of the shuffled 1-count (the returned
    value re-certifies, since the feasible endpoint is kept). Larger cohorts
    use the closed-form amplification rate ``14 ln(4/delta) / (eps^2 (n-1))``,
    which requires ``delta > 0`` and ``epsilon <= 1``; when the resulting rate
    reaches 1/2 the cohort cannot support the target and
    :class:`InsufficientCohortError` is raised.

    With ``delta = 0`` privacy must come from the local report alone, so the
    answer is the pure local level ``1 / (1 + e^eps)`` at any cohort size.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    if delta == 0.0:
        p = 1.0 / (1.0 + math.exp(epsilon))
        return CalibratedRR(flip_p=p, epsilon=epsilon, delta=0.0, n=n, method="closed-form")
    if n <= EXACT_AUDIT_MAX_N:
        lo, hi = 0.0, 0.5
        if _rr_audit_delta(n, hi, epsilon) > delta:
            raise InsufficientCohortError(
                f"n={n} cannot reach ({epsilon}, {delta}) even at flip probability 1/2"
            )
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _rr_audit_delta(n, mid, epsilon) <= delta:
                hi = mid
            else:
                lo = mid
        return CalibratedRR(flip_p=hi, epsilon=epsilon, delta=delta, n=n, method="exact-audit")
    if epsilon > 1.0:
        raise ValueError(
            "closed-form calibration is only valid for epsilon <= 1; "
            f"got {epsilon} (split a larger budget before calibrating)"
        )
    p = 14.0 * math.log(4.0 / delta) / (epsilon * epsilon * (n - 1))
    if p >= 0.5:
        raise InsufficientCohortError(
            f"n={n} too small for ({epsilon}, {delta}): required flip rate {p:.3f} >= 1/2"
        )
    return CalibratedRR(flip_p=p, epsilon=epsilon, delta=delta, n=n, method="closed-form")


# ---------------------------------------------------------------------------
# mean-vector estimators


def _as_sign_matrix(samples) -> np.ndarray:
    x = np.atleast_2d(np.asarray(samples, dtype=np.int64))
    if x.size and not np.isin(x, (-1, 1)).all():
        raise ValueError("samples must be +-1 signs")
    return x


def empirical_means(samples) -> np.ndarray:
    """Exact per-feature means from integer sums (the shared noiseless path)."""
    x = _as_sign_matrix(samples)
    n = x.shape[0]
    if n == 0:
        return np.zeros(x.shape[1])
    ones = ((x + 1) // 2).sum(axis=0)
    return (2 * ones - n) / n


def central_mean_vector(samples, epsilon: float, rng=None) -> np.ndarray:
    """Laplace mechanism on the sign sums; pure, budget split over features."""
    x = _as_sign_matrix(samples)
    if math.isinf(epsilon):
        return empirical_means(x)
    n, d = x.shape
    if n == 0:
        raise ValueError("need at least one sample")
    gen = as_generator(rng)
    scale = 2.0 * d / epsilon
    return (x.sum(axis=0) + laplace(gen, scale, size=d)) / n


def local_mean_vector(samples, epsilon: float, rng=None) -> np.ndarray:
    """Per-user randomized response at a per-feature split of the budget."""
    x = _as_sign_matrix(samples)
    if math.isinf(epsilon):
        return empirical_means(x)
    n, d = x.shape
    if n == 0:
        raise ValueError("need at least one sample")
    gen = as_generator(rng)
    p = 1.0 / (1.0 + math.exp(epsilon / d))
    return _debiased_rr_means(x, p, gen)


def _debiased_rr_means(x: np.ndarray, flip_p: float, gen) -> np.ndarray:
    n = x.shape[0]
    bits = (x + 1) // 2
    flips = gen.random(size=x.shape) < flip_p
    counts = (bits ^ flips).sum(axis=0)
    debiased = (counts - n * flip_p) / (1.0 - 2.0 * flip_p)
    return (2.0 * debiased - n) / n


def advanced_split(epsilon: float, delta: float, d: int) -> tuple[float, float]:
    """Per-feature (epsilon', delta') so that d-fold composition stays within
    (epsilon, delta): epsilon' = epsilon / sqrt(8 d ln(1/delta)), delta' =
    delta / (2 d)."""
    if delta <= 0 or delta >= 1:
        raise ValueError("advanced composition needs delta in (0, 1)")
    eps_i = epsilon / math.sqrt(8.0 * d * math.log(1.0 / delta))
    return eps_i, delta / (2.0 * d)


def shuffle_mean_vector(samples, epsilon: float, delta: float, rng=None) -> np.ndarray:
    """Shuffled randomized response per feature at an advanced-composition split."""
    x = _as_sign_matrix(samples)
    if math.isinf(epsilon):
        return empirical_means(x)
    n, d = x.shape
    if n == 0:
        raise ValueError("need at least one sample")
    gen = as_generator(rng)
    eps_i, delta_i = advanced_split(epsilon, delta, d)
    cal = calibrate_rr(eps_i, delta_i, n)
    return _debiased_rr_means(x, cal.flip_p, gen)


def pan_noise_parameters(epsilon: float, delta: float, d: int) -> tuple[str, float]:
    """Noise kind and per-noising scale for the two accumulator noisings.

    One stream element moves every coordinate of the d-feature sign-sum by at
    most 2, so the L2 sensitivity is 2 sqrt(d) and the L1 sensitivity is 2 d.
    Each of the two noisings (state initialization and release) spends half
    the budget. With delta > 0 each noising is a Gaussian mechanism at
    (epsilon/2, delta/2), sigma = 2 sqrt(d) sqrt(2 ln(2.5/delta)) / (epsilon/2);
    with delta = 0 only Laplace serves, at scale 2 d / (epsilon/2).
    """
    if delta > 0:
        sigma = 2.0 * math.sqrt(d) * math.sqrt(2.0 * math.log(1.25 / (delta / 2.0)))
        return "gaussian", sigma / (epsilon / 2.0)
    return "laplace", 2.0 * d / (epsilon / 2.0)


def pan_mean_vector(samples, epsilon: float, delta: float, rng=None) -> np.ndarray:
    """Noise-initialized accumulator per feature, re-noised at release."""
    x = _as_sign_matrix(samples)
    if math.isinf(epsilon):
        return empirical_means(x)
    n, d = x.shape
    gen = as_generator(rng)
    kind, scale = pan_noise_parameters(epsilon, delta, d)
    draw = gaussian if kind == "gaussian" else laplace
    sums = x.sum(axis=0).astype(np.float64)
    noisy = sums + draw(gen, scale, size=d) + draw(gen, scale, size=d)
    return noisy / max(n, 1)


def wilson_interval(successes: float, n: int, z: float = 2.5758293035489004) -> tuple[float, float]:
    """Wilson score interval; default z is the two-sided 99% normal quantile."""
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# problem instances


PROBLEMS = ("selection", "sparse-mean", "parity-release", "hypothesis-test", "parity-learning")
MODELS = ("central", "local", "shuffle", "pan")


@dataclass(frozen=True)
class ProblemInstance:
    """One solvable task: a truth distribution plus model and budget.

    ``truth`` is a member descriptor dict (or ``{"family": "uniform", ...}``
    for the null); problems constrain its shape (selection and sparse-mean
    and hypothesis-test use width-1 plain members, parity problems use width
    <= k, learning uses the labeled family).
    """

    problem: str
    model: str
    d: int
    k: int
    alpha: float
    n: int
    epsilon: float
    delta: float
    truth: dict

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")

    def truth_distribution(self):
        return from_descriptor(self.truth)

    def sample_data(self, rng) -> np.ndarray:
        return draw_from(self.truth_distribution(), self.n, rng)


def random_instance(rng, problem: str | None = None, model: str | None = None) -> ProblemInstance:
    """A small random instance; used for agreement and smoke tests."""
    gen = as_generator(rng)
    prob = problem or PROBLEMS[gen.integers(len(PROBLEMS))]
    mod = model or MODELS[gen.integers(len(MODELS))]
    d = int(gen.integers(3, 7))
    k = int(gen.integers(1, 3)) if prob in ("parity-release", "parity-learning") else 1
    alpha = float(gen.uniform(0.1, 0.3))
    n = int(gen.integers(40, 200))
    epsilon = float(gen.uniform(0.5, 2.0))
    delta = 1e-6
    family = "labeled" if prob == "parity-learning" else "plain"
    allow_uniform = prob in ("hypothesis-test", "parity-learning")
    if allow_uniform and gen.random() < 0.25:
        truth: dict = {"family": "uniform", "d": d + (1 if family == "labeled" else 0)}
    else:
        if prob == "parity-learning":
            size = int(gen.integers(0, k + 1))
        elif prob in ("parity-release",):
            size = int(gen.integers(1, k + 1))
        else:
            size = 1
        subset = tuple(sorted(gen.choice(np.arange(1, d + 1), size=size, replace=False).tolist()))
        sign = 1 if prob == "selection" else (1 if gen.random() < 0.5 else -1)
        member = ParametricHardDistribution(
            d=d, index=ParityIndex(subset, sign), alpha=alpha, family=family
        )
        truth = member_descriptor(member, k=k)
    return ProblemInstance(
        problem=prob, model=mod, d=d, k=k, alpha=alpha, n=n,
        epsilon=epsilon, delta=delta, truth=truth,
    )


def instance_candidates(inst: ProblemInstance) -> list[tuple[int, ...]]:
    """Candidate subsets whose feature means drive the decision.

    Selection, sparse-mean, and hypothesis-test estimate the d coordinates.
    Parity release scans nonempty subsets of width <= k; parity learning scans
    subsets of width <= k including the empty one, each implicitly paired with
    the label coordinate.
    """
    if inst.problem in ("selection", "sparse-mean", "hypothesis-test"):
        return [(j,) for j in range(1, inst.d + 1)]
    lo = 0 if inst.problem == "parity-learning" else 1
    out = []
    for size in range(lo, inst.k + 1):
        out.extend(combinations(range(1, inst.d + 1), size))
    return out


def feature_matrix(inst: ProblemInstance, samples: np.ndarray) -> np.ndarray:
    """The n x m matrix of +-1 candidate-parity values for the instance."""
    x = _as_sign_matrix(samples)
    with_label = inst.problem == "parity-learning"
    width = inst.d + (1 if with_label else 0)
    if x.shape[1] != width:
        raise ValueError(f"expected sample width {width}, got {x.shape[1]}")
    cols = []
    for subset in instance_candidates(inst):
        idx = [j - 1 for j in subset]
        if with_label:
            idx = idx + [inst.d]
        cols.append(x[:, idx].prod(axis=1) if idx else np.ones(x.shape[0], dtype=np.int64))
    return np.column_stack(cols) if cols else np.empty((x.shape[0], 0), dtype=np.int64)


def private_feature_means(inst: ProblemInstance, features: np.ndarray, rng) -> np.ndarray:
    if math.isinf(inst.epsilon):
        return empirical_means(features)
    if inst.model == "central":
        return central_mean_vector(features, inst.epsilon, rng)
    if inst.model == "local":
        return local_mean_vector(features, inst.epsilon, rng)
    if inst.model == "shuffle":
        return shuffle_mean_vector(features, inst.epsilon, inst.delta, rng)
    return pan_mean_vector(features, inst.epsilon, inst.delta, rng)


def decide(inst: ProblemInstance, means: np.ndarray):
    """Deterministic decision from candidate-mean estimates.

    selection -> 1-based coordinate (argmax of the raw mean, lowest index on
    ties); sparse-mean and parity-release -> the estimate vector itself;
    hypothesis-test -> index into [uniform] + width-1 members in enumeration
    order (nearest candidate mean vector in L2); parity-learning -> (subset,
    sign) with the largest absolute estimate.
    """
    means = np.asarray(means, dtype=np.float64)
    cands = instance_candidates(inst)
    if inst.problem == "selection":
        return int(cands[int(np.argmax(means))][0])
    if inst.problem in ("sparse-mean", "parity-release"):
        return means
    if inst.problem == "hypothesis-test":
        mu = 2.0 * inst.alpha
        candidates = [np.zeros(inst.d)]
        for j in range(1, inst.d + 1):
            for sign in (1, -1):
                vec = np.zeros(inst.d)
                vec[j - 1] = mu * sign
                candidates.append(vec)
        dists = [float(np.sum((means - c) ** 2)) for c in candidates]
        return int(np.argmin(dists))
    best = None
    for i, subset in enumerate(cands):
        est = float(means[i])
        key = (abs(est), subset)
        better = best is None or key[0] > best[0] or (
            key[0] == best[0] and (len(subset), subset) < (len(best[1]), best[1])
        )
        if better:
            best = (abs(est), subset, 1 if est >= 0 else -1)
    assert best is not None
    return (best[1], best[2])


def _truth_member(inst: ProblemInstance) -> ParametricHardDistribution | None:
    if inst.truth.get("family") == "uniform":
        return None
    member = from_descriptor(inst.truth)
    assert isinstance(member, ParametricHardDistribution)
    return member


def score(inst: ProblemInstance, decision) -> bool:
    """Exact success predicate against the instance's truth descriptor."""
    member = _truth_member(inst)
    if inst.problem == "selection":
        assert member is not None and member.index.width == 1 and member.index.sign == 1
        return decision == member.index.subset[0]
    if inst.problem == "sparse-mean":
        true_mu = member.mean_vector() if member is not None else np.zeros(inst.d)
        return float(np.abs(np.asarray(decision) - true_mu).max()) < inst.alpha
    if inst.problem == "parity-release":
        assert member is not None
        truths = np.array(
            [member.parity_mean(s) for s in instance_candidates(inst)], dtype=np.float64
        )
        return float(np.abs(np.asarray(decision) - truths).max()) < inst.alpha
    if inst.problem == "hypothesis-test":
        if member is None:
            return decision == 0
        j = member.index.subset[0]
        truth_idx = 1 + 2 * (j - 1) + (0 if member.index.sign == 1 else 1)
        return decision == truth_idx
    if member is None:
        return True
    return decision == (member.index.subset, member.index.sign)


def solve(inst: ProblemInstance, samples: np.ndarray, rng=None):
    """Estimate candidate means under the instance's model, then decide."""
    features = feature_matrix(inst, samples)
    means = private_feature_means(inst, features, as_generator(rng))
    return decide(inst, means)


def plug_in_solve(inst: ProblemInstance, samples: np.ndarray):
    """Noiseless baseline: exact empirical means, same decision rule."""
    features = feature_matrix(inst, samples)
    return decide(inst, empirical_means(features))


# ---------------------------------------------------------------------------
# fast selection sweeps


def selection_success_fast(
    d: int,
    n: int,
    model: str,
    epsilon: float,
    delta: float,
    alpha: float,
    trials: int,
    rng,
) -> float:
    """Monte Carlo success rate of selection via sufficient statistics.

    The planted coordinate is 1 with mean ``2 alpha``; the others are
    unbiased. Per-coordinate sign sums are drawn as transformed binomials and
    noised exactly as the corresponding estimator would noise them, so the
    argmax law matches the full sample-level pipeline without materializing
    ``n x d`` sign matrices.
    """
    gen = as_generator(rng)
    mu = np.zeros(d)
    mu[0] = 2.0 * alpha
    p_one = (1.0 + mu) / 2.0
    ones = gen.binomial(n, p_one, size=(trials, d))
    if model == "pan":
        kind, scale = pan_noise_parameters(epsilon, delta, d)
        draw = gaussian if kind == "gaussian" else laplace
        sums = 2.0 * ones - n
        noisy = sums + draw(gen, scale, size=(trials, d)) + draw(
            gen, scale, size=(trials, d)
        )
        picks = np.argmax(noisy, axis=1)
    elif model == "shuffle":
        eps_i, delta_i = advanced_split(epsilon, delta, d)
        cal = calibrate_rr(eps_i, delta_i, n)
        p = cal.flip_p
        counts = gen.binomial(ones, 1.0 - p) + gen.binomial(n - ones, p)
        picks = np.argmax(counts, axis=1)
    elif model == "central":
        scale = 2.0 * d / epsilon
        sums = 2.0 * ones - n
        picks = np.argmax(sums + laplace(gen, scale, size=(trials, d)), axis=1)
    elif model == "local":
        p = 1.0 / (1.0 + math.exp(epsilon / d))
        counts = gen.binomial(ones, 1.0 - p) + gen.binomial(n - ones, p)
        picks = np.argmax(counts, axis=1)
    else:
        raise ValueError(f"unknown model {model!r}")
    return float(np.mean(picks == 0))


@dataclass(frozen=True)
class ThresholdSearchResult:
    d: int
    model: str
    n_star: int
    success_at_n_star: float
    corridor_n: int
    corridor_success: float


def find_selection_threshold(
    d: int,
    model: str,
    epsilon: float,
    delta: float,
    alpha: float,
    target: float = 0.9,
    pilot_trials: int = 300,
    confirm_trials: int = 1000,
    master_seed: int = 0,
    tag: str = "nstar",
    n_start: int = 64,
    corridor_divisor: int = 8,
) -> ThresholdSearchResult:
    """Smallest confirmed sample size where fast selection succeeds at rate target.

    Doubles from ``n_start`` until a pilot clears the target, bisects to about
    1.5% granularity, then confirms with fresh trials, requiring the Wilson
    99% lower bound to clear ``target - 0.03``; on a failed confirmation the
    candidate is bumped by 25% (at most six times). All stages draw from
    streams derived via (master_seed, tag, model, d, stage, n), so the search
    is reproducible regardless of call order.
    """

    def rate(n: int, trials: int, stage: str) -> float:
        gen = make_generator(master_seed, tag, model, d, stage, n)
        return selection_success_fast(d, n, model, epsilon, delta, alpha, trials, gen)

    n = n_start
    for _ in range(24):
        if rate(n, pilot_trials, "pilot") >= target:
            break
        n *= 2
    else:
        raise GuardError(f"selection at d={d} did not reach {target} by n={n}")
    lo, hi = n // 2, n
    while hi - lo > max(1, hi // 64):
        mid = (lo + hi) // 2
        if rate(mid, pilot_trials, "pilot") >= target:
            hi = mid
        else:
            lo = mid
    candidate = hi
    for _ in range(6):
        confirmed = rate(candidate, confirm_trials, "confirm")
        lo_w, _ = wilson_interval(confirmed * confirm_trials, confirm_trials)
        if lo_w >= target - 0.03:
            corridor_n = max(1, candidate // corridor_divisor)
            corr = rate(corridor_n, confirm_trials, "corridor")
            return ThresholdSearchResult(
                d=d, model=model, n_star=candidate, success_at_n_star=confirmed,
                corridor_n=corridor_n, corridor_success=corr,
            )
        candidate = int(math.ceil(candidate * 1.25))
    raise GuardError(f"confirmation failed for selection at d={d}")
