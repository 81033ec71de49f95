"""Reductions between trust models and between learning and distinguishing.

Three constructions live here:

* :class:`ShuffleToPanWrapper` turns any single-round shuffled protocol whose
  declared guarantee tolerates a one-third participation floor into an online
  algorithm over streams a third the cohort size. The state is seeded with
  shuffled reference messages, a Bin(n, 2/9)-capped prefix of the stream is
  folded in, and the output pads the cohort back up to n messages before
  running the analyzer. On an all-reference stream the output law is exactly
  the protocol's; on iid draws from any other law the gap to the protocol's
  law on the (2/9)-diluted mixture is at most the tail P[Bin(n, 2/9) > n/3].

* :func:`selection_augment` appends a fresh biased sign to each hypercube
  element, converting mean-estimation inputs into labeled-parity inputs.

* :class:`LearnerDistinguisher` runs a parity learner on a prefix, then counts
  label agreements of the learned parity on a test phase behind symmetric
  noise, yielding a scalar whose law separates uniform from planted-parity
  streams. Thresholding that scalar gives the distinguishing advantage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .distributions import ParametricHardDistribution, ParityIndex
from .distributions import sample as draw_from
from .errors import GuardError
from .mechanisms import PanPrivateAlgorithm, ShuffleProtocol
from .rng import as_generator, laplace
from . import exact as ex

__all__ = [
    "ShuffleToPanWrapper",
    "shuffle_to_pan",
    "wrapper_escape_mass",
    "selection_augment",
    "augment_stream",
    "augment_kernel",
    "PlantedLearner",
    "PlugInParityLearner",
    "LearnerDistinguisher",
    "ThresholdReport",
    "threshold_distinguisher",
]


def wrapper_escape_mass(n: int) -> float:
    """P[Bin(n, 2/9) > n/3]: the wrapper's worst-case output-law gap."""
    return float(binom.sf(n // 3, n, 2.0 / 9.0))


@dataclass(frozen=True)
class ShuffleToPanWrapper:
    """Online algorithm simulating a shuffled protocol against one intrusion.

    The wrapped protocol expects cohorts of size ``n`` (divisible by 3) and
    must declare a participation floor no larger than one third. The online
    algorithm consumes a stream of length ``n/3``. Its state is ``(budget,
    counts)``: ``budget`` is how many stream elements contribute their own
    message, drawn once as min(Bin(n, 2/9), n/3), and ``counts`` is the
    message multiset seeded with ``n/3`` shuffled reference draws. Stream
    element i is randomized as itself while ``i <= budget`` and as a fresh
    reference draw afterwards. The output pads with ``n/3`` more reference
    draws, reaching ``n`` messages, and applies the analyzer.

    On a stream of ``n/3`` iid reference draws the output law equals the
    protocol's on ``n`` reference users exactly. On a stream of ``n/3`` iid
    draws from any other law P, the output law is within
    P[Bin(n, 2/9) > n/3] of the protocol's on ``n`` iid draws from the
    diluted mixture (2/9) P + (7/9) reference.
    """

    protocol: ShuffleProtocol
    reference: dict
    name: str = "shuffle-to-pan"

    def __post_init__(self) -> None:
        n = self.protocol.n
        if n % 3 != 0:
            raise ValueError(f"cohort size {n} not divisible by 3")
        budget = self.protocol.budget
        if budget is not None and budget.gamma > 1.0 / 3.0 + 1e-12:
            raise ValueError(
                f"declared participation floor {budget.gamma} exceeds 1/3; "
                "the wrapper only guarantees n/3 real participants"
            )
        total = sum(self.reference.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError("reference distribution must sum to 1")

    @property
    def n(self) -> int:
        """Cohort size the wrapped protocol expects."""
        return self.protocol.n

    @property
    def preload(self) -> int:
        """Reference draws folded into the initial state (= n/3)."""
        return self.n // 3

    @property
    def stream_len(self) -> int:
        """Length of the stream the online algorithm consumes (= n/3)."""
        return self.n // 3

    def _reference_kernel(self) -> dict:
        return ex.randomizer_kernel_for(self.protocol.randomizer, self.reference)

    def budget_distribution(self) -> dict:
        """Law of min(Bin(n, 2/9), n/3) over {0, ..., n/3}."""
        n, cap = self.n, self.preload
        pmf = binom.pmf(np.arange(cap + 1), n, 2.0 / 9.0)
        out = {k: float(pmf[k]) for k in range(cap + 1)}
        out[cap] += float(binom.sf(cap, n, 2.0 / 9.0))
        return out

    # -- exact kernels -----------------------------------------------------

    def init_kernel(self) -> dict:
        kernel = self._reference_kernel()
        width = len(self.protocol.randomizer.alphabet)
        preload_counts = ex.repeat_convolve(kernel, self.preload, width)
        out: dict = {}
        for b, pb in self.budget_distribution().items():
            for counts, pc in preload_counts.items():
                out[(b, counts)] = out.get((b, counts), 0.0) + pb * pc
        return out

    def update_kernel(self, i: int, x, state) -> dict:
        budget, counts = state
        if i <= budget:
            step = self.protocol.randomizer.kernel(x)
        else:
            step = self._reference_kernel()
        out: dict = {}
        for inc, p in step.items():
            key = (budget, tuple(a + b for a, b in zip(counts, inc)))
            out[key] = out.get(key, 0.0) + p
        return out

    def output_kernel(self, state) -> dict:
        _, counts = state
        kernel = self._reference_kernel()
        width = len(self.protocol.randomizer.alphabet)
        pad = ex.repeat_convolve(kernel, self.preload, width)
        out: dict = {}
        for inc, p in pad.items():
            total = tuple(a + b for a, b in zip(counts, inc))
            val = self.protocol.analyzer(np.asarray(total))
            out[val] = out.get(val, 0.0) + p
        return out

    # -- sampling ----------------------------------------------------------

    def _sample_reference(self, size: int, rng) -> list:
        keys = list(self.reference.keys())
        probs = np.array([self.reference[k] for k in keys], dtype=np.float64)
        probs = probs / probs.sum()
        picks = rng.choice(len(keys), size=size, p=probs)
        return [keys[int(i)] for i in picks]

    def sample_budget(self, rng) -> int:
        return int(min(rng.binomial(self.n, 2.0 / 9.0), self.preload))

    def _emit_counts(self, x, rng) -> np.ndarray:
        rz = self.protocol.randomizer
        return rz.counts(rz.emit(x, rng))

    def init_sample(self, rng):
        budget = self.sample_budget(rng)
        counts = np.zeros(len(self.protocol.randomizer.alphabet), dtype=np.int64)
        for x in self._sample_reference(self.preload, rng):
            counts += self._emit_counts(x, rng)
        return (budget, tuple(int(c) for c in counts))

    def update_sample(self, i: int, x, state, rng):
        budget, counts = state
        inp = x if i <= budget else self._sample_reference(1, rng)[0]
        inc = self._emit_counts(inp, rng)
        return (budget, tuple(a + int(b) for a, b in zip(counts, inc)))

    def output_sample(self, state, rng):
        budget, counts = state
        total = np.asarray(counts, dtype=np.int64)
        for x in self._sample_reference(self.preload, rng):
            total += self._emit_counts(x, rng)
        return self.protocol.analyzer(total)

    def as_pan_algorithm(self) -> PanPrivateAlgorithm:
        return PanPrivateAlgorithm(
            name=self.name,
            init_kernel=self.init_kernel(),
            update_kernel=self.update_kernel,
            output_kernel=self.output_kernel,
            init_sample=self.init_sample,
            update_sample=self.update_sample,
            output_sample=self.output_sample,
            meta={"n": self.n, "stream_len": self.stream_len},
        )

    def exact_output_distribution(self, input_dist: dict) -> dict:
        """Exact output law on a stream of ``n/3`` iid draws from ``input_dist``.

        Mixes over the budget: with budget b the final multiset holds b real
        messages and (n - b) reference messages (preload, replacements, pad).
        """
        width = len(self.protocol.randomizer.alphabet)
        real_kernel = ex.randomizer_kernel_for(self.protocol.randomizer, input_dist)
        ref_kernel = self._reference_kernel()
        n, cap = self.n, self.stream_len
        real_parts = [{tuple([0] * width): 1.0}]
        for _ in range(cap):
            real_parts.append(ex.convolve_counts(real_parts[-1], real_kernel))
        # reference part for budget b has n - b draws; walk b downward
        ref_part = ex.repeat_convolve(ref_kernel, n - cap, width)
        budget_law = self.budget_distribution()
        out: dict = {}
        for b in range(cap, -1, -1):
            counts_dist = ex.convolve_counts(real_parts[b], ref_part)
            pb = budget_law[b]
            for counts, pc in counts_dist.items():
                val = self.protocol.analyzer(np.asarray(counts))
                out[val] = out.get(val, 0.0) + pb * pc
            if b > 0:
                ref_part = ex.convolve_counts(ref_part, ref_kernel)
        return out


def shuffle_to_pan(protocol: ShuffleProtocol, reference: dict, name: str | None = None) -> PanPrivateAlgorithm:
    """Wrap a shuffled protocol as an online algorithm (see the wrapper class)."""
    wrapper = ShuffleToPanWrapper(
        protocol=protocol,
        reference=reference,
        name=name or f"{protocol.randomizer.name}-as-pan",
    )
    return wrapper.as_pan_algorithm()


# ---------------------------------------------------------------------------
# stream augmentation


def selection_augment(x: np.ndarray, alpha: float, rng) -> np.ndarray:
    """Append one fresh sign with mean ``alpha`` to each hypercube row."""
    x = np.atleast_2d(np.asarray(x))
    rng = as_generator(rng)
    labels = np.where(rng.random(x.shape[0]) < (1.0 + alpha) / 2.0, 1, -1)
    return np.column_stack([x, labels.astype(x.dtype)])


def augment_stream(stream: Sequence, alpha: float, rng) -> list:
    """Augment a stream of sign tuples; keeps tuples as tuples."""
    rng = as_generator(rng)
    rows = np.array([list(x) for x in stream], dtype=np.int64)
    out = selection_augment(rows, alpha, rng)
    return [tuple(int(v) for v in row) for row in out]


def augment_kernel(x: tuple, alpha: float) -> dict:
    """Exact law of the augmented element given the original: two outcomes."""
    plus = tuple(x) + (1,)
    minus = tuple(x) + (-1,)
    return {plus: (1.0 + alpha) / 2.0, minus: (1.0 - alpha) / 2.0}


# ---------------------------------------------------------------------------
# learners


@dataclass(frozen=True)
class PlantedLearner:
    """Oracle learner that always answers a fixed parity; for law checks."""

    index: ParityIndex

    def fit(self, samples: np.ndarray) -> ParityIndex:
        return self.index


@dataclass(frozen=True)
class PlugInParityLearner:
    """Empirical-correlation learner over all candidate parities up to size k.

    Picks the (subset, sign) whose labeled-parity empirical mean is largest;
    no privacy of its own, used to exercise the reduction end to end.
    """

    d: int
    k: int

    def fit(self, samples: np.ndarray) -> ParityIndex:
        samples = np.atleast_2d(samples)
        if samples.shape[1] != self.d + 1:
            raise ValueError(f"expected width {self.d + 1}, got {samples.shape[1]}")
        labels = samples[:, self.d]
        best: tuple[float, tuple, int] | None = None
        for size in range(0, self.k + 1):
            for subset in combinations(range(1, self.d + 1), size):
                cols = [j - 1 for j in subset]
                par = labels if not cols else labels * np.prod(samples[:, cols], axis=1)
                est = float(par.mean()) if len(par) else 0.0
                score = abs(est)
                better = best is None or score > best[0] or (
                    score == best[0] and (len(subset), subset) < (len(best[1]), best[1])
                )
                if better:
                    best = (score, subset, 1 if est >= 0 else -1)
        assert best is not None
        return ParityIndex(subset=best[1], sign=best[2])


# ---------------------------------------------------------------------------
# learner -> distinguisher


@dataclass(frozen=True)
class LearnerDistinguisher:
    """Distinguish uniform from planted labeled-parity streams via a learner.

    Phase one hands the first ``n`` elements to the learner, which returns a
    parity guess. A noise counter C ~ Lap(1/eps) is drawn once. Phase two
    scores each of the remaining elements +1 when the guessed parity matches
    the label, accumulating into C. The reported scalar is the count plus one
    more Lap(1/eps) draw, so both the running state and the output stay
    noised. Under a planted parity of strength alpha the count concentrates
    around T(1/2 + alpha) against T/2 under uniform; the test length
    T = ceil(scale / (alpha * eps)) makes the separation ~sqrt(scale) combined
    standard deviations wide.
    """

    learner: object
    d: int
    alpha: float
    epsilon: float
    n_learn: int
    test_phase_scale: float = 24.0

    @property
    def test_len(self) -> int:
        return math.ceil(self.test_phase_scale / (self.alpha * self.epsilon))

    @property
    def total_len(self) -> int:
        return self.n_learn + self.test_len

    def _score(self, guess: ParityIndex, rows: np.ndarray) -> int:
        labels = rows[:, self.d]
        cols = [j - 1 for j in guess.subset]
        par = np.ones(len(rows)) if not cols else np.prod(rows[:, cols], axis=1)
        return int(np.sum(guess.sign * par * labels == 1))

    def run(self, stream: Sequence, rng) -> float:
        rng = as_generator(rng)
        rows = np.array([list(x) for x in stream], dtype=np.int64)
        if rows.shape[0] != self.total_len:
            raise ValueError(
                f"stream length {rows.shape[0]} != learn {self.n_learn} + test {self.test_len}"
            )
        guess = self.learner.fit(rows[: self.n_learn])
        c = float(laplace(rng, 1.0 / self.epsilon))
        count = self._score(guess, rows[self.n_learn :])
        return c + count + float(laplace(rng, 1.0 / self.epsilon))

    def run_batch(self, planted: ParityIndex | None, trials: int, rng) -> np.ndarray:
        """Sample the scalar's law directly under a fixed world.

        ``planted=None`` is the uniform world. The learner runs on fresh
        phase-one data each trial; the test-phase agreement count is drawn
        from its exact conditional binomial given the guess, which matches the
        element-by-element run distributionally. A fixed-guess learner skips
        the per-trial fit, so large batches vectorize.
        """
        rng = as_generator(rng)
        t = self.test_len
        if isinstance(self.learner, PlantedLearner):
            p_match = self._match_prob(planted, self.learner.index)
            counts = rng.binomial(t, p_match, size=trials)
            noise = laplace(rng, 1.0 / self.epsilon, size=(trials, 2)).sum(axis=1)
            return counts + noise
        out = np.empty(trials, dtype=np.float64)
        for j in range(trials):
            rows = self._draw_rows(planted, self.n_learn, rng)
            guess = self.learner.fit(rows)
            p_match = self._match_prob(planted, guess)
            count = rng.binomial(t, p_match)
            noise = laplace(rng, 1.0 / self.epsilon, size=2)
            out[j] = count + float(noise.sum())
        return out

    def _draw_rows(self, planted: ParityIndex | None, m: int, rng) -> np.ndarray:
        if planted is not None:
            member = ParametricHardDistribution(
                d=self.d, index=planted, alpha=self.alpha, family="labeled"
            )
            return draw_from(member, m, rng)
        return (rng.integers(0, 2, size=(m, self.d + 1)) * 2 - 1).astype(np.int64)

    def _match_prob(self, planted: ParityIndex | None, guess: ParityIndex) -> float:
        if planted is None:
            return 0.5
        if guess.subset == planted.subset:
            return 0.5 + self.alpha * (1.0 if guess.sign == planted.sign else -1.0)
        return 0.5

    def as_pan_algorithm(self, name: str = "learner-distinguisher") -> PanPrivateAlgorithm:
        """Online form: phase-one buffer, then (guess, noised count) state.

        Exact kernels are not provided (the state space is continuous); the
        sampling path is enough for law comparisons and audits by simulation.
        """
        n_learn, d = self.n_learn, self.d

        def init_sample(rng):
            return ("learn", ())

        def update_sample(i, x, state, rng):
            tag = state[0]
            if tag == "learn":
                buf = state[1] + (tuple(x),)
                if len(buf) < n_learn:
                    return ("learn", buf)
                rows = np.array([list(r) for r in buf], dtype=np.int64)
                guess = self.learner.fit(rows)
                c = float(laplace(rng, 1.0 / self.epsilon))
                return ("test", guess, c)
            _, guess, c = state
            row = np.asarray(x, dtype=np.int64)[None, :]
            return ("test", guess, c + self._score(guess, row))

        def output_sample(state, rng):
            if state[0] != "test":
                raise GuardError("stream ended before the learning phase finished")
            return state[2] + float(laplace(rng, 1.0 / self.epsilon))

        return PanPrivateAlgorithm(
            name=name,
            init_kernel=None,
            update_kernel=None,
            output_kernel=None,
            init_sample=init_sample,
            update_sample=update_sample,
            output_sample=output_sample,
            meta={"n_learn": n_learn, "test_len": self.test_len, "d": d},
        )


@dataclass(frozen=True)
class ThresholdReport:
    """Best single-threshold separation between two scalar samples."""

    tau: float
    advantage: float
    ci_low: float
    ci_high: float

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "advantage": self.advantage,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


def _wilson(successes: float, n: int, z: float = 2.5758293035489004) -> tuple[float, float]:
    """Wilson score interval; default z is the two-sided 99% quantile."""
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def threshold_distinguisher(
    z_planted: np.ndarray, z_uniform: np.ndarray, min_samples: int = 10_000
) -> ThresholdReport:
    """Maximize P[planted > tau] - P[uniform > tau] over candidate thresholds.

    Both sample arrays must hold at least ``min_samples`` points. The interval
    reported is a conservative Wilson-based band on the advantage at the
    chosen threshold.
    """
    zp = np.asarray(z_planted, dtype=np.float64)
    zu = np.asarray(z_uniform, dtype=np.float64)
    if len(zp) < min_samples or len(zu) < min_samples:
        raise GuardError(
            f"need at least {min_samples} samples per world, got {len(zp)} and {len(zu)}"
        )
    pooled = np.concatenate([zp, zu])
    pooled.sort()
    # advantage at tau = F_u(tau) - F_p(tau); scan the pooled empirical grid
    idx_p = np.searchsorted(np.sort(zp), pooled, side="right") / len(zp)
    idx_u = np.searchsorted(np.sort(zu), pooled, side="right") / len(zu)
    gaps = idx_u - idx_p
    best = int(np.argmax(gaps))
    tau = float(pooled[best])
    advantage = float(gaps[best])
    hit_p = float(np.sum(zp > tau))
    hit_u = float(np.sum(zu > tau))
    lo_p, hi_p = _wilson(hit_p, len(zp))
    lo_u, hi_u = _wilson(hit_u, len(zu))
    return ThresholdReport(
        tau=tau,
        advantage=advantage,
        ci_low=lo_p - hi_u,
        ci_high=hi_p - lo_u,
    )
