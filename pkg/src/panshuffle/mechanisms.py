"""Trust-model primitives: local randomizers, shuffled protocols, online algorithms.

A shuffled protocol is (randomizer, analyzer, n): each user feeds one input to
the randomizer, the resulting messages are shuffled, and the analyzer reads the
anonymized pool. Shuffling is represented canonically by the multiset of
messages, stored as a count vector over the randomizer's finite alphabet; any
analyzer defined on counts is permutation-invariant by construction.

An online algorithm consumes a stream through per-step state updates over a
declared state space and ends with an output map. The adversary model grants
one look at an internal state plus the final output (:func:`run_pan` returns
exactly that view). Mechanisms that should support exact distribution
propagation and audits expose probability kernels (dicts mapping outcome to
probability); sampling falls back to the kernels when no sampler is given.

States, messages, and outputs must be hashable; exact kernels keep everything
in rational-free float arithmetic over explicit dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .errors import GuardError
from .rng import as_generator, laplace

__all__ = [
    "PrivacyBudget",
    "Randomizer",
    "Analyzer",
    "ShuffleProtocol",
    "PanPrivateAlgorithm",
    "AdversaryView",
    "run_shuffle",
    "run_pan",
    "binary_randomized_response",
    "asymmetric_binary_randomizer",
    "echo_randomizer",
    "one_count_analyzer",
    "threshold_analyzer",
    "histogram_analyzer",
    "quantized_laplace_pmf",
    "quantized_laplace_counter",
    "quantization_slack",
    "noisy_parity_chain",
    "saturating_counter",
    "constant_mechanism",
    "last_element_echo",
    "mechanism_from_manifest",
]


@dataclass(frozen=True)
class PrivacyBudget:
    """(epsilon, delta) target plus the participation floor gamma for drop-outs.

    gamma is the smallest fraction of the declared cohort that must remain for
    the guarantee to be claimed; gamma = 1 tolerates no drop-out.
    """

    epsilon: float
    delta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0 or not 0.0 <= self.delta < 1.0 or not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"invalid budget {self}")


@dataclass(frozen=True)
class Randomizer:
    """Per-user message sampler over a finite alphabet.

    ``emit_fn(x, rng)`` returns the user's messages (a tuple). ``kernel_fn(x)``,
    when present, gives the exact distribution of the count vector the user
    contributes, as ``{counts_tuple: prob}`` aligned with ``alphabet``.
    ``batch_fn(xs, rng)``, when present, vectorizes emission for an input array
    and returns an ``(len(xs), len(alphabet))`` count matrix; it must agree in
    distribution with per-call emission (tests enforce this for the built-ins).
    """

    alphabet: tuple
    emit_fn: Callable[[Any, np.random.Generator], tuple]
    kernel_fn: Callable[[Any], dict] | None = None
    batch_fn: Callable[[np.ndarray, np.random.Generator], np.ndarray] | None = None
    name: str = "randomizer"

    def emit(self, x, rng) -> tuple:
        msgs = self.emit_fn(x, as_generator(rng))
        for m in msgs:
            if m not in self.alphabet:
                raise ValueError(f"message {m!r} outside alphabet {self.alphabet}")
        return msgs

    def counts(self, msgs: Sequence) -> np.ndarray:
        vec = np.zeros(len(self.alphabet), dtype=np.int64)
        lookup = {m: i for i, m in enumerate(self.alphabet)}
        for m in msgs:
            vec[lookup[m]] += 1
        return vec

    def kernel(self, x) -> dict:
        if self.kernel_fn is None:
            raise ValueError(f"{self.name} has no exact kernel")
        return self.kernel_fn(x)

    def emit_batch(self, xs: np.ndarray, rng) -> np.ndarray:
        gen = as_generator(rng)
        if self.batch_fn is not None:
            return self.batch_fn(np.asarray(xs), gen)
        out = np.zeros((len(xs), len(self.alphabet)), dtype=np.int64)
        for i, x in enumerate(xs):
            out[i] = self.counts(self.emit(x, gen))
        return out


@dataclass(frozen=True)
class Analyzer:
    """Deterministic read-out of the shuffled count vector."""

    fn: Callable[[np.ndarray], Hashable]
    batch_fn: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "analyzer"

    def __call__(self, counts: np.ndarray) -> Hashable:
        return self.fn(np.asarray(counts))

    def batch(self, count_matrix: np.ndarray) -> np.ndarray:
        if self.batch_fn is not None:
            return self.batch_fn(np.asarray(count_matrix))
        return np.array([self.fn(row) for row in np.asarray(count_matrix)])


@dataclass(frozen=True)
class ShuffleProtocol:
    randomizer: Randomizer
    analyzer: Analyzer
    n: int
    budget: PrivacyBudget | None = None
    public_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class AdversaryView:
    """What the one-intrusion adversary sees: a state at time t, plus the output."""

    t: int
    state: Hashable
    output: Hashable


def run_shuffle(
    protocol: ShuffleProtocol,
    dataset: Sequence,
    dropout_fraction: float = 0.0,
    rng=None,
) -> tuple[np.ndarray, Hashable]:
    """Execute one shuffled round on an already-reduced dataset.

    The caller removes dropped users beforehand; this checks the surviving
    count matches ``floor((1 - dropout_fraction) * n)`` and, when the protocol
    declares a budget, that participation stays at or above its gamma floor.
    Returns (count vector, analyzer output).
    """
    if not 0.0 <= dropout_fraction < 1.0:
        raise ValueError("dropout_fraction must be in [0, 1)")
    expected = math.floor((1.0 - dropout_fraction) * protocol.n)
    if len(dataset) != expected:
        raise ValueError(
            f"dataset has {len(dataset)} users, expected {expected} "
            f"(n={protocol.n}, dropout={dropout_fraction})"
        )
    if protocol.budget is not None and (1.0 - dropout_fraction) < protocol.budget.gamma - 1e-12:
        raise ValueError(
            f"participation {1 - dropout_fraction} below declared floor {protocol.budget.gamma}"
        )
    gen = as_generator(rng)
    counts = protocol.randomizer.emit_batch(np.asarray(dataset), gen).sum(axis=0)
    return counts, protocol.analyzer(counts)


@dataclass(frozen=True)
class PanPrivateAlgorithm:
    """Online algorithm as explicit kernels and/or samplers.

    Exact mode requires ``init_kernel`` ({state: prob}), ``update_kernel(i, x,
    state) -> {state: prob}`` (i is the 1-based step), and ``output_kernel
    (state) -> {output: prob}``. Sampling mode uses the ``*_sample`` callables
    and falls back to drawing from the kernels when absent.
    """

    name: str
    init_kernel: dict | None = None
    update_kernel: Callable[[int, Any, Hashable], dict] | None = None
    output_kernel: Callable[[Hashable], dict] | None = None
    init_sample: Callable[[np.random.Generator], Hashable] | None = None
    update_sample: Callable[[int, Any, Hashable, np.random.Generator], Hashable] | None = None
    output_sample: Callable[[Hashable, np.random.Generator], Hashable] | None = None
    meta: dict = field(default_factory=dict)

    @property
    def has_exact(self) -> bool:
        return (
            self.init_kernel is not None
            and self.update_kernel is not None
            and self.output_kernel is not None
        )

    def _draw(self, dist: dict, rng: np.random.Generator):
        outcomes = list(dist.keys())
        probs = np.fromiter(dist.values(), dtype=np.float64, count=len(outcomes))
        idx = rng.choice(len(outcomes), p=probs / probs.sum())
        return outcomes[idx]

    def sample_init(self, rng) -> Hashable:
        gen = as_generator(rng)
        if self.init_sample is not None:
            return self.init_sample(gen)
        if self.init_kernel is None:
            raise ValueError(f"{self.name}: no initial state source")
        return self._draw(self.init_kernel, gen)

    def sample_update(self, i: int, x, state, rng) -> Hashable:
        gen = as_generator(rng)
        if self.update_sample is not None:
            return self.update_sample(i, x, state, gen)
        if self.update_kernel is None:
            raise ValueError(f"{self.name}: no update source")
        return self._draw(self.update_kernel(i, x, state), gen)

    def sample_output(self, state, rng) -> Hashable:
        gen = as_generator(rng)
        if self.output_sample is not None:
            return self.output_sample(state, gen)
        if self.output_kernel is None:
            raise ValueError(f"{self.name}: no output source")
        return self._draw(self.output_kernel(state), gen)


def run_pan(alg: PanPrivateAlgorithm, stream: Sequence, t: int, rng=None) -> AdversaryView:
    """Run the online algorithm, recording the state after element t.

    ``t`` is 1-based and must satisfy 1 <= t <= len(stream); the view pairs the
    recorded state with the final output of the same execution.
    """
    if not 1 <= t <= len(stream):
        raise ValueError(f"intrusion time {t} outside [1, {len(stream)}]")
    gen = as_generator(rng)
    state = alg.sample_init(gen)
    seen = None
    for i, x in enumerate(stream, start=1):
        state = alg.sample_update(i, x, state, gen)
        if i == t:
            seen = state
    return AdversaryView(t=t, state=seen, output=alg.sample_output(state, gen))


# ---------------------------------------------------------------------------
# randomizers and analyzers


def binary_randomized_response(flip_p: float) -> Randomizer:
    """One-bit randomized response: report the input bit, flipped w.p. flip_p."""
    if not 0.0 <= flip_p <= 0.5:
        raise ValueError("flip_p must be in [0, 1/2]")

    def emit(x, rng):
        bit = int(x)
        if bit not in (0, 1):
            raise ValueError(f"input must be a bit, got {x!r}")
        return (bit ^ int(rng.random() < flip_p),)

    def kernel(x):
        bit = int(x)
        if bit not in (0, 1):
            raise ValueError(f"input must be a bit, got {x!r}")
        stay = ((1, 0), (0, 1))[bit]
        move = ((0, 1), (1, 0))[bit]
        if flip_p == 0.0:
            return {stay: 1.0}
        return {stay: 1.0 - flip_p, move: flip_p}

    def batch(xs, rng):
        bits = np.asarray(xs, dtype=np.int64)
        flips = rng.random(bits.shape[0]) < flip_p
        out_bits = bits ^ flips
        counts = np.zeros((bits.shape[0], 2), dtype=np.int64)
        counts[np.arange(bits.shape[0]), out_bits] = 1
        return counts

    return Randomizer(
        alphabet=(0, 1), emit_fn=emit, kernel_fn=kernel, batch_fn=batch,
        name=f"rr(flip={flip_p})",
    )


def asymmetric_binary_randomizer(p_one_given_one: float, p_one_given_zero: float) -> Randomizer:
    """Binary channel randomizer with distinct per-input report probabilities."""
    for p in (p_one_given_one, p_one_given_zero):
        if not 0.0 <= p <= 1.0:
            raise ValueError("probabilities must be in [0, 1]")

    def prob_one(x) -> float:
        bit = int(x)
        if bit not in (0, 1):
            raise ValueError(f"input must be a bit, got {x!r}")
        return p_one_given_one if bit else p_one_given_zero

    def emit(x, rng):
        return (int(rng.random() < prob_one(x)),)

    def kernel(x):
        p = prob_one(x)
        out = {}
        if p < 1.0:
            out[(1, 0)] = 1.0 - p
        if p > 0.0:
            out[(0, 1)] = p
        return out

    def batch(xs, rng):
        bits = np.asarray(xs, dtype=np.int64)
        p = np.where(bits == 1, p_one_given_one, p_one_given_zero)
        ones = (rng.random(bits.shape[0]) < p).astype(np.int64)
        counts = np.zeros((bits.shape[0], 2), dtype=np.int64)
        counts[np.arange(bits.shape[0]), ones] = 1
        return counts

    return Randomizer(
        alphabet=(0, 1), emit_fn=emit, kernel_fn=kernel, batch_fn=batch,
        name=f"channel({p_one_given_zero},{p_one_given_one})",
    )


def echo_randomizer(alphabet: tuple) -> Randomizer:
    """Forward the input unchanged (no privacy; used for worst-case baselines)."""
    lookup = {m: i for i, m in enumerate(alphabet)}

    def emit(x, rng):
        if x not in lookup:
            raise ValueError(f"input {x!r} outside alphabet {alphabet}")
        return (x,)

    def kernel(x):
        vec = [0] * len(alphabet)
        vec[lookup[x]] = 1
        return {tuple(vec): 1.0}

    def batch(xs, rng):
        idx = np.array([lookup[x] for x in np.asarray(xs).tolist()], dtype=np.int64)
        counts = np.zeros((len(idx), len(alphabet)), dtype=np.int64)
        counts[np.arange(len(idx)), idx] = 1
        return counts

    return Randomizer(
        alphabet=alphabet, emit_fn=emit, kernel_fn=kernel, batch_fn=batch, name="echo",
    )


def one_count_analyzer() -> Analyzer:
    """Output the number of 1-messages (binary alphabet)."""
    return Analyzer(
        fn=lambda counts: int(counts[1]),
        batch_fn=lambda mat: mat[:, 1].astype(np.int64),
        name="one-count",
    )


def threshold_analyzer(cutoff: int) -> Analyzer:
    """Output 1 when the 1-message count exceeds ``cutoff`` (binary alphabet)."""
    return Analyzer(
        fn=lambda counts: int(counts[1] > cutoff),
        batch_fn=lambda mat: (mat[:, 1] > cutoff).astype(np.int64),
        name=f"threshold(>{cutoff})",
    )


def histogram_analyzer() -> Analyzer:
    """Output the full count vector (as a tuple)."""
    return Analyzer(
        fn=lambda counts: tuple(int(c) for c in counts),
        name="histogram",
    )


# ---------------------------------------------------------------------------
# online mechanisms


def quantized_laplace_pmf(scale: float, step: float, span: float) -> tuple[dict, float]:
    """Grid pmf of Laplace(0, scale) with the out-of-range tails folded inward.

    States are integer grid indices k meaning the value k*step, for k in
    [-K, K] with K = round(span/step). Each interior cell gets the Laplace mass
    of [k*step - step/2, k*step + step/2); the two end cells absorb their
    tails. Returns (pmf dict, folded tail mass) so callers can account for the
    truncation when quoting audit slack.
    """
    if scale <= 0 or step <= 0 or span <= 0:
        raise ValueError("scale, step, span must be positive")
    K = int(round(span / step))
    ks = np.arange(-K, K + 1)
    upper = (ks + 0.5) * step
    lower = (ks - 0.5) * step

    def cdf(v):
        v = np.asarray(v, dtype=np.float64)
        return np.where(v < 0, 0.5 * np.exp(v / scale), 1.0 - 0.5 * np.exp(-v / scale))

    mass = cdf(upper) - cdf(lower)
    tail = float(cdf(lower[0]) + (1.0 - cdf(upper[-1])))
    mass[0] += cdf(lower[0])
    mass[-1] += 1.0 - cdf(upper[-1])
    pmf = {int(k): float(m) for k, m in zip(ks, mass) if m > 0.0}
    return pmf, tail


def quantized_laplace_counter(
    eps_update: float,
    eps_output: float,
    step: float = 1.0 / 64,
    span: float | None = None,
    sensitivity: float = 1.0,
    value_fn: Callable[[Any], int] | None = None,
    name: str = "qlap-counter",
) -> PanPrivateAlgorithm:
    """Noise-initialized counter over an integer grid, re-noised at output.

    The state starts at quantized Laplace(sensitivity/eps_update) noise, each
    element shifts it by ``value_fn(x)`` (default: 1 for a positive sign or a
    1 bit, else 0), and the output adds independent quantized
    Laplace(sensitivity/eps_output) noise. With the one-look adversary the
    released view is ``max(eps_update, eps_output)``-private up to the folded
    tail mass: the look and the output expose disjoint noise draws. States are
    integer grid indices; ``meta['step']`` converts back to values, and
    ``meta['tail_mass']`` records the total folded tail for slack accounting.

    The default span is ``64 * sensitivity / min(eps_update, eps_output)``,
    keeping the folded tails below exp(-64).
    """
    if 1.0 / step != round(1.0 / step):
        raise ValueError("step must divide 1 so integer increments stay on the grid")
    if span is None:
        span = 64.0 * sensitivity / min(eps_update, eps_output)
    per_unit = int(round(1.0 / step))
    init_pmf, tail_init = quantized_laplace_pmf(sensitivity / eps_update, step, span)
    out_pmf, tail_out = quantized_laplace_pmf(sensitivity / eps_output, step, span)

    if value_fn is None:
        def value_fn(x):
            if isinstance(x, tuple):
                return sum(1 for v in x if v == 1)
            return 1 if int(x) == 1 else 0

    def update_kernel(i, x, s):
        return {s + value_fn(x) * per_unit: 1.0}

    def output_kernel(s):
        return {s + j: p for j, p in out_pmf.items()}

    def update_sample(i, x, s, rng):
        return s + value_fn(x) * per_unit

    return PanPrivateAlgorithm(
        name=name,
        init_kernel=dict(init_pmf),
        update_kernel=update_kernel,
        output_kernel=output_kernel,
        update_sample=update_sample,
        meta={
            "step": step,
            "span": span,
            "eps_update": eps_update,
            "eps_output": eps_output,
            "tail_mass": tail_init + tail_out,
        },
    )


def quantization_slack(alg: PanPrivateAlgorithm, eps: float) -> float:
    """Audit slack (1 + e^eps) * folded-tail-mass for a quantized mechanism."""
    tail = float(alg.meta.get("tail_mass", 0.0))
    return (1.0 + math.exp(eps)) * tail


def noisy_parity_chain(flip_p: float, name: str = "noisy-parity") -> PanPrivateAlgorithm:
    """Binary state tracking the running parity of 1-values, flipped w.p. flip_p."""
    if not 0.0 <= flip_p <= 0.5:
        raise ValueError("flip_p must be in [0, 1/2]")

    def bit(x):
        if isinstance(x, tuple):
            return sum(1 for v in x if v == 1) & 1
        return 1 if int(x) == 1 else 0

    def update_kernel(i, x, s):
        nxt = s ^ bit(x)
        if flip_p == 0.0:
            return {nxt: 1.0}
        return {nxt: 1.0 - flip_p, nxt ^ 1: flip_p}

    return PanPrivateAlgorithm(
        name=name,
        init_kernel={0: 1.0},
        update_kernel=update_kernel,
        output_kernel=lambda s: {s: 1.0},
    )


def saturating_counter(cap: int, name: str = "saturating-counter") -> PanPrivateAlgorithm:
    """Deterministic count of 1-values, capped at ``cap`` (not private; for tests)."""

    def bit(x):
        if isinstance(x, tuple):
            return sum(1 for v in x if v == 1)
        return 1 if int(x) == 1 else 0

    return PanPrivateAlgorithm(
        name=name,
        init_kernel={0: 1.0},
        update_kernel=lambda i, x, s: {min(s + bit(x), cap): 1.0},
        output_kernel=lambda s: {s: 1.0},
    )


def constant_mechanism(value: Hashable = 0, name: str = "constant") -> PanPrivateAlgorithm:
    return PanPrivateAlgorithm(
        name=name,
        init_kernel={0: 1.0},
        update_kernel=lambda i, x, s: {0: 1.0},
        output_kernel=lambda s: {value: 1.0},
    )


def last_element_echo(name: str = "last-echo") -> PanPrivateAlgorithm:
    """State = most recent element (maximally leaky; certificate stress case)."""
    return PanPrivateAlgorithm(
        name=name,
        init_kernel={None: 1.0},
        update_kernel=lambda i, x, s: {x: 1.0},
        output_kernel=lambda s: {s: 1.0},
    )


def mechanism_from_manifest(manifest: dict):
    """Build a mechanism from a JSON-able manifest {"type": ..., params...}.

    Supported types: ``binary_rr`` (flip_p), ``channel`` (p_one_given_one,
    p_one_given_zero), ``echo`` (alphabet), ``qlap_counter`` (eps_update,
    eps_output, step, span, sensitivity), ``noisy_parity`` (flip_p),
    ``saturating_counter`` (cap).
    """
    kind = manifest.get("type")
    params = {k: v for k, v in manifest.items() if k != "type"}
    builders = {
        "binary_rr": lambda: binary_randomized_response(float(params["flip_p"])),
        "channel": lambda: asymmetric_binary_randomizer(
            float(params["p_one_given_one"]), float(params["p_one_given_zero"])
        ),
        "echo": lambda: echo_randomizer(tuple(params.get("alphabet", (0, 1)))),
        "qlap_counter": lambda: quantized_laplace_counter(
            eps_update=float(params["eps_update"]),
            eps_output=float(params["eps_output"]),
            step=float(params.get("step", 1.0 / 64)),
            span=(float(params["span"]) if "span" in params else None),
            sensitivity=float(params.get("sensitivity", 1.0)),
        ),
        "noisy_parity": lambda: noisy_parity_chain(float(params["flip_p"])),
        "saturating_counter": lambda: saturating_counter(int(params["cap"])),
    }
    if kind not in builders:
        raise ValueError(f"unknown mechanism type {kind!r}")
    return builders[kind]()
