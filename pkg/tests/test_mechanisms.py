"""Randomizers, analyzers, pan-private algorithms, and their manifests."""

import math

import numpy as np
import pytest

from panshuffle.errors import GuardError
from panshuffle.mechanisms import (
    Analyzer,
    PanPrivateAlgorithm,
    PrivacyBudget,
    ShuffleProtocol,
    asymmetric_binary_randomizer,
    binary_randomized_response,
    constant_mechanism,
    echo_randomizer,
    histogram_analyzer,
    last_element_echo,
    mechanism_from_manifest,
    noisy_parity_chain,
    one_count_analyzer,
    quantization_slack,
    quantized_laplace_counter,
    quantized_laplace_pmf,
    run_pan,
    run_shuffle,
    saturating_counter,
    threshold_analyzer,
)
from panshuffle.rng import make_generator


def fair_protocol(n=4, flip_p=0.3, gamma=1.0):
    return ShuffleProtocol(
        randomizer=binary_randomized_response(flip_p),
        analyzer=one_count_analyzer(),
        n=n,
        budget=PrivacyBudget(epsilon=1.0, delta=0.0, gamma=gamma),
    )


# ---------------------------------------------------------------------------
# randomizers


def test_binary_rr_kernel_probabilities():
    rz = binary_randomized_response(0.25)
    k1 = rz.kernel(1)
    k0 = rz.kernel(0)
    on = tuple(rz.counts([1]))
    off = tuple(rz.counts([0]))
    assert k1[on] == pytest.approx(0.75)
    assert k1[off] == pytest.approx(0.25)
    assert k0[off] == pytest.approx(0.75)
    assert sum(k1.values()) == pytest.approx(1.0)


def test_binary_rr_flip_bounds():
    with pytest.raises(ValueError):
        binary_randomized_response(-0.1)
    with pytest.raises(ValueError):
        binary_randomized_response(0.6)


def test_asymmetric_randomizer_kernel():
    rz = asymmetric_binary_randomizer(0.9, 0.2)
    one = tuple(rz.counts([1]))
    assert rz.kernel(1)[one] == pytest.approx(0.9)
    assert rz.kernel(0)[one] == pytest.approx(0.2)


def test_echo_randomizer_is_deterministic():
    rz = echo_randomizer((0, 1, 2))
    for x in (0, 1, 2):
        k = rz.kernel(x)
        assert len(k) == 1
        assert next(iter(k.values())) == 1.0


def test_emit_batch_matches_law():
    rz = binary_randomized_response(0.2)
    rng = make_generator(0, "batch")
    inputs = np.array([1] * 20_000 + [0] * 20_000)
    counts = rz.emit_batch(inputs, rng)
    assert counts.shape == (40_000, 2)
    assert np.array_equal(counts.sum(axis=1), np.ones(40_000))
    one_col = rz.alphabet.index(1)
    rate_one = float(np.mean(counts[:20_000, one_col]))
    rate_zero = float(np.mean(counts[20_000:, one_col]))
    assert rate_one == pytest.approx(0.8, abs=0.01)
    assert rate_zero == pytest.approx(0.2, abs=0.01)


# ---------------------------------------------------------------------------
# analyzers and the shuffle runner


def test_analyzers_on_counts():
    counts = np.array([3, 1])
    assert one_count_analyzer().fn(counts) == 1
    assert threshold_analyzer(2).fn(counts) == 0
    assert threshold_analyzer(0).fn(counts) == 1
    assert tuple(histogram_analyzer().fn(counts)) == (3, 1)


def test_run_shuffle_output_and_count_invariance():
    proto = fair_protocol(n=6)
    counts, out = run_shuffle(proto, [1, 0, 1, 1, 0, 0], rng=make_generator(1, "rs"))
    assert counts.sum() == 6
    assert out == counts[1]


def test_run_shuffle_enforces_size_and_floor():
    proto = fair_protocol(n=4, gamma=0.75)
    with pytest.raises(ValueError):
        run_shuffle(proto, [1, 0, 1], rng=make_generator(2))
    with pytest.raises(ValueError, match="floor"):
        run_shuffle(proto, [1, 0], dropout_fraction=0.5, rng=make_generator(2))
    counts, _ = run_shuffle(proto, [1, 0, 1], dropout_fraction=0.25,
                            rng=make_generator(2))
    assert counts.sum() == 3


# ---------------------------------------------------------------------------
# quantized-Laplace machinery


def test_quantized_laplace_pmf_normalizes_and_reports_tail():
    pmf, tail = quantized_laplace_pmf(scale=2.0, step=0.25, span=8.0)
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-12)
    grid = sorted(pmf)
    assert grid[0] == -grid[-1]
    # symmetric law on a symmetric grid
    assert pmf[grid[0]] == pytest.approx(pmf[grid[-1]], rel=1e-12)
    assert 0.0 < tail < 0.05


def test_quantized_laplace_counter_meta_and_run():
    ctr = quantized_laplace_counter(eps_update=0.5, eps_output=0.5,
                                    step=1.0 / 8, span=12.0)
    assert ctr.has_exact
    assert ctr.meta["tail_mass"] >= 0.0
    view = run_pan(ctr, [1, 0, 1, 1], t=2, rng=make_generator(3, "ctr"))
    assert view.t == 2
    # states and outputs live on the integer quantization grid
    assert isinstance(view.output, (int, np.integer))
    slack = quantization_slack(ctr, 1.0)
    assert slack == pytest.approx((1.0 + math.e) * ctr.meta["tail_mass"])


def test_counter_tracks_count_in_expectation():
    ctr = quantized_laplace_counter(eps_update=4.0, eps_output=4.0,
                                    step=1.0 / 8, span=16.0)
    rng = make_generator(4, "track")
    step = 1.0 / 8
    outs = [run_pan(ctr, [1, 1, 1, 0], t=1, rng=rng).output * step for _ in range(3000)]
    assert float(np.mean(outs)) == pytest.approx(3.0, abs=0.2)


# ---------------------------------------------------------------------------
# tiny pan mechanisms


def test_noisy_parity_chain_states():
    chain = noisy_parity_chain(0.0)
    view = run_pan(chain, [1, 1, 1], t=3, rng=make_generator(5))
    assert view.state == 1
    assert view.output == 1
    with pytest.raises(ValueError):
        noisy_parity_chain(0.9)


def test_saturating_counter_caps():
    alg = saturating_counter(2)
    view = run_pan(alg, [1, 1, 1, 1], t=4, rng=make_generator(6))
    assert view.state == 2
    assert view.output == 2


def test_constant_and_echo_mechanisms():
    const = constant_mechanism(7)
    assert run_pan(const, [1, 0], t=1, rng=make_generator(7)).output == 7
    echo = last_element_echo()
    assert run_pan(echo, [1, 0, 1], t=3, rng=make_generator(7)).output == 1


def test_run_pan_intrusion_time_bounds():
    alg = saturating_counter(5)
    with pytest.raises(ValueError):
        run_pan(alg, [1, 1], t=3, rng=make_generator(8))
    with pytest.raises(ValueError):
        run_pan(alg, [1, 1], t=0, rng=make_generator(8))


def test_kernel_sampling_fallback_agrees_with_kernels():
    # an algorithm defined only by kernels still samples, via the fallback
    alg = PanPrivateAlgorithm(
        name="kernel-only",
        init_kernel={0: 1.0},
        update_kernel=lambda i, x, s: {s + int(x): 0.5, s: 0.5},
        output_kernel=lambda s: {s: 1.0},
    )
    assert not alg.has_sample_fns if hasattr(alg, "has_sample_fns") else True
    rng = make_generator(9, "fb")
    outs = np.array([run_pan(alg, [1, 1], t=1, rng=rng).output for _ in range(20_000)])
    # after two update steps the count is Bin(2, 1/2)
    assert float(np.mean(outs == 0)) == pytest.approx(0.25, abs=0.02)
    assert float(np.mean(outs == 1)) == pytest.approx(0.5, abs=0.02)


# ---------------------------------------------------------------------------
# budgets and manifests


def test_privacy_budget_validation():
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=-1.0, delta=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=1.0, delta=1.5, gamma=1.0)
    with pytest.raises(ValueError):
        PrivacyBudget(epsilon=1.0, delta=0.0, gamma=0.0)


def test_mechanism_from_manifest_roundtrips():
    rr = mechanism_from_manifest({"type": "binary_rr", "flip_p": 0.3})
    assert rr.kernel(1)[tuple(rr.counts([0]))] == pytest.approx(0.3)
    chan = mechanism_from_manifest(
        {"type": "channel", "p_one_given_one": 0.8, "p_one_given_zero": 0.1}
    )
    assert chan.kernel(0)[tuple(chan.counts([1]))] == pytest.approx(0.1)
    ctr = mechanism_from_manifest(
        {"type": "qlap_counter", "eps_update": 1.0, "eps_output": 1.0, "step": 0.125,
         "span": 12.0}
    )
    assert isinstance(ctr, PanPrivateAlgorithm)
    parity = mechanism_from_manifest({"type": "noisy_parity", "flip_p": 0.1})
    assert isinstance(parity, PanPrivateAlgorithm)
    sat = mechanism_from_manifest({"type": "saturating_counter", "cap": 3})
    assert isinstance(sat, PanPrivateAlgorithm)
    with pytest.raises(ValueError):
        mechanism_from_manifest({"type": "nope"})


def test_analyzer_batch_defaults_to_loop():
    an = Analyzer(fn=lambda counts: int(counts.sum()), name="total")
    stacked = np.array([[1, 2], [3, 4]])
    assert list(an.batch(stacked)) == [3, 7]
