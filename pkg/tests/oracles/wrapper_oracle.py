"""Closed-form expecteds for the online-wrapper dilution analysis.

The wrapper's escape event is a Bin(n, 2/9) count exceeding n/3, so the exact
escape mass is the upper binomial tail. For the point-mass echo protocol with
a threshold analyzer the end-to-end TV against the diluted product equals this
tail exactly (the wrapper's thresholded count can never exceed n/3, while the
honest run crosses it exactly on the escape event), which makes the echo
protocol a worst case and the frozen tails double as exact TV values.

For a product of Bernoulli(w) inputs pushed through the asymmetric binary
channel P(1|1) = p11, P(1|0) = p10, the shuffled one-count is
Bin(n, w * p11 + (1 - w) * p10): the per-user marginals are iid Bernoulli and
the count is their sum. Tests use this to check the exact propagation engine
against scipy rather than against the engine itself.
"""

from scipy.stats import binom


def escape_tail(n: int) -> float:
    if n % 3 != 0:
        raise ValueError("n must be divisible by 3")
    return float(binom.sf(n // 3, n, 2.0 / 9.0))


def count_pmf(n: int, w: float, p11: float, p10: float, k: int) -> float:
    rate = w * p11 + (1.0 - w) * p10
    return float(binom.pmf(k, n, rate))


# n -> exact escape tail P[Bin(n, 2/9) > n/3].
FROZEN_ESCAPE = {
    6: 0.12804431724311824,
    30: 0.051710883674331624,
    60: 0.016270644751715916,
    120: 0.001831820729272615,
    240: 2.834602687982507e-05,
}
