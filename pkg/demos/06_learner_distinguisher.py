"""Turn any parity learner into a two-world distinguisher with a noised count.

World one streams labeled samples with a planted parity of strength alpha;
world two streams uniform labels. The reduction hands a learning phase to
the learner, then scores T = ceil(scale / (alpha * eps)) test samples
against the learned parity, keeping the running count Laplace-noised in the
state and adding fresh noise at output. Under the planted law the count
concentrates at T(1/2 + alpha), under uniform at T/2, so one threshold on
the reported scalar separates the worlds with constant advantage.
"""

import numpy as np
from scipy import stats

from panshuffle import (
    LearnerDistinguisher,
    ParityIndex,
    PlantedLearner,
    PlugInParityLearner,
    run_pan,
    threshold_distinguisher,
)
from panshuffle.rng import laplace, make_generator

d, alpha, epsilon = 10, 0.2, 1.0
planted = ParityIndex((1,), 1)

# --- the reported scalar follows a pinned-down law -------------------------
# With an oracle learner and no learning phase the score is a Binomial count
# plus two independent Laplace(1/eps) draws. Check that against synthetic
# draws at a short test length.
dist = LearnerDistinguisher(
    learner=PlantedLearner(index=planted), d=d, alpha=alpha, epsilon=epsilon,
    n_learn=0, test_phase_scale=4.0,
)
T = dist.test_len
print(f"scale 4.0 gives test length T = {T}")
rng = make_generator(21, "law-check")
z = dist.run_batch(planted, 30_000, rng)
ref = (
    rng.binomial(T, 0.5 + alpha, size=30_000)
    + laplace(rng, 1 / epsilon, size=30_000)
    + laplace(rng, 1 / epsilon, size=30_000)
)
ks = stats.ks_2samp(z, ref)
print(f"planted world vs Binomial(T, 1/2 + a) + 2 Lap(1/eps): "
      f"KS p = {ks.pvalue:.3f}")
print(f"empirical means: planted {np.mean(z):.2f} "
      f"(theory {T * (0.5 + alpha):.1f}), uniform "
      f"{np.mean(dist.run_batch(None, 30_000, rng)):.2f} (theory {T / 2:.1f})")

# --- at the default scale the advantage is constant ------------------------
dist = LearnerDistinguisher(
    learner=PlantedLearner(index=planted), d=d, alpha=alpha, epsilon=epsilon,
    n_learn=0,
)
print(f"\ndefault scale {dist.test_phase_scale} gives T = {dist.test_len}")
rng = make_generator(22, "advantage")
z_p = dist.run_batch(planted, 40_000, rng)
z_u = dist.run_batch(None, 40_000, rng)
report = threshold_distinguisher(z_p, z_u)
print(f"best threshold tau = {report.tau:.1f}")
print(f"advantage {report.advantage:.4f}, "
      f"99% band [{report.ci_low:.4f}, {report.ci_high:.4f}]")

# --- a real learner closes the loop ----------------------------------------
# The plug-in learner estimates every candidate parity from the learning
# phase and keeps the best. Give it 400 learning samples at d=4 and it finds
# the planted subset almost always, so the advantage stays near the oracle's.
d_small = 4
dist = LearnerDistinguisher(
    learner=PlugInParityLearner(d=d_small, k=1), d=d_small, alpha=alpha,
    epsilon=epsilon, n_learn=400,
)
rng = make_generator(23, "plug-in")
z_p = dist.run_batch(ParityIndex((2,), -1), 12_000, rng)
z_u = dist.run_batch(None, 12_000, rng)
report = threshold_distinguisher(z_p, z_u)
print(f"\nplug-in learner at d={d_small}, 400 learning samples: "
      f"advantage {report.advantage:.4f}")

# --- the whole reduction is itself an online algorithm ---------------------
# During the test phase the state is (phase, guess, noised count): the
# running count is Laplace-noised from the start and the output adds fresh
# noise, so an intrusion there learns nothing a noised counter would not
# reveal. During the learning phase the plug-in learner buffers raw rows;
# the reduction adds no protection of its own there, it only promises not to
# leak more than the learner's own state does.
alg = dist.as_pan_algorithm()
stream_rng = make_generator(24, "stream")
# Build a planted stream by hand: rows are (x_1..x_d, label) with the label
# agreeing with -x_2 on a 1/2 + alpha fraction of rows.
rows = stream_rng.choice([-1, 1], size=(dist.total_len, d_small + 1))
agree = stream_rng.random(dist.total_len) < 0.5 + alpha
rows[:, d_small] = np.where(agree, -rows[:, 1], rows[:, 1])
stream = [tuple(int(v) for v in row) for row in rows]
t_test = dist.n_learn + dist.test_len // 2
view = run_pan(alg, stream, t=t_test, rng=make_generator(25, "run"))
print(f"one online run, intrusion at t={t_test} (test phase): "
      f"state {view.state},")
print(f"reported scalar {view.output:.2f}")
