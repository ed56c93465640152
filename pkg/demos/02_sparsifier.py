"""
Sparsifying a private solution
==============================

Spends a small slice of the budget on a noisy count of the nonprivate
support, then keeps only that many of the largest private coefficients.
"""

# %%
import numpy as np

from privlasso import (
    RandomSource,
    SparsifierConfig,
    StubSource,
    SyntheticSpec,
    generate_synthetic,
    keep_top_k,
    nonprivate_frank_wolfe,
    private_support_size,
    sparsifier,
    split,
)
from privlasso.metrics import classification_error, count_nonzero, support_report

data, support = generate_synthetic(SyntheticSpec(), RandomSource(0))
train, _, test = split(data, (0.8, 0.0, 0.2), RandomSource(1))

# %%
# The count pipeline: clip to [alpha, beta], add double-geometric noise,
# clip again, scale by rho and round. Stubbed noise makes each step visible.
cfg = SparsifierConfig(delta=1.0 / train.n, nonprivate_iterations=5000).resolve(train.p)
print("alpha", cfg.alpha, "beta", cfg.beta)
w_six = np.r_[np.ones(6), np.zeros(94)]
for noise in (-100, -3, 0, 4, 100):
    c = private_support_size(w_six, cfg, 100, StubSource(double_geometric_value=noise))
    print("noise %+4d -> c = %d" % (noise, c))

# %%
# With epsilon1 = 0.05 the real noise is wide compared with beta - alpha,
# so c usually lands on one of the clip bounds.
rng = RandomSource(5)
sizes = [private_support_size(w_six, cfg, 100, rng) for _ in range(2000)]
values, counts = np.unique(sizes, return_counts=True)
print(dict(zip(values.tolist(), counts.tolist())))

# %%
# keep_top_k zeroes everything but the c largest magnitudes.
print(keep_top_k([0.5, -0.9, 0.1, 0.0, 0.7], 2))

# %%
# Full Sparsifier runs. The nonprivate fit is deterministic, so it is
# solved once and reused across trials.
w_np = nonprivate_frank_wolfe(train, cfg.nonprivate_fw())
for trial in range(5):
    w = sparsifier(train, cfg, RandomSource(100 + trial), w_nonprivate=w_np)
    rep = support_report(w, support, train.p)
    print("trial %d: nonzeros %2d, correct zeros %2d, incorrect zeros %d, F1 %.2f, test error %.3f"
          % (trial, count_nonzero(w), rep.correct_zeros, rep.incorrect_zeros, rep.f1,
             classification_error(w, test)))
print("total budget", cfg.epsilon_total)
