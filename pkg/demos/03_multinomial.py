"""
Multinomial private LASSO
=========================

A K x p weight matrix where every class row lives in its own L1 ball.
"""

# %%
import numpy as np

from privlasso import FwConfig, RandomSource, multinomial_frank_wolfe, multinomial_private_lasso
from privlasso.data import generate_synthetic_multiclass, split
from privlasso.multinomial import multinomial_loss, multinomial_sparsifier, predict_classes
from privlasso.sparsifier import SparsifierConfig

data, W_true = generate_synthetic_multiclass(6000, 30, 3, RandomSource(0))
train, _, test = split(data, (0.8, 0.0, 0.2), RandomSource(1))
print("class sizes", np.bincount(train.labels))
print("true column support", np.flatnonzero(np.any(W_true != 0, axis=0)).tolist())


def accuracy(W):
    return np.mean(predict_classes(W, test.features) == test.labels)


# %%
# Nonprivate row-wise Frank-Wolfe.
W = multinomial_frank_wolfe(train, FwConfig(10.0, 3000), 3)
print("nonprivate: loss %.3f, accuracy %.3f, row L1 norms %s"
      % (multinomial_loss(W, train), accuracy(W), np.round(np.abs(W).sum(axis=1), 3)))

# %%
# The private version splits the budget over the K rows, and the Lipschitz
# constant of the cross-entropy doubles to 2.
cfg = FwConfig(10.0, 1000, lipschitz=2.0, epsilon=4.0, delta=1.0 / train.n)
W_priv = multinomial_private_lasso(train, cfg, 3, RandomSource(2))
print("private: accuracy %.3f, nonzero entries %d" % (accuracy(W_priv), np.count_nonzero(W_priv)))

# %%
# Sparsified, counting whole feature columns.
scfg = SparsifierConfig(epsilon1=0.05, epsilon2=3.95, delta=1.0 / train.n, nonprivate_iterations=3000)
W_sparse = multinomial_sparsifier(train, scfg, 3, RandomSource(3), count="columns")
print("sparsified: accuracy %.3f, columns kept %s"
      % (accuracy(W_sparse), np.flatnonzero(np.any(W_sparse != 0, axis=0)).tolist()))
