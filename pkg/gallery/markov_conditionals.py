"""
Conditionals as Markov kernels
==============================

Disintegrate a joint distribution on a finite product, push the marginal
back through the graph of the conditional, and see that the correct loss
vanishes only at the true conditional.
"""
import numpy as np

from geomlearn import markov as mk
from geomlearn import rkhs

rng = np.random.default_rng(3)
mu = mk.random_joint(rng, 3, 4)
marg, T = mk.disintegrate(mu)
print("conditional rows\n", np.round(T.rows, 3))
print("round trip error", np.abs(mk.graph_pushforward(T, marg).table - mu.table).max())
print("correct loss at the conditional", rkhs.correct_loss(T, mu))

other = mk.random_kernel(rng, T.source, T.target)
print(f"correct loss at a random kernel {rkhs.correct_loss(other, mu):.4f}")
