# Group models, sumsets, and expansion deficits
#
# A finite cyclic group with normalized counting measure is the
# discretized circle.  On it, the expansion deficit
# mu(AB) - min(mu A + mu B, 1) is exactly computable, and extremal
# pairs dip to -1/N: the Cauchy-Davenport -1.

from fractions import Fraction

from kemplab import (Subset, deficit, fast_product_set, is_nearly_minimal,
                     make_cyclic, make_product, product_set)

# %% two arcs on Z_13: an extremal pair
z13 = make_cyclic(13)
a = Subset.from_indices(z13, [0, 1, 2, 3])
report = deficit(z13, a, a)
print("Z_13 arcs:  mu(A) =", report.mu_a, " mu(A+A) =", report.mu_ab)
print("deficit =", report.deficit, " (the grid's -1/13)")
print("0-nearly minimal?", report.nearly_minimal(Fraction(0)))

# %% the fast kernel agrees with the naive double loop, bit for bit
z = make_cyclic(4096)
import numpy as np
rng = np.random.default_rng(0)
A = Subset.from_indices(z, rng.choice(4096, 180, replace=False))
B = Subset.from_indices(z, rng.choice(4096, 150, replace=False))
assert fast_product_set(z, A, B) == product_set(z, A, B)
print("\nfast kernel == naive kernel on a random Z_4096 instance")

# %% products model tori: Z_48 x Z_5 is the discretized T^2 with a
# short fiber direction
g = make_product(make_cyclic(48), make_cyclic(5))
print("\nproduct model:", g.label, "order", g.order,
      "cyclic shape", g.cyclic_shape)

# %% near-minimality is a strict sandwich: both inequalities matter
big = Subset.from_indices(z13, range(8))
print("\nwide pair is 2-nearly minimal?",
      is_nearly_minimal(z13, big, big, 2), "(the < 1 cap fails)")
