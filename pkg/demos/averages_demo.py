"""
Averages along the moment curve
===============================
"""

import numpy as np

from nilring import averages as A
from nilring import group as G

f = A.delta(2)
m = A.smoothed_average(f, 4)
print("support size of M_4 delta:", len(m), " total:", m.total())

# maximal function of a point mass over growing scale ranges
for k in range(0, 7):
    print(k, A.maximal_function(f, range(0, k + 1)).ratio)

# truncated singular operator with the default kernel
out, ratio = A.singular_operator(f, R=32)
print("l2 ratio of H f:", ratio)

# variation of a random walk is monotone in rho
a = np.cumsum(np.random.default_rng(0).normal(size=64))
print([round(A.variation_seminorm(a, rho), 3) for rho in (1, 2, 4, 8)])
print("A0(5) =", G.moment_curve(5, 2).coords)
