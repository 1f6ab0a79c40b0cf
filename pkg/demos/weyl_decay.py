"""
Weyl sums along an irrational central frequency
===============================================
"""

import math

from nilring import residue as R
from nilring import weyl as W

theta = (0.0, 0.0, (math.sqrt(5) - 1) / 2)
for P in (4, 8, 16, 32):
    s = W.weyl_sum(P, 3, theta)
    print(P, abs(s.value) / P**6)

# same thing for the classical quadratic sum at prime denominators
primes = [p for p in range(2, 40) if R.factorize(p) == {p: 1}]
print([round(R.classical_gauss_envelope(p, 2), 4) for p in primes])

# and the continuous integral, by Monte Carlo
for t in (0, 2, 4, 8):
    est = W.oscillatory_integral((0, 0, t), 3, samples=200_000)
    print(t, abs(est.value), est.stderr)
