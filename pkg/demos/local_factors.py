"""
Local counts and the singular series
====================================
"""

from nilring import group as G
from nilring import residue as R
from nilring import waring as WR

r = 2
ident = G.identity(2)

# solution counts mod q sum to q^{2r}
for q in range(2, 7):
    print(q, int(R.solution_table(q, 2, r).sum()), q ** (2 * r))

# the coefficients A(q, h): two exact routes and a floating one
for q in (6, 10):
    print("A(%d, 0):" % q, R.coefficient_A(q, ident, r), R.coefficient_A(q, ident, r, method="ramanujan"),
          complex(R.coefficient_A(q, ident, r, method="complex")))

# B(p, h) at a few primes; an odd first coordinate is obstructed mod 2
for h in (ident, G.GroupElement(2, (1, 0, 0))):
    print(h.coords, [float(R.local_factor(p, h, 3).B) for p in (2, 3, 5)])

ss = WR.singular_series((0, 0, 0), 3, qmax=6)
print("euler product:", ss.euler_value, " fraction sum:", ss.fraction_sum.real)
print("tail bound:", ss.tail_bound, "(envelope exponent %.2f)" % ss.envelope_exponent)
