"""
A tour of the step-2 group
==========================

Elements carry a lower block (l, 0) and a central block (l1, l2).
"""

from nilring import group as G

# the product picks up a cross term in the central block
g = G.GroupElement(2, (1, 3, 0))
h = G.GroupElement(2, (2, 4, 5))
print("g*h =", (g * h).coords)
print("h*g =", (h * g).coords)

# inverses, and the moment curve
print("A0(2)^-1 =", G.moment_curve(2, 2).inverse().coords)

# dilations act on weights l1 + l2 and send A0(n) to A0(lam n)
print("2 o A0(3) =", G.dilate(2, G.moment_curve(3, 2)).coords, "=", G.moment_curve(6, 2).coords)
print("homogeneous dimension, d=2:", G.index_set(2).homogeneous_dimension)

# the alternating product two ways
n, m = (1, -2), (3, 0)
print("closed form:", G.closed_form_product(n, m, 2).coords)
print("literal    :", G.iterated_product(n, m, 2).coords)
