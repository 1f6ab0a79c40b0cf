"""
Splitting a count into major and minor arcs
===========================================

Small N only: the minor-arc grid gets large quickly.
"""

from nilring import waring as WR

res = WR.arc_split((0, 0, 0), 1, 4, grid=None)
print("r=1 N=4:", res.count, res.s_maj, res.s_min, res.s_min_method)

# r=2, N=4 with the full grid takes about a minute
res = WR.arc_split((0, 0, 0), 2, 4, delta=20.0**-4)
print("count", res.count)
print("S_maj", res.s_maj, " S_min", res.s_min, " residual", res.partition_residual)
print("normalized |S_min|", abs(res.s_min) / res.normalization)

rep = WR.predict_count((0, 0, 0), 3, 4, samples=200_000)
print("normalized count", rep.normalized_count, " prediction", rep.prediction,
      " relative residual", rep.relative_residual)
