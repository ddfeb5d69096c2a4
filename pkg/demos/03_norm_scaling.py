"""
How fast does the norm reach the edge?
======================================

The gap 2 sigma - E||A|| shrinks like a power of n.  Edge fluctuations suggest
n^{-2/3}; at small n an additional O(1/n) correction steepens the fitted
slope.  The plot is written next to this script.
"""

from pathlib import Path

from wignerlab.ensemble import make_two_point
from wignerlab.mc import fit_scaling, norm_gap_points
from wignerlab.plotting import plot_scaling

tp = make_two_point(0.8, 0.5)
points = norm_gap_points(tp, (100, 200, 400, 800), trials=120, seed=3)
for n, gap, se in points:
    print(f"n={n:4d}  gap {gap:.5f} +- {se:.5f}")
fit = fit_scaling([(n, g) for n, g, _ in points])
print(f"fitted exponent {fit.exponent:.3f}")

rows = [{"params": f"n={n}", "observable": "norm_gap", "value": g, "stderr": se} for n, g, se in points]
out = Path(__file__).with_name("norm_scaling.svg")
plot_scaling(rows, out)
print("wrote", out)
