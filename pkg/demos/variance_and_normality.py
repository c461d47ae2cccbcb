"""Distribution of the symbols <a/c> with (c, 11) = 1 and |c| < X.

Prints the variance against log X, the fitted slope, the Kolmogorov-Smirnov
distance of the normalized symbols to N(0, 1), and the empirical moment
generating function against the Gaussian prediction.  The first run computes
about 650000 symbols (several minutes); later runs read them from the cache.

Run:  python demos/variance_and_normality.py
"""
import math

import numpy as np

from bianchi_modsym.stats import mgf_scan
from bianchi_modsym.verify import Context, RunConfig

ctx = Context(RunConfig())
summary = ctx.summary

print(f"{'X':>4} {'N':>8} {'mean':>9} {'variance':>9} {'log X':>6} {'KS':>7}")
for row in summary.rows:
    print(f"{row.X:4g} {row.size:8d} {row.mean:9.5f} {row.variance:9.5f} "
          f"{math.log(row.X):6.3f} {row.ks:7.4f}")
print(f"\nvariance ~ C log X + D with C = {summary.C_fit:.5f}, D = {summary.D_fit:.5f}, "
      f"R^2 = {summary.r_squared:.4f}")
lo, hi = summary.window_slopes
print(f"slope on the lower / upper half of the grid: {lo:.5f} / {hi:.5f}")

X = ctx.X_max
rep = mgf_scan(ctx.sample("1"), X, summary.C_fit)
print(f"\nE exp(2 pi i eps <r>) at X = {X:g} vs exp(-2 pi^2 C eps^2 log X):")
for e, emp, pred in list(zip(rep.eps, rep.empirical, rep.predicted))[10::2]:
    print(f"  eps {e:6.3f}: {emp.real: .4f} {emp.imag:+.1e}i   predicted {pred:.4f}")

hist, edges = np.histogram(ctx.sample("1").values / math.sqrt(summary.C_fit * math.log(X)),
                           bins=12, range=(-3, 3), density=True)
print("\nnormalized symbols: empirical density vs standard normal")
for left, h in zip(edges, hist):
    mid = left + 0.25
    print(f"  [{left:5.2f}, {left + 0.5:5.2f})  {h:.4f}  {math.exp(-mid * mid / 2) / math.sqrt(2 * math.pi):.4f}")
