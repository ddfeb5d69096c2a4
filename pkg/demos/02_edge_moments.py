"""
Edge moments and their fluctuations
===================================

With s growing like n^{6/11 - eps}, E Tr A^{2s} is dominated by the spectral
edge and behaves like n / (sqrt(pi) s^{3/2}) when sigma = 1/2.  This script
measures that ratio, the variance scale and the relative deviations used in
the law of large numbers check, at sizes that run in about a minute.
"""

import numpy as np

from wignerlab.bounds import asymptotic_moment, variance_bound
from wignerlab.ensemble import make_two_point
from wignerlab.mc import MomentEstimate, observable_values, s_rule, simulate_spectra

tp = make_two_point(0.8, 0.5)

for n in (200, 400, 800):
    batch = simulate_spectra(tp, n, 150, seed=n)
    s = s_rule(n, 0.05)
    est = MomentEstimate.from_values(observable_values(batch, "trace_power", s))
    ratio = est.mean / asymptotic_moment(n, s, 0.5)
    s_var = s_rule(n, 0.1)
    values = observable_values(batch, "trace_power", s_var)
    print(
        f"n={n:4d}  s={s:2d}  moment ratio {ratio:.3f} +- {est.stderr / asymptotic_moment(n, s, 0.5):.3f}"
        f"  |  s={s_var:2d}  Var/sqrt(s) {values.var(ddof=1) / variance_bound(s_var, 0.5):.4f}"
        f"  max|delta| {np.max(np.abs(values / values.mean() - 1)):.3f} vs {n ** (-1 / 22):.3f}"
    )
