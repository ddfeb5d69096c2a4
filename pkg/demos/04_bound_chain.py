"""
The finite-n lower-bound chain
==============================

The probability lower bound is a difference of explicit terms.  At moderate n
the subtracted terms win and the bound is vacuous; this script finds where it
starts to beat the target and shows the terms in log scale around that point.
"""

from wignerlab.bounds import preliminary_bound_chain, scan_bound_chain

reports, threshold = scan_bound_chain(0.3, 0.25, log10_n_max=40)
print(f"consistent from n = {threshold:.3g} on")

for log10_n in (10, 15, 20, 21, 22, 25, 30):
    rep = preliminary_bound_chain(10.0**log10_n, 0.3, 0.25)
    t = rep.log_terms
    print(
        f"n=1e{log10_n:<3d} s={rep.s:<10d} log moment_lower {t['moment_lower']:9.2f}  "
        f"log omega_c {t['omega_c']:11.2f}  log target {t['target']:7.2f}  consistent={rep.consistent}"
    )

try:
    preliminary_bound_chain(1e30, 0.3, 0.15)
except ValueError as exc:
    print("rejected:", exc)
