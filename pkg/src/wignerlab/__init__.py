"""Monte Carlo and combinatorial tools for the spectral norm of Wigner matrices.

Modules
-------
ensemble
    Entry laws and counter-seeded symmetric matrix sampling.
spectra
    Tridiagonal eigenvalue solver and derived observables.
pathcomb
    Closed-path enumeration, exact trace moments, gluing and Dyck statistics.
mc
    Seeded Monte Carlo estimators built on the two modules above.
bounds
    Closed-form bound evaluators at finite ``n``.
"""

__version__ = "0.1.0"
