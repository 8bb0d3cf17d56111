"""Exact and limiting distributions of the mutant count.

Submodules: ``series`` (Pmf, PowerSeries), ``hypergeom`` (2F1), ``clone``
(clone-size law), ``compound`` (B* and B°), ``finite`` (exact finite-n laws)
and ``limits`` (tail and limit constants, limit-law helpers).
"""
