"""
wpressure - weighted topological pressure for chains of subshifts.

Numerical estimates of the weighted pressure of a potential on Z and Z^2
subshift chains, the weighted variational principle and its verification
suites.
"""

__version__ = "0.1.0"
