"""Desk-scale numerical verification of the spectral machinery on
hyperbolic 3-space: Bianchi lattice arithmetic, Dedekind zeta and
scattering matrices, K-Bessel functions of imaginary order, Eisenstein
series, triple-product archimedean integrals, and the exponent calculus
of the resulting spectral-sum bounds.
"""

__version__ = "0.1.0"
