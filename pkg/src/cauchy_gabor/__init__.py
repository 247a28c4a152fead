"""Irregular Gabor frames generated by a Cauchy kernel.

Modules
-------
lattice            point sets Lambda and frequency sets M
expquad            exact integrals of polynomial times exponential
spectrum           piecewise-polynomial spectra and band splitting
cauchy_analysis    frame coefficients by the half-line formula
triangular_system  the bidiagonal gap matrices and their inverses
paley_wiener       spectral weights, sampling constants, least squares
framebounds        empirical frame bounds on finite windows
pipeline           reconstruction, counterexamples, theorem check
cli                command-line front end
"""

__version__ = "0.1.0"
