"""Quantum potentials for motion constrained to curves and surfaces.

Modules: :mod:`geometry` (curves, surfaces, layer metrics), :mod:`brackets`
(Poisson and Dirac brackets), :mod:`potential` (quantum potentials),
:mod:`spectral` (1D Hamiltonians, eigensolver, recipe table),
:mod:`layersim` (thin-layer simulations) and :mod:`cli`.
"""

__version__ = "0.1.0"
