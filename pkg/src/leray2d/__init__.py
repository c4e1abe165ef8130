"""leray2d: self-similar profiles of 2D Navier-Stokes on the rescaled disk.

Solves the rescaled Leray boundary-value problem in vorticity-streamfunction
form with Fourier x Chebyshev-type pseudospectral collocation, continues
solution branches in the boundary-data amplitude sigma, computes the spectrum
of the linearization, locates the symmetry-breaking pitchfork, follows the
asymmetric branch, and verifies profiles against analytic identities.
"""

from .grid import (DiskGrid, ScalarField, build_grid, fourier_analyze,
                   fourier_synthesize, gradient_polar, laplacian_polar,
                   integrate_disk)

__version__ = "0.1.0"

__all__ = [
    "DiskGrid", "ScalarField", "build_grid", "fourier_analyze",
    "fourier_synthesize", "gradient_polar", "laplacian_polar",
    "integrate_disk", "__version__",
]
