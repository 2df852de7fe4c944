"""Maximum modulus of random polynomials with roots uniform on the unit circle."""
from .kernels import BACKEND
from .multiplicity import MultiplicitySpec, lindberg_margin, lindberg_verdict, prefix_norms
from .polycircle import GridConfig, PolySample, maximize, sample_poly

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GridConfig",
    "MultiplicitySpec",
    "PolySample",
    "lindberg_margin",
    "lindberg_verdict",
    "maximize",
    "prefix_norms",
    "sample_poly",
]
