"""Two-slit periodic grating scattering: resonances, embedded eigenvalues and Fano transmission."""

from .greens import BetaSet, PhysicalConfig, SpectralPoint, beta_constants, in_diamond, zeta

__all__ = [
    "BetaSet",
    "PhysicalConfig",
    "SpectralPoint",
    "beta_constants",
    "in_diamond",
    "zeta",
]

__version__ = "0.1.0"
