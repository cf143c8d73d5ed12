"""Fractional Laplacians on intervals and numerical continuation of steady
states for fractional reaction-diffusion models."""

__version__ = "0.1.0"

from .errors import FracPathError  # noqa: E402

__all__ = ["FracPathError", "__version__"]
