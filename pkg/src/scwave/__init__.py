"""Traveling-wave speeds of spatially coupled LDPC ensembles on the BEC."""

from .ensemble import DegreeDistribution, named_ensemble

__version__ = "0.1.0"

__all__ = ["DegreeDistribution", "named_ensemble", "__version__"]
