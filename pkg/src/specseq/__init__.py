"""Exact spectral-sequence computations over finitely generated abelian groups."""

from .errors import SpecSeqError
from .fga import FgaGroup, GroupHom, Presentation, smith_normal_form

__version__ = "0.1.0"

__all__ = ["FgaGroup", "GroupHom", "Presentation", "SpecSeqError", "smith_normal_form", "__version__"]
