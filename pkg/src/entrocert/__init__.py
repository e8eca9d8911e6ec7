"""Combinatorial index pairs and certified entropy bounds for planar maps."""

__version__ = "0.1.0"

from .interval import Iv, IvRect, iv_arith, iv_sin2pi, iv_wrap1

__all__ = ["Iv", "IvRect", "iv_arith", "iv_sin2pi", "iv_wrap1", "__version__"]
