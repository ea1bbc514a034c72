"""Exact weights, symmetric rational functions, seeded samplers, and
residue-sum observables for a family of stochastic vertex models on the
quadrant."""

__version__ = "0.1.0"

from .exactcore import ExactScalar, Signature, as_exact, exact_str

__all__ = ["ExactScalar", "Signature", "as_exact", "exact_str", "__version__"]
