"""Arithmetic and harmonic analysis on the free step-two nilpotent group G0(d)."""

from .errors import BudgetExceeded, NilringError, PreconditionError
from .group import GroupElement, RealGroupElement, closed_form_product, dilate, identity, iterated_product

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "NilringError", "PreconditionError", "GroupElement", "RealGroupElement",
    "closed_form_product", "dilate", "identity", "iterated_product",
]
