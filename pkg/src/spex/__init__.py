"""Sparse exponential sums, solution counts, power generators and discrepancy."""

__version__ = "0.1.0"

from .errors import BudgetExceeded, SpexError
from .poly import SparsePolynomial, make_poly, parse_poly
from .expsum import sum_units, sum_via_crt
from .bounds import bound_table, kappa, rho, sigma
from .powgen import make_generator, nth_term
from .discrepancy import PointSet, extreme_discrepancy, star_discrepancy

__all__ = [
    "BudgetExceeded", "SpexError", "SparsePolynomial", "make_poly", "parse_poly", "sum_units", "sum_via_crt",
    "bound_table", "kappa", "rho", "sigma", "make_generator", "nth_term", "PointSet", "extreme_discrepancy",
    "star_discrepancy",
]
