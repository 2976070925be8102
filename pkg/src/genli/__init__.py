"""Generalized Li coefficients D_n(b) and k_{n,b} by four independent routes, with verifiers."""

from .errors import AccuracyError, DomainError, ResourceError, ZeroTableError
from .licore import CoeffResult, Route, d_xi_route_b, d_xi_route_c, k_route_arithmetic, k_sum_zeros
from .zerodata import ZeroTable, load_zeros

__version__ = "0.1.0"

__all__ = ["AccuracyError", "CoeffResult", "DomainError", "ResourceError", "Route", "ZeroTable", "ZeroTableError",
           "d_xi_route_b", "d_xi_route_c", "k_route_arithmetic", "k_sum_zeros", "load_zeros"]
