"""Elliptic solutions of the Yang-Baxter equation.

Theta and elliptic gamma functions, Sklyanin algebra generators as difference
operators, Lax operators, intertwiners, fusion and the reduction of the general
R-operator to finite-dimensional R-matrices.
"""
from .bases import FiniteRep, fit_points, generating_function, phi_basis, psi_basis, sample_points, theta2n_basis
from .core import ModularParams, PrecisionConfig, elliptic_gamma, qpochhammer, r_const, theta, theta1, theta_mult
from .diffops import DifferenceOperator, MatrixOperator, OperatorMatrix
from .fusion import fuse_baxter, fuse_double, lambda_symbol
from .intertwiner import M_integral, M_lattice
from .lax import baxter_R, lax_L, lax_L_factorized, weights
from .reduction import reduce_both_spaces, reduce_first_space, two_dim_reduction_worked
from .sklyanin import generator_S, generator_S_modified, generator_S_tilde, matrix_rep
from .suites import RunConfig, run_suite

__version__ = "0.1.0"

__all__ = [
    "FiniteRep", "fit_points", "generating_function", "phi_basis", "psi_basis", "sample_points", "theta2n_basis",
    "ModularParams", "PrecisionConfig", "elliptic_gamma", "qpochhammer", "r_const", "theta", "theta1", "theta_mult",
    "DifferenceOperator", "MatrixOperator", "OperatorMatrix",
    "fuse_baxter", "fuse_double", "lambda_symbol",
    "M_integral", "M_lattice",
    "baxter_R", "lax_L", "lax_L_factorized", "weights",
    "reduce_both_spaces", "reduce_first_space", "two_dim_reduction_worked",
    "generator_S", "generator_S_modified", "generator_S_tilde", "matrix_rep",
    "RunConfig", "run_suite",
]
