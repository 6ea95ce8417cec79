"""Toeplitz operators with matrix-valued symbols on polydisc Hardy spaces.

The package turns the operator-theoretic characterizations of Toeplitz
products and partial isometries into finite, certifiable computations:
exact Laurent-polynomial symbol calculus, truncated multi-level block
Toeplitz/Hankel models with an exactness-window calculus, independent
quadrature/SVD oracles, windowed class checks, signed elementary
decompositions of products M_Gamma M_Psi^*, and constructive inner-function
factorizations of partially isometric operators.
"""

__version__ = "0.1.0"

from .errors import (FactorizationError, InconclusiveTruncationError,
                     NotToeplitzProductError, PreconditionError,
                     WindowExhaustedError)
from .symbol import (InnerCertificate, LaurentSymbol,
                     PartialIsometryCertificate, adjoint_symbol, is_inner,
                     is_partial_isometry_ae, multiply, random_inner,
                     random_inner_pair, random_product_pair, restrict_zero)
from .fileio import read_symbol, symbol_from_json, symbol_to_json, write_symbol
from .report import VerificationReport
from .trunc import (HankelOperator, TruncatedOperator, TruncationGrid,
                    analytic_product_operator, compare_on_window, compose,
                    dense_dump, hankel_matrix, identity_operator,
                    mult_shift_matrix, operator_from_matrix, toeplitz_matrix)
from .oracle import QuadratureSpec, dft_toeplitz, svd_partial_isometry
from .verify import (check_hyponormal, check_isometry, check_normal,
                     check_partial_isometry, check_range_doubly_commuting,
                     check_range_shift_invariant, check_toeplitz,
                     check_unitary, hankel_factor_identity_check)
from .product import (Decomposition, SignedTerm, closed_form_terms,
                      coeff_condition, decompose, decomposition_to_operator,
                      kernel_compression_condition, point_condition,
                      scalar_disjoint_check)
from .factor import (AnalyticFactorization, Factorization,
                     HyponormalFactorization, NormalFactorization,
                     WanderingBasis, analytic_factor, assemble_inner,
                     factor_partial_isometry, hyponormal_factor,
                     normal_factor, range_projection, wandering_basis)
