"""Windowed decision procedures for operator classes at truncation.

Every check restricts its defining identity to the exact window of the
composed expression: truncation breaks operator identities near the degree
cap, and the window calculus turns "exact in the interior" into a guarantee.
A failing report always carries a witness (offending block or eigenvalue);
tolerances are recorded in every report because the underlying theory gives
no quantitative stability margins.
"""

from __future__ import annotations

import numpy as np

from .errors import PreconditionError, WindowExhaustedError
from .report import VerificationReport, make_report
from .symbol import LaurentSymbol, multiply
from .trunc import (TruncatedOperator, TruncationGrid, compose,
                    hankel_adjoint_product, hankel_matrix, lshift,
                    min_window, require_window, rshift, shift_sandwich,
                    toeplitz_matrix, window_compression, window_residual)

DEFAULT_CHECK_TOL = 1e-9

#: Hermitian semidefinite tests accept eigenvalues down to -PSD_EIG_TOL
PSD_EIG_TOL = 1e-9


def symmetrized_gram(op: TruncatedOperator, side: str = "left"
                     ) -> TruncatedOperator:
    """(op op^* + h.c.)/2 for side="left", (op^* op + h.c.)/2 for side="right".

    The symmetrization costs nothing in exact arithmetic and keeps the
    eigenvalue-based gates honest at roundoff scale.
    """
    if side == "left":
        raw = op.matrix @ op.matrix.conj().T
        grid = op.grid.out_space()
    elif side == "right":
        raw = op.matrix.conj().T @ op.matrix
        grid = op.grid.in_space()
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sym = 0.5 * (raw + raw.conj().T)
    radius = tuple(r + d for r, d in zip(op.raise_radius, op.drop_radius))
    return TruncatedOperator(sym, grid, radius, radius,
                             f"gram_{side}({op.provenance})")


def check_toeplitz(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                   ) -> VerificationReport:
    """Shift-compression invariance M_{z_i}^* T M_{z_i} = T for every i."""
    g = op.grid
    w = tuple(g.D - b - 2 for b in op.band_radius)
    require_window(w, g.D, "Toeplitz check",
                   needed=max(op.band_radius) + 2)
    worst, witness = -1.0, None
    for i in range(1, g.n + 1):
        diff = shift_sandwich(op, i).matrix - op.matrix
        residual, wit = window_residual(diff, g, w)
        if residual > worst:
            worst, witness = residual, f"i={i},{wit}"
    return make_report("toeplitz", worst, tol, w, witness)


def check_isometry(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                   ) -> VerificationReport:
    """T^* T = I on the exact window."""
    prod = compose([op.adjoint(), op])
    eye = np.eye(prod.grid.size_out, dtype=complex)
    w = require_window(prod.window, op.grid.D, "isometry check")
    residual, witness = window_residual(prod.matrix - eye, prod.grid, w)
    return make_report("isometry", residual, tol, w, witness)


def check_unitary(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                  ) -> VerificationReport:
    """T^* T = I and T T^* = I on the exact window."""
    left = check_isometry(op, tol)
    right = check_isometry(op.adjoint(), tol)
    worst = left if left.residual >= right.residual else right
    window = min_window(op, op.adjoint())
    return make_report("unitary", worst.residual, tol,
                       tuple(min(a, b) for a, b in zip(left.window, right.window)),
                       worst.witness)


def check_partial_isometry(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                           ) -> VerificationReport:
    """T T^* T = T on the window D - 3*band."""
    g = op.grid
    w = tuple(g.D - 3 * b for b in op.band_radius)
    require_window(w, g.D, "partial isometry check",
                   needed=3 * max(op.band_radius) + 2)
    triple = op.matrix @ op.matrix.conj().T @ op.matrix
    residual, witness = window_residual(triple - op.matrix, g, w)
    return make_report("partial_isometry", residual, tol, w, witness)


def _self_commutator(op: TruncatedOperator) -> TruncatedOperator:
    if not op.grid.is_square:
        raise ValueError("normality checks need equal fiber dimensions")
    c = op.matrix.conj().T @ op.matrix - op.matrix @ op.matrix.conj().T
    radius = tuple(r + d for r, d in zip(op.raise_radius, op.drop_radius))
    return TruncatedOperator(c, op.grid, radius, radius,
                             f"self_commutator({op.provenance})")


def check_hyponormal(op: TruncatedOperator, eig_tol: float = PSD_EIG_TOL
                     ) -> VerificationReport:
    """T^* T - T T^* is positive semidefinite on the window compression."""
    comm = _self_commutator(op)
    w = require_window(comm.window, op.grid.D, "hyponormality check")
    sub = window_compression(comm, w)
    eigs = np.linalg.eigvalsh(0.5 * (sub + sub.conj().T))
    lam_min = float(eigs[0]) if eigs.size else 0.0
    residual = max(0.0, -lam_min)
    return make_report("hyponormal", residual, eig_tol, w,
                       f"min_eigenvalue={lam_min:.6e}")


def check_normal(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                 ) -> VerificationReport:
    """[T^*, T] = 0 on the exact window."""
    comm = _self_commutator(op)
    w = require_window(comm.window, op.grid.D, "normality check")
    residual, witness = window_residual(comm.matrix, comm.grid, w)
    return make_report("normal", residual, tol, w, witness)


def hankel_factor_identity_check(f: LaurentSymbol, g: LaurentSymbol,
                                 grid_or_degree=8,
                                 tol: float = 1e-10) -> VerificationReport:
    """Defect identity T_{FG} = T_F T_G + H_{F*}^* H_G on the window.

    The Hankel sections are taken in un-rotated form (rows over the
    negative-frequency box), which is exactly the defect of the truncated
    product against the product symbol.
    """
    if f.dim_in != g.dim_out:
        raise ValueError(f"fibers do not chain: {f.dim_in} vs {g.dim_out}")
    if f.n != g.n:
        raise ValueError("variable counts differ")
    D = grid_or_degree.D if isinstance(grid_or_degree, TruncationGrid) \
        else int(grid_or_degree)
    t_prod = toeplitz_matrix(multiply(f, g), D)
    t_f = toeplitz_matrix(f, D)
    t_g = toeplitz_matrix(g, D)
    h_left = hankel_matrix(f.adjoint(), D)
    h_right = hankel_matrix(g, D)
    hank = hankel_adjoint_product(h_left, h_right)
    w = tuple(D - bf - bg for bf, bg in zip(f.band_radius, g.band_radius))
    require_window(w, D, "Hankel factor identity")
    diff = t_prod.matrix - t_f.matrix @ t_g.matrix - hank
    residual, witness = window_residual(diff, t_prod.grid, w)
    return make_report("hankel_factor_identity", residual, tol, w, witness)


def _range_projection_for(op: TruncatedOperator,
                          q: TruncatedOperator | None) -> TruncatedOperator:
    return q if q is not None else symmetrized_gram(op, "left")


def check_range_shift_invariant(op: TruncatedOperator,
                                tol: float = DEFAULT_CHECK_TOL,
                                q: TruncatedOperator | None = None,
                                gate: bool = True) -> VerificationReport:
    """(I - Q) M_{z_i} Q = 0 for Q = T T^*, all i: the range is shift invariant."""
    if gate:
        pi = check_partial_isometry(op, tol)
        if not pi.verdict:
            raise PreconditionError(
                f"range checks need a partial isometry; defect {pi.residual:.3e}")
    q = _range_projection_for(op, q)
    g = q.grid
    w = tuple(g.D - 2 * r - 1 for r in q.raise_radius)
    require_window(w, g.D, "range shift invariance")
    worst, witness = -1.0, None
    for i in range(1, g.n + 1):
        sq = lshift(q, i)                       # M_{z_i} Q
        diff = sq.matrix - q.matrix @ sq.matrix  # (I - Q) M_{z_i} Q
        residual, wit = window_residual(diff, g, w)
        if residual > worst:
            worst, witness = residual, f"i={i},{wit}"
    return make_report("range_shift_invariant", worst, tol, w, witness)


def check_range_doubly_commuting(op: TruncatedOperator,
                                 tol: float = DEFAULT_CHECK_TOL,
                                 q: TruncatedOperator | None = None,
                                 gate: bool = True) -> VerificationReport:
    """Cross-commutators of the restricted shifts on the range vanish.

    With Q = T T^* and R_i the compression of M_{z_i} to the range, the
    invariance gate collapses Q (R_i^* R_j - R_j R_i^*) Q to
    Q M_{z_i}^* M_{z_j} Q - M_{z_j} Q M_{z_i}^* Q, which stays inside the
    window at moderate degree caps; the uncollapsed form would not.
    """
    g = op.grid
    if g.n < 2:
        raise PreconditionError("double commutation needs at least two variables")
    q = _range_projection_for(op, q)
    if gate:
        si = check_range_shift_invariant(op, tol, q=q)
        if not si.verdict:
            raise PreconditionError(
                f"range is not shift invariant (defect {si.residual:.3e}); "
                "cross-commutator test does not apply")
    gq = q.grid
    w = tuple(gq.D - 2 * r - 1 for r in q.raise_radius)
    require_window(w, gq.D, "range double commutation")
    worst, witness = -1.0, None
    for i in range(1, gq.n + 1):
        for j in range(i + 1, gq.n + 1):
            inner = lshift(lshift(q, j), i, adjoint=True)   # M_i^* M_j Q
            lhs = q.matrix @ inner.matrix                   # Q M_i^* M_j Q
            half = q.matrix @ lshift(q, i, adjoint=True).matrix  # Q M_i^* Q
            rhs = lshift(TruncatedOperator(half, gq, q.raise_radius,
                                           q.drop_radius, "tmp"), j).matrix
            residual, wit = window_residual(lhs - rhs, gq, w)
            if residual > worst:
                worst, witness = residual, f"i={i},j={j},{wit}"
    return make_report("range_doubly_commuting", worst, tol, w, witness)
