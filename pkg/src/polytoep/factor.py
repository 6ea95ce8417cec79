"""Inner-function factorizations of partially isometric operators.

The range of a partially isometric operator whose restricted shifts doubly
commute is generated by an inner symbol; its columns are an orthonormal basis
of the wandering subspace ran Q minus the shifted copies z_i ran Q.  From the
two range projections Q = T T^* and Q' = T^* T this module extracts inner
symbols Gamma, Psi with T = M_Gamma M_Psi^*, aligns them by the constant
unitary coupling, and derives the analytic, hyponormal and normal special
forms.  All extraction is window-gated: a wandering vector that touches the
window boundary aborts with an inconclusive-truncation error instead of
producing a corrupted inner function, and inner symbols are only unique up to
constant unitaries, so every reported quantity is gauge invariant
(projections, reconstructions, residuals - never raw coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (FactorizationError, InconclusiveTruncationError,
                     PreconditionError)
from .symbol import LaurentSymbol, MultiIndex, is_inner, multiply
from .trunc import (TruncatedOperator, TruncationGrid, _expand,
                    analytic_product_operator, compose, lshift, min_window,
                    require_window, rshift, toeplitz_matrix, window_residual)
from .product import coeff_condition
from .verify import (check_hyponormal, check_normal, check_partial_isometry,
                     check_range_doubly_commuting, check_range_shift_invariant,
                     symmetrized_gram, DEFAULT_CHECK_TOL)

#: singular-value threshold deciding the wandering rank
RANK_TOL = 1e-8


def range_projection(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                     ) -> TruncatedOperator:
    """Symmetrized Q = T T^*, gated on T being a partial isometry."""
    pi = check_partial_isometry(op, tol)
    if not pi.verdict:
        raise PreconditionError(
            f"not a partial isometry at this truncation (defect {pi.residual:.3e})")
    q = symmetrized_gram(op, "left")
    w = require_window(q.window, q.grid.D, "range projection")
    residual, _ = window_residual(q.matrix @ q.matrix - q.matrix, q.grid, w)
    if residual > tol:
        raise FactorizationError(
            f"range projection is not idempotent on the window "
            f"(defect {residual:.3e})")
    return q


def wandering_projection(q: TruncatedOperator) -> TruncatedOperator:
    """Projection onto ran Q minus sum_i z_i ran Q.

    For a shift-invariant doubly commuting range the projections onto the
    shifted copies z^J ran Q are the commuting sandwiches S^J Q S^{J*}, and
    inclusion-exclusion collapses the orthocomplement to
    sum_J (-1)^{|J|} S^J Q S^{J*} over the 2^n coordinate subsets.
    """
    n = q.grid.n
    acc = q.matrix.copy()
    for size in range(1, n + 1):
        for subset in combinations(range(1, n + 1), size):
            shifted = q
            for i in subset:
                shifted = lshift(rshift(shifted, i, adjoint=True), i)
            acc += (-1) ** size * shifted.matrix
    rr = tuple(r + 1 for r in q.raise_radius)
    dr = tuple(d + 1 for d in q.drop_radius)
    return TruncatedOperator(acc, q.grid, rr, dr, "wandering_projection")


@dataclass(frozen=True)
class WanderingBasis:
    """Orthonormal polynomial vectors spanning the wandering subspace."""

    vectors: np.ndarray                 # (grid.size_out, rank) columns
    grid: TruncationGrid
    q: TruncatedOperator
    degrees: tuple[MultiIndex, ...]     # componentwise support bound per vector

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]


def _vector_degree(vec: np.ndarray, grid: TruncationGrid,
                   tol: float = 1e-12) -> MultiIndex:
    blocks = vec.reshape(grid.npoints, grid.dim_out)
    live = np.nonzero(np.max(np.abs(blocks), axis=1) > tol)[0]
    if live.size == 0:
        return (0,) * grid.n
    arr = grid.index_array[live]
    return tuple(int(c) for c in arr.max(axis=0))


def wandering_basis(q: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL,
                    rank_tol: float = RANK_TOL, margin: int = 1
                    ) -> WanderingBasis:
    """Extract an orthonormal wandering basis from a range projection.

    Gates: Q must be Hermitian and idempotent on its window and the range must
    be shift invariant and (for n >= 2) doubly commuting; a projection is
    itself a partial isometry, so the range checks apply to Q directly.  The
    basis comes from a pivoted orthogonalization of the exact columns of the
    wandering projection, pivots preferred in graded-lexicographic order, so
    the output is deterministic.  Vectors whose support reaches within
    `margin` of the window boundary abort as inconclusive.
    """
    if not q.grid.is_square:
        raise ValueError("range projections live on a square grid")
    herm = float(np.max(np.abs(q.matrix - q.matrix.conj().T)))
    if herm > tol:
        raise PreconditionError(f"projection is not Hermitian (defect {herm:.3e})")
    si = check_range_shift_invariant(q, tol, q=q, gate=True)
    if not si.verdict:
        raise PreconditionError(
            f"range is not shift invariant (defect {si.residual:.3e})")
    if q.grid.n >= 2:
        dc = check_range_doubly_commuting(q, tol, q=q, gate=False)
        if not dc.verdict:
            raise PreconditionError(
                f"restricted shifts do not doubly commute "
                f"(defect {dc.residual:.3e}); range is not of Beurling type")
    pw = wandering_projection(q)
    w = require_window(pw.window, pw.grid.D, "wandering extraction")
    cand_blocks = pw.grid.window_positions(w)
    cols = _expand(cand_blocks, pw.grid.dim_out)
    basis: list[np.ndarray] = []
    resid = pw.matrix[:, cols].copy()
    for j in range(resid.shape[1]):
        v = resid[:, j]
        norm = np.linalg.norm(v)
        if norm * norm <= rank_tol:
            continue
        v = v / norm
        # second orthogonalization pass keeps the Gram residual at roundoff
        for u in basis:
            v = v - u * (u.conj() @ v)
        norm = np.linalg.norm(v)
        if norm * norm <= rank_tol:
            continue
        v = v / norm
        basis.append(v)
        rest = resid[:, j + 1:]
        rest -= np.outer(v, v.conj() @ rest)
    if not basis:
        raise FactorizationError("wandering subspace is empty; zero range")
    vecs = np.column_stack(basis)
    gram = vecs.conj().T @ vecs - np.eye(len(basis))
    if np.max(np.abs(gram)) > 1e-10:
        raise FactorizationError(
            f"wandering basis lost orthonormality ({np.max(np.abs(gram)):.3e})")
    degrees = tuple(_vector_degree(v, pw.grid) for v in basis)
    for deg in degrees:
        if any(d > wi - margin for d, wi in zip(deg, w)):
            raise InconclusiveTruncationError(
                f"wandering vector of degree {deg} touches the window {w}; "
                f"increase the degree cap")
    return WanderingBasis(vecs, pw.grid, q, degrees)


def assemble_inner(wb: WanderingBasis, tol: float = DEFAULT_CHECK_TOL
                   ) -> LaurentSymbol:
    """Inner symbol whose columns are the wandering vectors.

    Postconditions are enforced on every call: the symbol passes the exact
    innerness certificate and M_Theta M_Theta^* reproduces Q on the window.
    """
    g = wb.grid
    terms: dict[MultiIndex, np.ndarray] = {}
    blocks = wb.vectors.reshape(g.npoints, g.dim_out, wb.rank)
    for p, k in enumerate(g.indices):
        blk = blocks[p]
        if np.max(np.abs(blk)) > 1e-14:
            terms[k] = blk.copy()
    theta = LaurentSymbol(g.n, g.dim_out, wb.rank, terms)
    cert = is_inner(theta)
    if not cert.verdict:
        raise FactorizationError(
            f"range is not generated by a polynomial inner symbol at this "
            f"truncation (innerness defect {cert.residual:.3e})")
    qq = analytic_product_operator(theta, theta, g.D)
    w = min_window(qq, wb.q)
    require_window(w, g.D, "inner assembly")
    residual, _ = window_residual(qq.matrix - wb.q.matrix, g, w)
    if residual > tol:
        raise FactorizationError(
            f"assembled inner symbol does not reproduce the range projection "
            f"(defect {residual:.3e})")
    return theta


def inner_from_range(op: TruncatedOperator, side: str = "left",
                     tol: float = DEFAULT_CHECK_TOL) -> LaurentSymbol:
    """Inner generator of ran T (side="left") or ran T^* (side="right")."""
    q = symmetrized_gram(op, side)
    return assemble_inner(wandering_basis(q, tol), tol)


def _constant_block(op: TruncatedOperator) -> np.ndarray:
    zero = (0,) * op.grid.n
    return op.block(zero, zero).copy()


def _constancy_defect(op: TruncatedOperator, block: np.ndarray
                      ) -> tuple[float, tuple[int, ...]]:
    const = toeplitz_matrix(LaurentSymbol.constant(block, op.grid.n), op.grid)
    w = require_window(op.window, op.grid.D, "constancy test")
    residual, _ = window_residual(op.matrix - const.matrix, op.grid, w)
    return residual, w


@dataclass(frozen=True)
class Factorization:
    """T = M_gamma M_psi^* with both factors inner and the coupling absorbed."""

    gamma: LaurentSymbol
    psi: LaurentSymbol
    residual: float
    range_residual_left: float
    range_residual_right: float
    coupling: np.ndarray
    product_condition_holds: bool


def factor_partial_isometry(op: TruncatedOperator,
                            tol: float = DEFAULT_CHECK_TOL) -> Factorization:
    """Factor a partially isometric operator through its Beurling ranges.

    Gamma generates ran T, Psi_0 generates ran T^*; the coupling
    X = M_Gamma^* T M_Psi0 must compress to a constant unitary, which is
    absorbed into Psi = Psi_0 X^*.  Reconstruction and both range projections
    are verified within tol; the coefficient condition of the recovered pair
    is recorded (it holds exactly when T is genuinely of Toeplitz type).
    """
    pi = check_partial_isometry(op, tol)
    if not pi.verdict:
        raise PreconditionError(
            f"not a partial isometry at this truncation (defect {pi.residual:.3e})")
    q_left = symmetrized_gram(op, "left")
    q_right = symmetrized_gram(op, "right")
    gamma = assemble_inner(wandering_basis(q_left, tol), tol)
    psi0 = assemble_inner(wandering_basis(q_right, tol), tol)
    if gamma.dim_in != psi0.dim_in:
        raise FactorizationError(
            f"range ranks differ: {gamma.dim_in} vs {psi0.dim_in}; "
            "no unitary coupling exists")
    xop = compose([toeplitz_matrix(gamma, op.grid.D).adjoint(), op,
                   toeplitz_matrix(psi0, op.grid.D)])
    x = _constant_block(xop)
    defect, _ = _constancy_defect(xop, x)
    if defect > tol:
        raise FactorizationError(
            f"coupling between the ranges is not constant (defect {defect:.3e})")
    unitary_defect = float(np.max(np.abs(x @ x.conj().T - np.eye(x.shape[0]))))
    if unitary_defect > tol:
        raise FactorizationError(
            f"constant coupling is not unitary (defect {unitary_defect:.3e})")
    psi = multiply(psi0, LaurentSymbol.constant(x.conj().T, op.grid.n))
    recon = analytic_product_operator(gamma, psi, op.grid.D)
    w = require_window(min_window(recon, op), op.grid.D, "reconstruction")
    residual, _ = window_residual(recon.matrix - op.matrix, recon.grid, w)
    if residual > tol:
        raise FactorizationError(
            f"factor pair does not reconstruct the operator (defect {residual:.3e})")
    proj_left = analytic_product_operator(gamma, gamma, op.grid.D)
    rl, _ = window_residual(proj_left.matrix - q_left.matrix, q_left.grid,
                            min_window(proj_left, q_left))
    proj_right = analytic_product_operator(psi, psi, op.grid.D)
    rr, _ = window_residual(proj_right.matrix - q_right.matrix, q_right.grid,
                            min_window(proj_right, q_right))
    cond = coeff_condition(gamma, psi)
    return Factorization(gamma, psi, residual, rl, rr, x, cond.holds)


@dataclass(frozen=True)
class AnalyticFactorization:
    """Phi = Gamma V^* with Gamma inner and V a constant isometry."""

    gamma: LaurentSymbol
    isometry: np.ndarray
    residual: float


def analytic_factor(phi: LaurentSymbol, grid_or_degree=8,
                    tol: float = DEFAULT_CHECK_TOL) -> AnalyticFactorization:
    """Split a partially isometric analytic symbol into inner times constant."""
    if not phi.is_analytic:
        raise ValueError("analytic factorization needs an analytic symbol")
    D = grid_or_degree.D if isinstance(grid_or_degree, TruncationGrid) \
        else int(grid_or_degree)
    op = toeplitz_matrix(phi, D)
    pi = check_partial_isometry(op, tol)
    if not pi.verdict:
        raise PreconditionError(
            f"multiplication operator is not a partial isometry "
            f"(defect {pi.residual:.3e})")
    gamma = inner_from_range(op, "left", tol)
    xop = compose([toeplitz_matrix(gamma, D).adjoint(), op])
    c = _constant_block(xop)                      # approximates V^*
    defect, _ = _constancy_defect(xop, c)
    if defect > tol:
        raise FactorizationError(
            f"co-analytic part is not constant (defect {defect:.3e})")
    v = c.conj().T
    iso_defect = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))
    if iso_defect > tol:
        raise FactorizationError(
            f"extracted constant is not an isometry (defect {iso_defect:.3e})")
    residual = multiply(gamma, LaurentSymbol.constant(c, phi.n)).distance(phi)
    if residual > tol:
        raise FactorizationError(
            f"inner-times-constant form does not reproduce the symbol "
            f"(defect {residual:.3e})")
    return AnalyticFactorization(gamma, v, residual)


@dataclass(frozen=True)
class HyponormalFactorization:
    """T = M_psi M_theta M_psi^* with both symbols inner."""

    psi: LaurentSymbol
    theta: LaurentSymbol
    residual: float


def hyponormal_factor(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                      ) -> HyponormalFactorization:
    """Sandwich form for partially isometric hyponormal operators.

    Hyponormality forces ran T inside ran T^*, so the left inner factor
    divides by the right one: theta = psi^* gamma must come out analytic.  A
    non-analytic quotient means hyponormality fails at this truncation and is
    reported rather than truncated away.
    """
    hypo = check_hyponormal(op)
    if not hypo.verdict:
        raise PreconditionError(
            f"not hyponormal at this truncation (defect {hypo.residual:.3e})")
    fac = factor_partial_isometry(op, tol)
    raw = multiply(fac.psi.adjoint(), fac.gamma)
    neg_mass = 0.0
    analytic_terms = {}
    for k, mat in raw.terms.items():
        if min(k) < 0:
            neg_mass = max(neg_mass, float(np.max(np.abs(mat))))
        else:
            analytic_terms[k] = mat
    if neg_mass > tol:
        raise FactorizationError(
            f"quotient symbol has negative-frequency mass {neg_mass:.3e}; "
            "hyponormal sandwich form refuted at this truncation")
    theta = LaurentSymbol(raw.n, raw.dim_out, raw.dim_in, analytic_terms)
    cert = is_inner(theta)
    if not cert.verdict:
        raise FactorizationError(
            f"quotient symbol is not inner (defect {cert.residual:.3e})")
    mpsi = toeplitz_matrix(fac.psi, op.grid.D)
    recon = compose([mpsi, toeplitz_matrix(theta, op.grid.D), mpsi.adjoint()])
    w = require_window(min_window(recon, op), op.grid.D, "sandwich reconstruction")
    residual, _ = window_residual(recon.matrix - op.matrix, recon.grid, w)
    if residual > tol:
        raise FactorizationError(
            f"sandwich form does not reconstruct the operator "
            f"(defect {residual:.3e})")
    return HyponormalFactorization(fac.psi, theta, residual)


@dataclass(frozen=True)
class NormalFactorization:
    """T = M_psi U M_psi^* with psi inner and U a constant unitary."""

    psi: LaurentSymbol
    unitary: np.ndarray
    residual: float


def normal_factor(op: TruncatedOperator, tol: float = DEFAULT_CHECK_TOL
                  ) -> NormalFactorization:
    """Constant-core sandwich form for partially isometric normal operators."""
    norm_rep = check_normal(op, tol)
    if not norm_rep.verdict:
        raise PreconditionError(
            f"not normal at this truncation (defect {norm_rep.residual:.3e})")
    hf = hyponormal_factor(op, tol)
    zero = (0,) * hf.theta.n
    off_mass = max((float(np.max(np.abs(m))) for k, m in hf.theta.terms.items()
                    if k != zero), default=0.0)
    if off_mass > tol:
        raise FactorizationError(
            f"core symbol is not constant (off-constant mass {off_mass:.3e}); "
            "normal form refuted at this truncation")
    u = hf.theta.coeff(zero).copy()
    unitary_defect = float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))
    if unitary_defect > tol:
        raise FactorizationError(
            f"constant core is not unitary (defect {unitary_defect:.3e})")
    return NormalFactorization(hf.psi, u, hf.residual)
