"""Finite sections of multiplication, Toeplitz, Hankel and shift operators.

The model space is the span of monomials z^k with 0 <= k_i <= D, tensored
with a finite fiber, enumerated in graded-lexicographic order (total degree
first, ties lexicographic).  Truncation only cuts frequencies above D, so a
composition of operators built from symbols agrees with the composition of
the untruncated operators on every column whose degree stays clear of the cap:
each factor can raise the degree of its input by at most its positive band
radius, and columns indexed by k <= D - (sum of positive radii) are exact.
The bookkeeping here tracks positive and negative frequency transfer
separately and is conservative: it may under-claim exactness, never
over-claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import WindowExhaustedError
from .report import VerificationReport, make_report
from .symbol import LaurentSymbol, MultiIndex

DEFAULT_DEGREE = 8


@lru_cache(maxsize=None)
def _box_tables(n: int, D: int):
    """Graded-lex monomial order of {0..D}^n plus a position lookup table."""
    order = sorted(product(range(D + 1), repeat=n), key=lambda k: (sum(k), k))
    indices = np.array(order, dtype=int).reshape(len(order), n)
    postable = np.full((D + 1,) * n, -1, dtype=int)
    for p, k in enumerate(order):
        postable[k] = p
    indices.setflags(write=False)
    postable.setflags(write=False)
    return tuple(order), indices, postable


@lru_cache(maxsize=None)
def _negative_box_tables(n: int, D: int):
    """Indices q with |q_i| <= D and some q_i < 0, ordered by (sum |q_i|, q)."""
    order = sorted((q for q in product(range(-D, D + 1), repeat=n) if min(q) < 0),
                   key=lambda q: (sum(abs(c) for c in q), q))
    negtable = np.full((2 * D + 1,) * n, -1, dtype=int)
    for p, q in enumerate(order):
        negtable[tuple(c + D for c in q)] = p
    negtable.setflags(write=False)
    return tuple(order), negtable


@lru_cache(maxsize=None)
def _shift_maps(n: int, D: int, i: int):
    """fwd[p] = position of k+e_i (or -1), bwd[p] = position of k-e_i (or -1)."""
    order, indices, postable = _box_tables(n, D)
    npoints = len(order)
    fwd = np.full(npoints, -1, dtype=int)
    bwd = np.full(npoints, -1, dtype=int)
    for p, k in enumerate(order):
        if k[i - 1] < D:
            up = list(k)
            up[i - 1] += 1
            fwd[p] = postable[tuple(up)]
        if k[i - 1] > 0:
            dn = list(k)
            dn[i - 1] -= 1
            bwd[p] = postable[tuple(dn)]
    fwd.setflags(write=False)
    bwd.setflags(write=False)
    return fwd, bwd


@dataclass(frozen=True)
class TruncationGrid:
    """Finite model of the Hardy space pair an operator acts between.

    Rows carry fiber dimension dim_out, columns dim_in; both sides share the
    variable count n and the per-variable degree cap D.
    """

    n: int
    D: int
    dim_out: int
    dim_in: int

    def __post_init__(self):
        if self.n < 1 or self.D < 1:
            raise ValueError(f"need n >= 1 and D >= 1, got n={self.n}, D={self.D}")
        if self.dim_out < 1 or self.dim_in < 1:
            raise ValueError("fiber dimensions must be >= 1")

    @classmethod
    def square(cls, n: int, D: int, dim: int) -> "TruncationGrid":
        return cls(n, D, dim, dim)

    @property
    def indices(self) -> tuple[MultiIndex, ...]:
        return _box_tables(self.n, self.D)[0]

    @property
    def index_array(self) -> np.ndarray:
        return _box_tables(self.n, self.D)[1]

    @property
    def npoints(self) -> int:
        return (self.D + 1) ** self.n

    @property
    def size_out(self) -> int:
        return self.npoints * self.dim_out

    @property
    def size_in(self) -> int:
        return self.npoints * self.dim_in

    @property
    def is_square(self) -> bool:
        return self.dim_out == self.dim_in

    def pos(self, k: Iterable[int]) -> int:
        key = tuple(int(c) for c in k)
        p = int(_box_tables(self.n, self.D)[2][key])
        if p < 0:
            raise KeyError(f"{key} outside the degree box")
        return p

    def same_box(self, other: "TruncationGrid") -> bool:
        return self.n == other.n and self.D == other.D

    def out_space(self) -> "TruncationGrid":
        return TruncationGrid.square(self.n, self.D, self.dim_out)

    def in_space(self) -> "TruncationGrid":
        return TruncationGrid.square(self.n, self.D, self.dim_in)

    def window_positions(self, window: Iterable[int]) -> np.ndarray:
        """Monomial positions with k <= window componentwise."""
        w = _as_window(window, self.n)
        if min(w) < 0:
            raise WindowExhaustedError(
                f"window {w} is empty; increase the degree cap beyond "
                f"D={self.D} by {-min(w)}", self.D - min(w))
        mask = np.all(self.index_array <= np.array(w), axis=1)
        return np.nonzero(mask)[0]


def _as_window(window, n: int) -> tuple[int, ...]:
    if isinstance(window, (int, np.integer)):
        return (int(window),) * n
    w = tuple(int(c) for c in window)
    if len(w) != n:
        raise ValueError(f"window has length {len(w)}, expected {n}")
    return w


def _expand(block_positions: np.ndarray, dim: int) -> np.ndarray:
    return (block_positions[:, None] * dim + np.arange(dim)[None, :]).ravel()


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense matrix on the grid basis with frequency-transfer bookkeeping.

    raise_radius / drop_radius bound how far the underlying operator moves
    frequencies up / down per variable; window is the per-variable bound on
    exact columns, D - raise_radius.  For hand-built matrices the caller
    declares the radii.
    """

    matrix: np.ndarray
    grid: TruncationGrid
    raise_radius: tuple[int, ...]
    drop_radius: tuple[int, ...]
    provenance: str = "operator"

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.grid.size_out, self.grid.size_in):
            raise ValueError(
                f"matrix shape {mat.shape} does not match grid "
                f"({self.grid.size_out}, {self.grid.size_in})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "raise_radius", _as_window(self.raise_radius, self.grid.n))
        object.__setattr__(self, "drop_radius", _as_window(self.drop_radius, self.grid.n))

    @property
    def band_radius(self) -> tuple[int, ...]:
        return tuple(max(r, d) for r, d in zip(self.raise_radius, self.drop_radius))

    @property
    def window(self) -> tuple[int, ...]:
        return tuple(self.grid.D - r for r in self.raise_radius)

    def adjoint(self) -> "TruncatedOperator":
        g = self.grid
        return TruncatedOperator(
            self.matrix.conj().T,
            TruncationGrid(g.n, g.D, g.dim_in, g.dim_out),
            self.drop_radius, self.raise_radius,
            f"adjoint({self.provenance})")

    def _combine(self, other: "TruncatedOperator", sign: float, tag: str):
        if self.grid != other.grid:
            raise ValueError("operators live on different grids")
        return TruncatedOperator(
            self.matrix + sign * other.matrix, self.grid,
            tuple(map(max, self.raise_radius, other.raise_radius)),
            tuple(map(max, self.drop_radius, other.drop_radius)),
            f"{self.provenance}{tag}{other.provenance}")

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return self._combine(other, 1.0, "+")

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return self._combine(other, -1.0, "-")

    def block(self, m: Iterable[int], l: Iterable[int]) -> np.ndarray:
        g = self.grid
        r = g.pos(m) * g.dim_out
        c = g.pos(l) * g.dim_in
        return self.matrix[r:r + g.dim_out, c:c + g.dim_in]


def operator_from_matrix(matrix, grid: TruncationGrid, raise_radius=0,
                         drop_radius=0, provenance: str = "manual"
                         ) -> TruncatedOperator:
    """Wrap a hand-built matrix; the caller declares the frequency radii."""
    return TruncatedOperator(np.asarray(matrix, dtype=complex), grid,
                             _as_window(raise_radius, grid.n),
                             _as_window(drop_radius, grid.n), provenance)


def _resolve_grid(grid_or_degree, phi: LaurentSymbol) -> TruncationGrid:
    if isinstance(grid_or_degree, TruncationGrid):
        g = grid_or_degree
        if g.n != phi.n:
            raise ValueError(f"grid has n={g.n}, symbol has n={phi.n}")
        if (g.dim_out, g.dim_in) != (phi.dim_out, phi.dim_in):
            raise ValueError(
                f"grid fibers {g.dim_out}x{g.dim_in} do not match symbol "
                f"{phi.dim_out}x{phi.dim_in}")
        return g
    return TruncationGrid(phi.n, int(grid_or_degree), phi.dim_out, phi.dim_in)


# -- constructors from symbols -------------------------------------------------


def toeplitz_matrix(phi: LaurentSymbol, grid_or_degree=DEFAULT_DEGREE
                    ) -> TruncatedOperator:
    """Compression of multiplication by phi: block (m, l) = phi^(m - l)."""
    g = _resolve_grid(grid_or_degree, phi)
    _, indices, postable = _box_tables(g.n, g.D)
    mat4 = np.zeros((g.npoints, g.dim_out, g.npoints, g.dim_in), dtype=complex)
    for k, coeff in phi.terms.items():
        tgt = indices + np.array(k)
        ok = np.all((tgt >= 0) & (tgt <= g.D), axis=1)
        if not ok.any():
            continue
        rows = postable[tuple(tgt[ok].T)]
        cols = np.nonzero(ok)[0]
        mat4[rows, :, cols, :] = coeff
    return TruncatedOperator(mat4.reshape(g.size_out, g.size_in), g,
                             phi.raise_radius, phi.drop_radius, "toeplitz")


def mult_shift_matrix(i: int, grid: TruncationGrid) -> TruncatedOperator:
    """Multiplication by the i-th coordinate (1-based) on a square grid."""
    if not grid.is_square:
        raise ValueError("shifts act on a single space; grid must be square")
    if not 1 <= i <= grid.n:
        raise ValueError(f"variable index {i} outside 1..{grid.n}")
    fwd, _ = _shift_maps(grid.n, grid.D, i)
    d = grid.dim_out
    mat = np.zeros((grid.size_out, grid.size_in), dtype=complex)
    src = np.nonzero(fwd >= 0)[0]
    mat[_expand(fwd[src], d), _expand(src, d)] = 1.0
    e = tuple(1 if j == i - 1 else 0 for j in range(grid.n))
    return TruncatedOperator(mat, grid, e, (0,) * grid.n, f"shift_{i}")


def identity_operator(grid: TruncationGrid) -> TruncatedOperator:
    if not grid.is_square:
        raise ValueError("identity needs a square grid")
    return TruncatedOperator(np.eye(grid.size_out, dtype=complex), grid,
                             (0,) * grid.n, (0,) * grid.n, "identity")


def degree_zero_projection(grid: TruncationGrid) -> TruncatedOperator:
    """Orthogonal projection onto the constant-monomial fiber block."""
    if not grid.is_square:
        raise ValueError("projections need a square grid")
    mat = np.zeros((grid.size_out, grid.size_in), dtype=complex)
    p = grid.pos((0,) * grid.n) * grid.dim_out
    for j in range(grid.dim_out):
        mat[p + j, p + j] = 1.0
    return TruncatedOperator(mat, grid, (0,) * grid.n, (0,) * grid.n, "P0")


@dataclass(frozen=True)
class HankelOperator:
    """Un-rotated Hankel section: rows over the negative-frequency box.

    Maps the grid columns into the span of z^q with |q_i| <= D and some
    q_i < 0; block (q, l) = phi^(q - l).  Row order is fixed by
    (sum |q_i|, q) so adjoint products of two Hankel sections line up.
    """

    matrix: np.ndarray
    row_indices: tuple[MultiIndex, ...]
    grid: TruncationGrid

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def hankel_matrix(phi: LaurentSymbol, grid_or_degree=DEFAULT_DEGREE
                  ) -> HankelOperator:
    g = _resolve_grid(grid_or_degree, phi)
    neg_order, negtable = _negative_box_tables(g.n, g.D)
    _, indices, _ = _box_tables(g.n, g.D)
    nneg = len(neg_order)
    mat4 = np.zeros((nneg, g.dim_out, g.npoints, g.dim_in), dtype=complex)
    for k, coeff in phi.terms.items():
        tgt = indices + np.array(k)  # q = l + k
        inside = np.all(np.abs(tgt) <= g.D, axis=1) & (tgt.min(axis=1) < 0)
        if not inside.any():
            continue
        rows = negtable[tuple((tgt[inside] + g.D).T)]
        cols = np.nonzero(inside)[0]
        mat4[rows, :, cols, :] = coeff
    return HankelOperator(mat4.reshape(nneg * g.dim_out, g.size_in), neg_order, g)


def hankel_adjoint_product(left: HankelOperator, right: HankelOperator
                           ) -> np.ndarray:
    """Matrix of left^* right, both sections sharing the negative box."""
    if left.row_indices != right.row_indices:
        raise ValueError("Hankel sections use different row orders")
    if left.grid.dim_out != right.grid.dim_out:
        raise ValueError("Hankel sections have mismatched intermediate fibers")
    return left.matrix.conj().T @ right.matrix


def analytic_product_operator(gamma: LaurentSymbol, psi: LaurentSymbol,
                              grid_or_degree=DEFAULT_DEGREE) -> TruncatedOperator:
    """Truncation of M_gamma M_psi^* assembled from the bands directly.

    Equals compose(toeplitz(gamma), toeplitz(psi).adjoint()) but costs
    O(T_gamma T_psi (D+1)^n) block writes instead of a dense matrix product:
    block (a + q, b + q) accumulates gamma^(a) psi^(b)* over grid points q.
    """
    if not (gamma.is_analytic and psi.is_analytic):
        raise ValueError("both factors must be analytic")
    if gamma.n != psi.n:
        raise ValueError("variable counts differ")
    if gamma.dim_in != psi.dim_in:
        raise ValueError(
            f"inner fibers do not chain: {gamma.dim_in} vs {psi.dim_in}")
    n = gamma.n
    D = grid_or_degree.D if isinstance(grid_or_degree, TruncationGrid) else int(grid_or_degree)
    g = TruncationGrid(n, D, gamma.dim_out, psi.dim_out)
    _, indices, postable = _box_tables(n, D)
    mat4 = np.zeros((g.npoints, g.dim_out, g.npoints, g.dim_in), dtype=complex)
    for a, am in gamma.terms.items():
        ra = indices + np.array(a)
        ok_a = np.all(ra <= D, axis=1)
        for b, bm in psi.terms.items():
            cb = indices + np.array(b)
            ok = ok_a & np.all(cb <= D, axis=1)
            if not ok.any():
                continue
            rows = postable[tuple(ra[ok].T)]
            cols = postable[tuple(cb[ok].T)]
            mat4[rows, :, cols, :] += am @ bm.conj().T
    return TruncatedOperator(mat4.reshape(g.size_out, g.size_in), g,
                             gamma.raise_radius, psi.raise_radius,
                             "analytic_product")


# -- composition and fast shift application ------------------------------------


def compose(ops: Sequence[TruncatedOperator],
            adjoints: Sequence[bool] | None = None) -> TruncatedOperator:
    """Product of a chain of operators, leftmost applied last.

    Radii add componentwise; the resulting window is the set of columns on
    which the truncated chain equals the untruncated one.
    """
    if adjoints is not None:
        if len(adjoints) != len(ops):
            raise ValueError("one adjoint flag per operator required")
        ops = [op.adjoint() if flag else op for op, flag in zip(ops, adjoints)]
    if not ops:
        raise ValueError("empty composition")
    for left, right in zip(ops, ops[1:]):
        if not left.grid.same_box(right.grid):
            raise ValueError("operators live over different degree boxes")
        if left.grid.dim_in != right.grid.dim_out:
            raise ValueError(
                f"fibers do not chain: {left.grid.dim_in} vs {right.grid.dim_out}")
    mat = ops[0].matrix
    for op in ops[1:]:
        mat = mat @ op.matrix
    n, D = ops[0].grid.n, ops[0].grid.D
    g = TruncationGrid(n, D, ops[0].grid.dim_out, ops[-1].grid.dim_in)
    rr = tuple(sum(op.raise_radius[i] for op in ops) for i in range(n))
    dr = tuple(sum(op.drop_radius[i] for op in ops) for i in range(n))
    return TruncatedOperator(mat, g, rr, dr,
                             "*".join(op.provenance for op in ops))


def _remap_rows(mat: np.ndarray, dim: int, dest_of_src: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mat)
    src = np.nonzero(dest_of_src >= 0)[0]
    out[_expand(dest_of_src[src], dim), :] = mat[_expand(src, dim), :]
    return out


def _remap_cols(mat: np.ndarray, dim: int, src_of_dest: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mat)
    dest = np.nonzero(src_of_dest >= 0)[0]
    out[:, _expand(dest, dim)] = mat[:, _expand(src_of_dest[dest], dim)]
    return out


def lshift(op: TruncatedOperator, i: int, adjoint: bool = False
           ) -> TruncatedOperator:
    """S_i op (or S_i^* op), applied by block reindexing instead of a matmul."""
    g = op.grid
    fwd, bwd = _shift_maps(g.n, g.D, i)
    e = tuple(1 if j == i - 1 else 0 for j in range(g.n))
    if adjoint:
        # (S^* A)[m] = A[m + e_i]: row m receives old row m + e_i
        mat = _remap_rows(op.matrix, g.dim_out, bwd)
        rr, dr = op.raise_radius, tuple(map(sum, zip(op.drop_radius, e)))
        tag = f"S{i}^**{op.provenance}"
    else:
        mat = _remap_rows(op.matrix, g.dim_out, fwd)
        rr, dr = tuple(map(sum, zip(op.raise_radius, e))), op.drop_radius
        tag = f"S{i}*{op.provenance}"
    return TruncatedOperator(mat, g, rr, dr, tag)


def rshift(op: TruncatedOperator, i: int, adjoint: bool = False
           ) -> TruncatedOperator:
    """op S_i (or op S_i^*), applied by block reindexing instead of a matmul."""
    g = op.grid
    fwd, bwd = _shift_maps(g.n, g.D, i)
    e = tuple(1 if j == i - 1 else 0 for j in range(g.n))
    if adjoint:
        # (A S^*)[:, l] = A[:, l - e_i]
        mat = _remap_cols(op.matrix, g.dim_in, bwd)
        rr, dr = op.raise_radius, tuple(map(sum, zip(op.drop_radius, e)))
        tag = f"{op.provenance}*S{i}^*"
    else:
        # (A S)[:, l] = A[:, l + e_i]
        mat = _remap_cols(op.matrix, g.dim_in, fwd)
        rr, dr = tuple(map(sum, zip(op.raise_radius, e))), op.drop_radius
        tag = f"{op.provenance}*S{i}"
    return TruncatedOperator(mat, g, rr, dr, tag)


def shift_sandwich(op: TruncatedOperator, i: int) -> TruncatedOperator:
    """S_i^* op S_i: block (m, l) moves to block (m + e_i, l + e_i)."""
    return lshift(rshift(op, i), i, adjoint=True)


# -- window comparison ----------------------------------------------------------


def window_residual(diff: np.ndarray, grid: TruncationGrid,
                    window) -> tuple[float, str]:
    """Max-entry norm of diff over the window columns (all rows) + witness."""
    cols = grid.window_positions(window)
    sub = np.abs(diff[:, _expand(cols, grid.dim_in)])
    if sub.size == 0:
        return 0.0, ""
    flat = int(np.argmax(sub))
    r, c = np.unravel_index(flat, sub.shape)
    residual = float(sub[r, c])
    m = grid.indices[r // grid.dim_out]
    l = grid.indices[cols[c // grid.dim_in]]
    witness = (f"block(m={m},l={l})[{r % grid.dim_out},{c % grid.dim_in}]")
    return residual, witness


def min_window(*ops) -> tuple[int, ...]:
    ws = [op.window for op in ops]
    return tuple(min(w[i] for w in ws) for i in range(len(ws[0])))


def require_window(window, D: int, context: str, needed: int | None = None
                   ) -> tuple[int, ...]:
    w = tuple(window)
    if min(w) < 0:
        need = needed if needed is not None else D - min(w)
        raise WindowExhaustedError(
            f"{context}: window {w} exhausted at D={D}; rerun with degree "
            f">= {need}", need)
    return w


def compare_on_window(x: TruncatedOperator, y: TruncatedOperator,
                      tol: float, window=None, name: str = "compare"
                      ) -> VerificationReport:
    """Max-entry norm of x - y over the shared exact columns."""
    if x.grid != y.grid:
        raise ValueError("operators live on different grids")
    w = min_window(x, y) if window is None else _as_window(window, x.grid.n)
    w = require_window(w, x.grid.D, name)
    residual, witness = window_residual(x.matrix - y.matrix, x.grid, w)
    return make_report(name, residual, tol, w, witness)


def window_compression(op: TruncatedOperator, window=None) -> np.ndarray:
    """Square submatrix on rows and columns indexed inside the window."""
    if not op.grid.is_square:
        raise ValueError("window compression needs a square grid")
    w = op.window if window is None else _as_window(window, op.grid.n)
    w = require_window(w, op.grid.D, "window compression")
    pos = op.grid.window_positions(w)
    sel = _expand(pos, op.grid.dim_out)
    return op.matrix[np.ix_(sel, sel)]


def dense_dump(op: TruncatedOperator) -> str:
    """Debug dump: one row per line, entries as 're im' pairs, row-major."""
    lines = []
    for row in op.matrix:
        lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"
