"""Matrix-valued Laurent polynomials on the n-torus.

A symbol is a finite sum Phi(z) = sum_k C_k z^k with k ranging over a finite
subset of Z^n and each C_k a dense complex (dim_out, dim_in) matrix.  Every
higher layer of the package (truncated operators, product decompositions,
inner factorizations) reduces to the exact coefficient calculus implemented
here: evaluation, boundary adjoint, convolution product, coordinate zeroing,
and the pointwise isometry / partial-isometry certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

MultiIndex = tuple[int, ...]

#: max-entry tolerance for symbol-level identities
DEFAULT_TOL = 1e-10

#: canonical form drops coefficients whose max-entry norm is below this
COEFF_DROP_TOL = 1e-14


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _index_sort_key(k: MultiIndex):
    # graded order by total absolute degree, ties broken lexicographically
    return (sum(abs(c) for c in k), k)


class LaurentSymbol:
    """Finite matrix-valued Laurent polynomial, immutable after construction.

    Coefficient arrays are copied in and marked read-only, so symbols can be
    shared freely between threads; no operation mutates its arguments.
    """

    __slots__ = ("n", "dim_out", "dim_in", "_terms")

    def __init__(self, n: int, dim_out: int, dim_in: int,
                 terms: Mapping[Iterable[int], np.ndarray],
                 *, drop_tol: float = COEFF_DROP_TOL):
        if n < 1:
            raise ValueError(f"number of variables must be >= 1, got {n}")
        if dim_out < 1 or dim_in < 1:
            raise ValueError(f"fiber dimensions must be >= 1, got {dim_out}x{dim_in}")
        canon: dict[MultiIndex, np.ndarray] = {}
        for key, mat in terms.items():
            k = tuple(int(c) for c in key)
            if len(k) != n:
                raise ValueError(f"exponent {k} has length {len(k)}, expected {n}")
            arr = np.array(mat, dtype=complex)
            if arr.shape != (dim_out, dim_in):
                raise ValueError(
                    f"coefficient at {k} has shape {arr.shape}, "
                    f"expected ({dim_out}, {dim_in})")
            if _max_abs(arr) <= drop_tol:
                continue
            arr.setflags(write=False)
            canon[k] = arr
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dim_out", dim_out)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "_terms", canon)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentSymbol is immutable")

    # -- basic views ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[MultiIndex, np.ndarray]:
        return MappingProxyType(self._terms)

    @property
    def support(self) -> tuple[MultiIndex, ...]:
        return tuple(sorted(self._terms, key=_index_sort_key))

    def coeff(self, k: Iterable[int]) -> np.ndarray:
        key = tuple(int(c) for c in k)
        got = self._terms.get(key)
        if got is not None:
            return got
        return np.zeros((self.dim_out, self.dim_in), dtype=complex)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_analytic(self) -> bool:
        return all(min(k) >= 0 for k in self._terms) if self._terms else True

    @property
    def band_radius(self) -> MultiIndex:
        """Componentwise max of |k_i| over the support."""
        out = [0] * self.n
        for k in self._terms:
            for i, c in enumerate(k):
                out[i] = max(out[i], abs(c))
        return tuple(out)

    @property
    def raise_radius(self) -> MultiIndex:
        """Componentwise max positive frequency transfer."""
        out = [0] * self.n
        for k in self._terms:
            for i, c in enumerate(k):
                out[i] = max(out[i], c)
        return tuple(out)

    @property
    def drop_radius(self) -> MultiIndex:
        """Componentwise max negative frequency transfer."""
        out = [0] * self.n
        for k in self._terms:
            for i, c in enumerate(k):
                out[i] = max(out[i], -c)
        return tuple(out)

    def variables_used(self) -> frozenset[int]:
        """1-based indices of variables the symbol actually depends on."""
        used = set()
        for k in self._terms:
            for i, c in enumerate(k):
                if c != 0:
                    used.add(i + 1)
        return frozenset(used)

    def max_coeff_norm(self) -> float:
        return max((_max_abs(c) for c in self._terms.values()), default=0.0)

    def __repr__(self) -> str:
        return (f"LaurentSymbol(n={self.n}, dims={self.dim_out}x{self.dim_in}, "
                f"nterms={len(self._terms)})")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, n: int, dim_out: int, dim_in: int) -> "LaurentSymbol":
        return cls(n, dim_out, dim_in, {})

    @classmethod
    def constant(cls, matrix, n: int) -> "LaurentSymbol":
        mat = np.atleast_2d(np.array(matrix, dtype=complex))
        return cls(n, mat.shape[0], mat.shape[1], {(0,) * n: mat})

    @classmethod
    def monomial(cls, n: int, k: Iterable[int], matrix) -> "LaurentSymbol":
        mat = np.atleast_2d(np.array(matrix, dtype=complex))
        return cls(n, mat.shape[0], mat.shape[1], {tuple(k): mat})

    # -- exact calculus ------------------------------------------------------

    def evaluate(self, z) -> np.ndarray:
        """Direct substitution sum_k C_k z^k (exact finite sum).

        Negative exponents require the corresponding coordinate to be nonzero.
        """
        zv = np.asarray(z, dtype=complex).reshape(-1)
        if zv.shape != (self.n,):
            raise ValueError(f"point has {zv.size} coordinates, expected {self.n}")
        drops = self.drop_radius
        for i in range(self.n):
            if drops[i] > 0 and zv[i] == 0:
                raise ZeroDivisionError(
                    f"coordinate {i + 1} is zero but exponent {-drops[i]} occurs")
        out = np.zeros((self.dim_out, self.dim_in), dtype=complex)
        for k, c in self._terms.items():
            w = 1.0 + 0.0j
            for i, e in enumerate(k):
                w *= zv[i] ** e
            out += w * c
        return out

    def adjoint(self) -> "LaurentSymbol":
        """Boundary adjoint: coefficient at k becomes conj-transpose of -k."""
        terms = {tuple(-c for c in k): m.conj().T for k, m in self._terms.items()}
        return LaurentSymbol(self.n, self.dim_in, self.dim_out, terms)

    def restrict_zero(self, zero_vars: Iterable[int]) -> "LaurentSymbol":
        """Set the listed variables (1-based) to zero.

        Only defined for analytic symbols: kept terms are exactly those with
        zero exponent in every listed variable.
        """
        if not self.is_analytic:
            raise ValueError("coordinate zeroing is only defined for analytic symbols")
        vs = sorted({int(v) for v in zero_vars})
        if vs and (vs[0] < 1 or vs[-1] > self.n):
            raise ValueError(f"variable indices must lie in 1..{self.n}, got {vs}")
        pos = [v - 1 for v in vs]
        terms = {k: m for k, m in self._terms.items()
                 if all(k[p] == 0 for p in pos)}
        return LaurentSymbol(self.n, self.dim_out, self.dim_in, terms)

    def _combine(self, other: "LaurentSymbol", factor: complex) -> "LaurentSymbol":
        if (self.n, self.dim_out, self.dim_in) != (other.n, other.dim_out, other.dim_in):
            raise ValueError("symbols have incompatible shapes")
        terms: dict[MultiIndex, np.ndarray] = {k: m.copy() for k, m in self._terms.items()}
        for k, m in other._terms.items():
            if k in terms:
                terms[k] = terms[k] + factor * m
            else:
                terms[k] = factor * m
        return LaurentSymbol(self.n, self.dim_out, self.dim_in, terms)

    def __add__(self, other: "LaurentSymbol") -> "LaurentSymbol":
        return self._combine(other, 1.0)

    def __sub__(self, other: "LaurentSymbol") -> "LaurentSymbol":
        return self._combine(other, -1.0)

    def __neg__(self) -> "LaurentSymbol":
        return self.scaled(-1.0)

    def scaled(self, factor: complex) -> "LaurentSymbol":
        return LaurentSymbol(self.n, self.dim_out, self.dim_in,
                             {k: factor * m for k, m in self._terms.items()})

    def __matmul__(self, other: "LaurentSymbol") -> "LaurentSymbol":
        return multiply(self, other)

    def distance(self, other: "LaurentSymbol") -> float:
        """Max-entry norm of the coefficientwise difference."""
        return (self - other).max_coeff_norm()


# -- module-level operations -------------------------------------------------


def adjoint_symbol(phi: LaurentSymbol) -> LaurentSymbol:
    return phi.adjoint()


def multiply(phi: LaurentSymbol, psi: LaurentSymbol) -> LaurentSymbol:
    """Coefficient convolution: (phi psi)^(m) = sum_k phi^(k) psi^(m-k)."""
    if phi.n != psi.n:
        raise ValueError(f"variable counts differ: {phi.n} vs {psi.n}")
    if phi.dim_in != psi.dim_out:
        raise ValueError(
            f"inner dimensions do not chain: {phi.dim_in} vs {psi.dim_out}")
    acc: dict[MultiIndex, np.ndarray] = {}
    for k, a in phi.terms.items():
        for l, b in psi.terms.items():
            m = tuple(ki + li for ki, li in zip(k, l))
            prod = a @ b
            if m in acc:
                acc[m] = acc[m] + prod
            else:
                acc[m] = prod
    return LaurentSymbol(phi.n, phi.dim_out, psi.dim_in, acc)


def restrict_zero(phi: LaurentSymbol, zero_vars: Iterable[int]) -> LaurentSymbol:
    return phi.restrict_zero(zero_vars)


@dataclass(frozen=True)
class InnerCertificate:
    """Outcome of the exact innerness test conv(Theta*, Theta) = delta_0 I."""

    verdict: bool
    residual: float
    worst_index: MultiIndex
    tol: float

    def __bool__(self) -> bool:
        return self.verdict


def is_inner(theta: LaurentSymbol, tol: float = DEFAULT_TOL) -> InnerCertificate:
    """Certify that theta(z) is an isometry on the whole torus.

    For polynomial symbols this is an exact finite check: the convolution of
    the adjoint with the symbol must equal the constant identity on the input
    fiber.
    """
    if not theta.is_analytic:
        raise ValueError("innerness is only defined for analytic symbols")
    prod = multiply(theta.adjoint(), theta)
    zero = (0,) * theta.n
    eye = np.eye(theta.dim_in)
    worst, worst_k = 0.0, zero
    keys = set(prod.terms) | {zero}
    for k in sorted(keys, key=_index_sort_key):
        target = eye if k == zero else 0.0
        r = _max_abs(prod.coeff(k) - target)
        if r > worst:
            worst, worst_k = r, k
    return InnerCertificate(worst <= tol, worst, worst_k, tol)


@dataclass(frozen=True)
class PartialIsometryCertificate:
    """Exact and sampled residuals of phi phi* phi = phi on the torus."""

    verdict: bool
    residual_exact: float
    residual_sampled: float
    sample_count: int
    tol: float

    def __bool__(self) -> bool:
        return self.verdict


def is_partial_isometry_ae(phi: LaurentSymbol, sample_count: int = 50,
                           tol: float = DEFAULT_TOL, seed: int = 0
                           ) -> PartialIsometryCertificate:
    """Decide whether phi(z) is a partial isometry at almost every torus point.

    The exact path checks the polynomial identity phi phi* phi = phi by
    coefficient convolution and is authoritative; the sampled path evaluates
    the pointwise defect at random torus points as a cross-check.
    """
    triple = multiply(phi, multiply(phi.adjoint(), phi))
    exact = triple.distance(phi)
    rng = np.random.default_rng(seed)
    sampled = 0.0
    for _ in range(sample_count):
        z = np.exp(2j * np.pi * rng.random(phi.n))
        m = phi.evaluate(z)
        sampled = max(sampled, _max_abs(m @ m.conj().T @ m - m))
    return PartialIsometryCertificate(exact <= tol, exact, sampled,
                                      sample_count, tol)


# -- structured random generators ---------------------------------------------


def _crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(_crandn(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_isometry(rng: np.random.Generator, dim_out: int, rank: int) -> np.ndarray:
    if dim_out < rank:
        raise ValueError(f"no isometry from C^{rank} into C^{dim_out}")
    q, r = np.linalg.qr(_crandn(rng, dim_out, rank))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _monomial_diagonal(n: int, v: np.ndarray, exponents: np.ndarray,
                       w: np.ndarray) -> LaurentSymbol:
    """Assemble V diag(z^alpha_j) W from its columns."""
    dim_out, rank = v.shape
    acc: dict[MultiIndex, np.ndarray] = {}
    for j in range(rank):
        k = tuple(int(c) for c in exponents[j])
        block = np.outer(v[:, j], w[j, :])
        if k in acc:
            acc[k] = acc[k] + block
        else:
            acc[k] = block
    return LaurentSymbol(n, dim_out, rank, acc)


def random_inner(n: int, dim_out: int, dim_in: int,
                 exponent_bound: int = 1, seed: int = 0) -> LaurentSymbol:
    """Random inner symbol V diag(z^alpha_j) W.

    V is a constant isometry, W a constant unitary, and the alpha_j are random
    analytic exponents bounded per variable.  This monomial-diagonal family is
    a deliberate subclass of all polynomial inner symbols, not an exhaustive
    parametrization.
    """
    if dim_out < dim_in:
        raise ValueError(
            f"inner symbols need dim_out >= dim_in, got {dim_out} < {dim_in}")
    rng = np.random.default_rng(seed)
    v = random_isometry(rng, dim_out, dim_in)
    w = random_unitary(rng, dim_in)
    alphas = rng.integers(0, exponent_bound + 1, size=(dim_in, n))
    return _monomial_diagonal(n, v, alphas, w)


def random_inner_pair(n: int, dim_out: int, rank: int,
                      exponent_bound: int = 1, seed: int = 0
                      ) -> tuple[LaurentSymbol, LaurentSymbol]:
    """Random inner pair (Gamma, Psi) whose shifted coefficient products vanish.

    Both symbols share the same inner unitary factor, so cross terms between
    different diagonal slots cancel by row orthogonality; within each slot the
    two exponent vectors are supported on disjoint variables, so no shifted
    product survives.  The pair therefore defines a partially isometric
    operator of Toeplitz type, with both factors genuinely nonconstant once
    rank >= 2.
    """
    if dim_out < rank:
        raise ValueError(
            f"inner symbols need dim_out >= rank, got {dim_out} < {rank}")
    rng = np.random.default_rng(seed)
    shared_w = random_unitary(rng, rank)
    v_left = random_isometry(rng, dim_out, rank)
    v_right = random_isometry(rng, dim_out, rank)
    alphas = np.zeros((rank, n), dtype=int)
    betas = np.zeros((rank, n), dtype=int)
    for j in range(rank):
        left_vars = rng.integers(0, 2, size=n).astype(bool)
        a = rng.integers(0, exponent_bound + 1, size=n)
        b = rng.integers(0, exponent_bound + 1, size=n)
        a[~left_vars] = 0
        b[left_vars] = 0
        alphas[j], betas[j] = a, b
    return (_monomial_diagonal(n, v_left, alphas, shared_w),
            _monomial_diagonal(n, v_right, betas, shared_w))


def _random_support(rng: np.random.Generator, n: int, degree: int,
                    count: int) -> list[MultiIndex]:
    """Distinct nonzero analytic exponents with entries <= degree."""
    seen: set[MultiIndex] = set()
    guard = 0
    while len(seen) < count and guard < 200:
        k = tuple(int(c) for c in rng.integers(0, degree + 1, size=n))
        guard += 1
        if any(k):
            seen.add(k)
    return sorted(seen, key=_index_sort_key)


def random_product_pair(n: int, dim_out: int, dim_in: int, degree: int = 2,
                        satisfy: bool = True, seed: int = 0
                        ) -> tuple[LaurentSymbol, LaurentSymbol]:
    """Random analytic pair (Gamma, Psi), a positive or negative instance of
    the shifted-coefficient condition A_{l+e_i} B*_{m+e_i} = 0.

    satisfy=True builds every nonconstant Gamma-coefficient as x y* and every
    nonconstant Psi-coefficient as w v* with y and v supported on disjoint
    fiber coordinates, so all the shifted products vanish exactly (not just to
    roundoff).  satisfy=False draws dense coefficients and guarantees at least
    one shifted product with max-entry norm >= 0.1.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1 so the condition has content")
    rng = np.random.default_rng(seed)
    if satisfy:
        if dim_in < 2:
            raise ValueError("satisfying instances need dim_in >= 2")
        half = dim_in // 2
        y = np.zeros(dim_in, dtype=complex)
        v = np.zeros(dim_in, dtype=complex)
        y[:half] = _crandn(rng, half)
        v[half:] = _crandn(rng, dim_in - half)
        y /= np.linalg.norm(y)
        v /= np.linalg.norm(v)
        gterms: dict[MultiIndex, np.ndarray] = {
            (0,) * n: _crandn(rng, dim_out, dim_in)}
        for k in _random_support(rng, n, degree, int(rng.integers(2, 5))):
            gterms[k] = np.outer(_crandn(rng, dim_out), y.conj())
        pterms: dict[MultiIndex, np.ndarray] = {
            (0,) * n: _crandn(rng, dim_out, dim_in)}
        for k in _random_support(rng, n, degree, int(rng.integers(2, 5))):
            pterms[k] = np.outer(_crandn(rng, dim_out), v.conj())
        return (LaurentSymbol(n, dim_out, dim_in, gterms),
                LaurentSymbol(n, dim_out, dim_in, pterms))

    for _ in range(20):
        gterms = {(0,) * n: _crandn(rng, dim_out, dim_in)}
        for k in _random_support(rng, n, degree, int(rng.integers(2, 5))):
            gterms[k] = _crandn(rng, dim_out, dim_in)
        pterms = {(0,) * n: _crandn(rng, dim_out, dim_in)}
        for k in _random_support(rng, n, degree, int(rng.integers(2, 5))):
            pterms[k] = _crandn(rng, dim_out, dim_in)
        gamma = LaurentSymbol(n, dim_out, dim_in, gterms)
        psi = LaurentSymbol(n, dim_out, dim_in, pterms)
        worst = 0.0
        for l, a in gamma.terms.items():
            if not any(l):
                continue
            for m, b in psi.terms.items():
                if not any(m):
                    continue
                if any(li >= 1 and mi >= 1 for li, mi in zip(l, m)):
                    worst = max(worst, _max_abs(a @ b.conj().T))
        if worst >= 0.1:
            return gamma, psi
    # deterministic fallback: plant an order-one violation on the first variable
    bump = np.zeros((dim_out, dim_in), dtype=complex)
    bump[0, 0] = 1.0
    e1 = (1,) + (0,) * (n - 1)
    gterms[e1] = bump
    pterms[e1] = bump
    return (LaurentSymbol(n, dim_out, dim_in, gterms),
            LaurentSymbol(n, dim_out, dim_in, pterms))
