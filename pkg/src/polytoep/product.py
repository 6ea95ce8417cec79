"""Deciding and decomposing products M_Gamma M_Psi^*.

For analytic matrix symbols Gamma, Psi the product of the multiplication
operator with the adjoint multiplication operator is a Toeplitz operator
exactly when every shifted coefficient product A_{l+e_i} B_{m+e_i}^*
vanishes; equivalently, when the bilinear point condition
(Gamma - Gamma_k)(lambda) (Psi - Psi_k)(mu)^* = 0 holds on the polydisc for
every coordinate k.  Under that condition the product rewrites into a signed
sum of elementary terms M_{Gamma_A} M_{Psi_B}^* over the pairs of zero-sets
with A u B = {1..n}; the recursion below performs the rewrite and the closed
form gives the terms directly with sign (-1)^{|A n B|}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotToeplitzProductError
from .report import VerificationReport, make_report
from .symbol import DEFAULT_TOL, LaurentSymbol, MultiIndex, _max_abs
from .trunc import (TruncatedOperator, TruncationGrid, analytic_product_operator,
                    degree_zero_projection, lshift, min_window, require_window,
                    rshift, toeplitz_matrix, window_residual)


def _check_pair(gamma: LaurentSymbol, psi: LaurentSymbol) -> None:
    if gamma.n != psi.n:
        raise ValueError(f"variable counts differ: {gamma.n} vs {psi.n}")
    if (gamma.dim_out, gamma.dim_in) != (psi.dim_out, psi.dim_in):
        raise ValueError(
            f"factor fibers differ: {gamma.dim_out}x{gamma.dim_in} vs "
            f"{psi.dim_out}x{psi.dim_in}")
    if not (gamma.is_analytic and psi.is_analytic):
        raise ValueError("both factors must be analytic")


@dataclass(frozen=True)
class CoefficientConditionResult:
    """Shifted-product test: holds iff every A_{l+e_i} B_{m+e_i}^* vanishes.

    Witnesses are (i, l, m, norm) with l, m the actual support exponents whose
    coefficient product has max-entry norm above tolerance; the shift by e_i
    is already folded in (l_i >= 1 and m_i >= 1).
    """

    holds: bool
    witnesses: tuple[tuple[int, MultiIndex, MultiIndex, float], ...]
    max_violation: float
    tol: float

    def __bool__(self) -> bool:
        return self.holds


def coeff_condition(gamma: LaurentSymbol, psi: LaurentSymbol,
                    tol: float = DEFAULT_TOL) -> CoefficientConditionResult:
    _check_pair(gamma, psi)
    witnesses = []
    worst = 0.0
    for l, a in sorted(gamma.terms.items()):
        for m, b in sorted(psi.terms.items()):
            shared = [i + 1 for i in range(gamma.n) if l[i] >= 1 and m[i] >= 1]
            if not shared:
                continue
            norm = _max_abs(a @ b.conj().T)
            worst = max(worst, norm)
            if norm > tol:
                for i in shared:
                    witnesses.append((i, l, m, norm))
    return CoefficientConditionResult(not witnesses, tuple(witnesses), worst, tol)


@dataclass(frozen=True)
class PointConditionResult:
    """Sampled bilinear test of (Gamma - Gamma_k)(Psi - Psi_k)^* = 0."""

    holds: bool
    max_residual: float
    sample_count: int
    tol: float

    def __bool__(self) -> bool:
        return self.holds


def sample_disc_pairs(n: int, count: int, radius: float = 0.9, seed: int = 0
                      ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random pairs in the polydisc of the given radius, plus the origin pair."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        pts = []
        for _ in range(2):
            r = radius * np.sqrt(rng.random(n))
            ang = 2.0 * np.pi * rng.random(n)
            pts.append(r * np.exp(1j * ang))
        pairs.append((pts[0], pts[1]))
    pairs.append((np.zeros(n, dtype=complex), np.zeros(n, dtype=complex)))
    return pairs


def point_condition(gamma: LaurentSymbol, psi: LaurentSymbol,
                    pairs: Sequence[tuple] | None = None,
                    sample_count: int = 50, seed: int = 0,
                    tol: float = 1e-8) -> PointConditionResult:
    """Max over k and sampled (lambda, mu) of the bilinear defect norm.

    Sampling cannot prove the identity; the coefficient path is authoritative
    and this is the cross-check (hence the looser default tolerance).
    """
    _check_pair(gamma, psi)
    if pairs is None:
        pairs = sample_disc_pairs(gamma.n, sample_count, seed=seed)
    worst = 0.0
    for k in range(1, gamma.n + 1):
        dg = gamma - gamma.restrict_zero([k])
        dp = psi - psi.restrict_zero([k])
        if dg.is_zero or dp.is_zero:
            continue
        for lam, mu in pairs:
            prod = dg.evaluate(lam) @ dp.evaluate(mu).conj().T
            worst = max(worst, _max_abs(prod))
    return PointConditionResult(worst <= tol, worst, len(pairs), tol)


def kernel_compression_condition(gamma: LaurentSymbol, psi: LaurentSymbol,
                                 grid_or_degree=8, tol: float = 1e-9
                                 ) -> VerificationReport:
    """Both compression forms of the Toeplitz-product criterion at truncation.

    For each i the compressions M_{z_i}^* M_Gamma P M_Psi^* M_{z_i} must
    vanish with P the kernel projection of M_{z_i}^* and with P the projection
    onto the constant fiber; the two are equivalent, so their verdicts must
    agree and both residuals are reported via the witness of the worse one.
    """
    _check_pair(gamma, psi)
    D = grid_or_degree.D if isinstance(grid_or_degree, TruncationGrid) \
        else int(grid_or_degree)
    mg = toeplitz_matrix(gamma, D)
    mp_adj = toeplitz_matrix(psi, D).adjoint()
    inner_space = mg.grid.in_space()    # the shared fiber the projections act on
    outer_space = mg.grid.out_space()
    p0 = degree_zero_projection(inner_space)
    w = tuple(D - r - 1 for r in gamma.raise_radius)
    require_window(w, D, "kernel compression condition")
    worst_k, worst_e = -1.0, -1.0
    wit_k, wit_e = None, None
    for i in range(1, gamma.n + 1):
        tail = rshift(mp_adj, i)                     # M_Psi^* M_{z_i}
        kerproj = tail.matrix - lshift(lshift(tail, i, adjoint=True), i).matrix
        mid_k = mg.matrix @ kerproj                  # M_Gamma P_ker(M_i^*) ...
        mid_e = mg.matrix @ (p0.matrix @ tail.matrix)
        for tag, mid in (("ker", mid_k), ("const", mid_e)):
            full = lshift(TruncatedOperator(mid, outer_space,
                                            tuple(1 + r for r in gamma.raise_radius),
                                            tuple(1 + d for d in psi.raise_radius),
                                            "tmp"), i, adjoint=True)
            residual, wit = window_residual(full.matrix, full.grid, w)
            if tag == "ker" and residual > worst_k:
                worst_k, wit_k = residual, f"i={i},{wit}"
            if tag == "const" and residual > worst_e:
                worst_e, wit_e = residual, f"i={i},{wit}"
    agree = (worst_k <= tol) == (worst_e <= tol)
    residual = max(worst_k, worst_e)
    witness = wit_k if worst_k >= worst_e else wit_e
    if not agree:
        witness = f"forms_disagree,ker={worst_k:.3e},const={worst_e:.3e}"
    return make_report("kernel_compression_condition", residual, tol, w, witness)


# -- signed elementary decompositions -------------------------------------------


@dataclass(frozen=True)
class SignedTerm:
    """One elementary product: sign * M_{Gamma_A} M_{Psi_B}^*.

    A and B are the 1-based variable sets zeroed out in the analytic and
    co-analytic factor; a finalized decomposition only contains terms with
    A u B = {1..n}, each of which is Toeplitz on its own.
    """

    sign: int
    A: frozenset[int]
    B: frozenset[int]

    def sort_key(self):
        return (tuple(sorted(self.A)), tuple(sorted(self.B)), self.sign)

    def as_record(self) -> dict:
        return {"sign": self.sign, "A": sorted(self.A), "B": sorted(self.B)}


def _render_factor(letter: str, zeros: frozenset[int], n: int) -> str:
    if len(zeros) == n:
        return f"{letter}(0)"
    if not zeros:
        return f"M_{{{letter}}}"
    subs = ",".join(str(v) for v in sorted(zeros))
    return f"M_{{{letter}_{{{subs}}}}}"


@dataclass(frozen=True)
class Decomposition:
    """Multiset of signed elementary terms, like terms already combined."""

    n: int
    terms: tuple[SignedTerm, ...]

    @staticmethod
    def from_terms(n: int, terms: Iterable[SignedTerm]) -> "Decomposition":
        return Decomposition(n, tuple(sorted(terms, key=SignedTerm.sort_key)))

    def to_records(self) -> list[dict]:
        return [t.as_record() for t in self.terms]

    def render(self) -> str:
        parts = []
        for t in self.terms:
            sign = "+" if t.sign > 0 else "-"
            left = _render_factor("Γ", t.A, self.n)
            right = _render_factor("Ψ", t.B, self.n)
            parts.append(f"{sign} {left} {right}^*")
        return " ".join(parts)


def closed_form_terms(n: int) -> Decomposition:
    """All pairs (A, B) with A u B = {1..n}, signed by (-1)^{|A n B|}.

    The recursion in decompose() reproduces exactly this multiset; the sign
    law is verified rather than assumed, via the constant-factor collapse and
    numerical reconstruction tests.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    terms = []
    # each variable independently belongs to A only, B only, or both
    for assignment in np.ndindex(*(3,) * n):
        a, b, inter = set(), set(), 0
        for var, slot in enumerate(assignment, start=1):
            if slot == 0:
                a.add(var)
            elif slot == 1:
                b.add(var)
            else:
                a.add(var)
                b.add(var)
                inter += 1
        terms.append(SignedTerm((-1) ** inter, frozenset(a), frozenset(b)))
    return Decomposition.from_terms(n, terms)


def decompose(gamma: LaurentSymbol, psi: LaurentSymbol,
              tol: float = DEFAULT_TOL) -> Decomposition:
    """Rewrite M_Gamma M_Psi^* into elementary Toeplitz terms.

    Requires the coefficient condition; otherwise no decomposition exists and
    the witnesses are attached to the error.  Starting from the bare product,
    any term whose zero-sets miss some variable k (always the smallest, for
    reproducibility) is replaced by the three terms with k adjoined to one or
    both zero-sets, the last with opposite sign; termination is immediate
    since A u B grows strictly.
    """
    cond = coeff_condition(gamma, psi, tol)
    if not cond.holds:
        raise NotToeplitzProductError(
            f"not a Toeplitz product: {len(cond.witnesses)} shifted coefficient "
            f"products exceed {tol:g} (max {cond.max_violation:.3e})",
            cond.witnesses)
    n = gamma.n
    full = frozenset(range(1, n + 1))
    worklist = [(1, frozenset(), frozenset())]
    weights: dict[tuple[frozenset, frozenset], int] = {}
    while worklist:
        sign, a, b = worklist.pop()
        missing = full - (a | b)
        if not missing:
            key = (a, b)
            weights[key] = weights.get(key, 0) + sign
            continue
        k = min(missing)
        worklist.append((sign, a, b | {k}))
        worklist.append((sign, a | {k}, b))
        worklist.append((-sign, a | {k}, b | {k}))
    terms = []
    for (a, b), weight in weights.items():
        unit = 1 if weight > 0 else -1
        terms.extend(SignedTerm(unit, a, b) for _ in range(abs(weight)))
    return Decomposition.from_terms(n, terms)


def decomposition_to_operator(dec: Decomposition, gamma: LaurentSymbol,
                              psi: LaurentSymbol, grid_or_degree=8
                              ) -> TruncatedOperator:
    """Evaluate the signed sum of elementary products at truncation."""
    _check_pair(gamma, psi)
    if dec.n != gamma.n:
        raise ValueError(f"decomposition is for n={dec.n}, symbols have n={gamma.n}")
    D = grid_or_degree.D if isinstance(grid_or_degree, TruncationGrid) \
        else int(grid_or_degree)
    g = TruncationGrid(gamma.n, D, gamma.dim_out, psi.dim_out)
    acc = np.zeros((g.size_out, g.size_in), dtype=complex)
    for term in dec.terms:
        part = analytic_product_operator(gamma.restrict_zero(term.A),
                                         psi.restrict_zero(term.B), D)
        acc += term.sign * part.matrix
    return TruncatedOperator(acc, g, gamma.raise_radius, psi.raise_radius,
                             "decomposition_sum")


@dataclass(frozen=True)
class DisjointVariablesResult:
    """Scalar specialization: the factors must depend on disjoint variables."""

    holds: bool
    left_vars: frozenset[int]
    right_vars: frozenset[int]

    def __bool__(self) -> bool:
        return self.holds


def scalar_disjoint_check(zeta: LaurentSymbol, psi: LaurentSymbol
                          ) -> DisjointVariablesResult:
    """For 1x1 fibers the product condition says the variable sets are disjoint."""
    if zeta.dim_out != 1 or zeta.dim_in != 1 or psi.dim_out != 1 or psi.dim_in != 1:
        raise ValueError("scalar check needs 1x1 fibers")
    _check_pair(zeta, psi)
    lv, rv = zeta.variables_used(), psi.variables_used()
    return DisjointVariablesResult(not (lv & rv), lv, rv)
