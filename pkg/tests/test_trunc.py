"""Truncated operator construction, composition, and the exactness window."""

import numpy as np
import pytest

from polytoep import (LaurentSymbol, TruncationGrid, WindowExhaustedError,
                      analytic_product_operator, compare_on_window, compose,
                      dense_dump, hankel_matrix, identity_operator,
                      mult_shift_matrix, multiply, toeplitz_matrix)
from polytoep.trunc import (degree_zero_projection, lshift, rshift,
                            shift_sandwich, window_compression)

from conftest import nilpotent_shift, random_analytic, random_laurent, scalar_symbol


def test_scalar_shift_symbol_gives_shift_matrix():
    op = toeplitz_matrix(scalar_symbol(1, {(1,): 1.0}), 2)
    expected = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=complex)
    assert np.array_equal(op.matrix, expected)


def test_constant_symbol_gives_block_diagonal():
    c = np.array([[1.0, 2.0], [3.0, 4.0]])
    op = toeplitz_matrix(LaurentSymbol.constant(c, 1), 2)
    expected = np.kron(np.eye(3), c)
    assert np.array_equal(op.matrix, expected)


def test_blocks_follow_symbol_coefficients():
    rng = np.random.default_rng(3)
    phi = random_laurent(rng, 2, 2, 3, degree=2)
    op = toeplitz_matrix(phi, 4)
    for m in [(0, 0), (1, 2), (3, 1), (4, 4)]:
        for l in [(0, 0), (2, 1), (1, 3)]:
            diff = tuple(mi - li for mi, li in zip(m, l))
            assert np.array_equal(op.block(m, l), phi.coeff(diff))


def test_block_toeplitz_translation_invariance():
    rng = np.random.default_rng(4)
    phi = random_laurent(rng, 2, 2, 2, degree=1)
    op = toeplitz_matrix(phi, 3)
    for m in [(0, 1), (1, 1), (2, 0)]:
        for l in [(0, 0), (1, 2)]:
            up_m = tuple(c + 1 for c in m)
            up_l = tuple(c + 1 for c in l)
            assert np.array_equal(op.block(m, l), op.block(up_m, up_l))


def test_adjoint_symbol_matches_matrix_adjoint():
    rng = np.random.default_rng(5)
    phi = random_laurent(rng, 1, 3, 2, degree=2)
    direct = toeplitz_matrix(phi.adjoint(), 5)
    assert np.max(np.abs(direct.matrix - toeplitz_matrix(phi, 5).adjoint().matrix)) == 0.0


def test_analytic_toeplitz_commutes_with_shifts_on_window():
    rng = np.random.default_rng(6)
    phi = random_analytic(rng, 2, 2, 2, degree=1)
    op = toeplitz_matrix(phi, 5)
    grid = TruncationGrid.square(2, 5, 2)
    for i in (1, 2):
        s = mult_shift_matrix(i, grid)
        left = compose([s, op])
        right = compose([op, s])
        rep = compare_on_window(left, right, 1e-12,
                                window=tuple(w - 1 for w in left.window))
        assert rep.verdict and rep.residual == 0.0


def test_mult_shift_smallest_case():
    op = mult_shift_matrix(1, TruncationGrid.square(1, 1, 1))
    assert np.array_equal(op.matrix, np.array([[0, 0], [1, 0]], dtype=complex))


def test_shift_isometry_and_commutation():
    grid = TruncationGrid.square(2, 3, 2)
    s1 = mult_shift_matrix(1, grid)
    s2 = mult_shift_matrix(2, grid)
    # the top slice k_1 = D is clipped, so S*S = I holds on the window
    gram = compose([s1.adjoint(), s1])
    rep = compare_on_window(gram, identity_operator(grid), 0.0)
    assert rep.verdict and rep.residual == 0.0
    assert np.array_equal(s1.matrix @ s2.matrix, s2.matrix @ s1.matrix)


def test_shift_index_out_of_range():
    with pytest.raises(ValueError):
        mult_shift_matrix(3, TruncationGrid.square(2, 2, 1))


def test_hankel_of_analytic_symbol_vanishes():
    h = hankel_matrix(scalar_symbol(1, {(1,): 1.0}), 4)
    assert np.max(np.abs(h.matrix)) == 0.0


def test_hankel_of_zbar_hits_constants_only():
    h = hankel_matrix(scalar_symbol(1, {(-1,): 1.0}), 3)
    # column of 1 maps to the frequency -1 row; higher columns stay analytic
    row = h.row_indices.index((-1,))
    expected = np.zeros_like(h.matrix)
    expected[row, 0] = 1.0
    assert np.array_equal(h.matrix, expected)


def test_compose_with_identity_and_radius_bookkeeping():
    rng = np.random.default_rng(8)
    phi = random_laurent(rng, 1, 2, 2, degree=2)
    op = toeplitz_matrix(phi, 6)
    grid = TruncationGrid.square(1, 6, 2)
    eye = identity_operator(grid)
    same = compose([op, eye])
    assert np.array_equal(same.matrix, op.matrix)
    s = mult_shift_matrix(1, grid)
    sandwich = compose([s.adjoint(), op, s])
    assert sandwich.raise_radius == (phi.raise_radius[0] + 1,)
    assert sandwich.drop_radius == (phi.drop_radius[0] + 1,)


def test_fast_shift_application_matches_dense_products():
    rng = np.random.default_rng(9)
    phi = random_laurent(rng, 2, 2, 2, degree=1)
    op = toeplitz_matrix(phi, 3)
    grid = TruncationGrid.square(2, 3, 2)
    for i in (1, 2):
        s = mult_shift_matrix(i, grid)
        assert np.array_equal(lshift(op, i).matrix, s.matrix @ op.matrix)
        assert np.array_equal(lshift(op, i, adjoint=True).matrix,
                              s.adjoint().matrix @ op.matrix)
        assert np.array_equal(rshift(op, i).matrix, op.matrix @ s.matrix)
        assert np.array_equal(rshift(op, i, adjoint=True).matrix,
                              op.matrix @ s.adjoint().matrix)
        assert np.array_equal(shift_sandwich(op, i).matrix,
                              s.adjoint().matrix @ op.matrix @ s.matrix)


def test_analytic_product_matches_dense_composition():
    rng = np.random.default_rng(10)
    for _ in range(5):
        gamma = random_analytic(rng, 2, 2, 2, degree=2)
        psi = random_analytic(rng, 2, 3, 2, degree=2)
        fast = analytic_product_operator(gamma, psi, 4)
        dense = compose([toeplitz_matrix(gamma, 4),
                         toeplitz_matrix(psi, 4).adjoint()])
        assert np.max(np.abs(fast.matrix - dense.matrix)) < 1e-13


def test_window_columns_are_exact_under_composition():
    # the same composition rebuilt at a larger cap agrees on the old window
    rng = np.random.default_rng(11)
    for trial in range(5):
        a = random_laurent(rng, 2, 2, 2, degree=1)
        b = random_laurent(rng, 2, 2, 2, degree=1)
        small, big = 4, 7
        comp_small = compose([toeplitz_matrix(a, small),
                              toeplitz_matrix(b, small).adjoint()])
        comp_big = compose([toeplitz_matrix(a, big),
                            toeplitz_matrix(b, big).adjoint()])
        g_small = comp_small.grid
        g_big = comp_big.grid
        w = comp_small.window
        assert min(w) >= 0
        for l in g_small.indices:
            if any(li > wi for li, wi in zip(l, w)):
                continue
            for m in g_small.indices:
                assert np.allclose(comp_small.block(m, l), comp_big.block(m, l),
                                   atol=1e-13)


def test_compare_on_window_zero_for_identical():
    rng = np.random.default_rng(12)
    op = toeplitz_matrix(random_laurent(rng, 1, 2, 2, degree=1), 4)
    rep = compare_on_window(op, op, 1e-12)
    assert rep.verdict and rep.residual == 0.0 and rep.witness is None


def test_compare_on_window_exhaustion_suggests_degree():
    rng = np.random.default_rng(13)
    phi = random_laurent(rng, 1, 1, 1, degree=3)
    op = toeplitz_matrix(phi, 4)
    chain = compose([op, op])  # raise radius 6 > D=4
    with pytest.raises(WindowExhaustedError) as err:
        compare_on_window(chain, chain, 1e-9)
    assert err.value.needed_degree > 4


def test_truncated_shift_times_adjoint_isometry_pattern():
    theta = nilpotent_shift()
    op = toeplitz_matrix(theta, 5)
    gram = compose([op.adjoint(), op])
    pattern = toeplitz_matrix(multiply(theta.adjoint(), theta), 5)
    rep = compare_on_window(gram, pattern, 1e-12)
    assert rep.verdict and rep.residual == 0.0


def test_degree_zero_projection_idempotent():
    p0 = degree_zero_projection(TruncationGrid.square(2, 2, 2))
    assert np.array_equal(p0.matrix @ p0.matrix, p0.matrix)
    assert np.trace(p0.matrix).real == 2.0


def test_window_compression_shape():
    rng = np.random.default_rng(14)
    phi = random_laurent(rng, 1, 2, 2, degree=1)
    op = toeplitz_matrix(phi, 4)
    sub = window_compression(op)
    npoints = sum(1 for k in op.grid.indices if k[0] <= op.window[0])
    assert sub.shape == (npoints * 2, npoints * 2)


def test_dense_dump_round_trips_entries():
    rng = np.random.default_rng(15)
    op = toeplitz_matrix(random_laurent(rng, 1, 2, 2, degree=1), 2)
    text = dense_dump(op)
    lines = text.strip().split("\n")
    assert len(lines) == op.matrix.shape[0]
    first = [float(v) for v in lines[0].split()]
    assert first[0] == op.matrix[0, 0].real
    assert first[1] == op.matrix[0, 0].imag


def test_grid_rejects_bad_parameters():
    with pytest.raises(ValueError):
        TruncationGrid(0, 4, 1, 1)
    with pytest.raises(ValueError):
        TruncationGrid(1, 0, 1, 1)
    phi = scalar_symbol(1, {(0,): 1.0})
    with pytest.raises(ValueError):
        toeplitz_matrix(phi, TruncationGrid(2, 4, 1, 1))
    with pytest.raises(ValueError):
        toeplitz_matrix(phi, TruncationGrid(1, 4, 2, 2))


def test_graded_lex_order_is_documented_shape():
    grid = TruncationGrid.square(2, 2, 1)
    assert grid.indices[:4] == ((0, 0), (0, 1), (1, 0), (0, 2))
