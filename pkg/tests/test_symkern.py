import math
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import rational_simplex_points
from simplex_kernels.dist import RankedPoint, RngStream, esf_pmf, sample_pd, sample_pd_batch
from simplex_kernels.hahn import HahnContext, h_kernel, xi_h
from simplex_kernels.jacobi import q_kernel, q_kernel_poly, xi
from simplex_kernels.numkit import (
    DomainError,
    PartitionProfile,
    compositions,
    enumerate_partitions,
    poly_eval,
    poly_expect_dirichlet,
    poly_mul,
)
from simplex_kernels.symkern import (
    h_kernel_esf,
    h_kernel_ranked,
    pd_second_kernel_closed,
    power_sum_functional,
    q_kernel_pd,
    q_kernel_ranked,
    sharp,
    symmetrize_polynomial,
    xi_h_esf,
    xi_h_ranked,
    xi_pd,
    xi_ranked,
)

X3 = (F(1, 2), F(1, 3), F(1, 6))
Y3 = (F(1, 5), F(1, 5), F(3, 5))
Z3 = (F(1, 12), F(7, 12), F(1, 3))


def _perm_average(fn, x, d):
    perms = list(permutations(range(d)))
    return sum(fn(tuple(x[i] for i in p)) for p in perms) / len(perms)


def test_power_sum_functional_examples():
    assert power_sum_functional(X3, PartitionProfile((1,))) == 1
    assert power_sum_functional((F(1, 2), F(1, 2)), PartitionProfile((2,))) == F(1, 2)
    assert power_sum_functional(X3, PartitionProfile(())) == 1
    # distinct pairs: 2 * (x1 x2 + x1 x3 + x2 x3)
    assert power_sum_functional(X3, PartitionProfile((1, 1))) == 2 * (X3[0] * X3[1] + X3[0] * X3[2] + X3[1] * X3[2])


@given(rational_simplex_points(3))
def test_ranked_sampling_formula_normalises(x):
    for k in range(1, 5):
        assert sum(sharp(p) * power_sum_functional(x, p) for p in enumerate_partitions(k, 3)) == 1


def test_xi_ranked_examples():
    assert xi_ranked(F(3, 2), 3, 0, X3, Y3) == 1
    assert xi_ranked(F(3, 2), 3, 2, X3, Y3) == xi_ranked(F(3, 2), 3, 2, Y3, X3)


@pytest.mark.parametrize("theta", [F(3, 2), 3])
def test_xi_ranked_is_permutation_average(theta):
    alpha = (F(theta) / 3,) * 3
    for m in range(4):
        avg = _perm_average(lambda px: xi(alpha, m, px, Y3), X3, 3)
        assert xi_ranked(theta, 3, m, X3, Y3) == avg
        avg_q = _perm_average(lambda px: q_kernel(alpha, m, px, Y3), X3, 3)
        assert q_kernel_ranked(theta, 3, m, X3, Y3) == avg_q


def test_ranked_kernels_are_permutation_invariant():
    theta = F(5, 2)
    base = q_kernel_ranked(theta, 3, 3, X3, Y3)
    for p in permutations(range(3)):
        assert q_kernel_ranked(theta, 3, 3, tuple(X3[i] for i in p), Y3) == base
    x = (F(1, 2), F(1, 4), F(1, 8), F(1, 8))
    y = (F(3, 5), F(3, 10), F(1, 10))
    ref = q_kernel_pd(theta, 3, x, y)
    assert q_kernel_pd(theta, 3, x[::-1], y[::-1]) == ref


@given(rational_simplex_points(3), rational_simplex_points(3))
@settings(max_examples=10)
def test_first_ranked_kernel_vanishes(x, y):
    assert q_kernel_ranked(F(3, 2), 3, 1, x, y) == 0
    assert q_kernel_ranked(F(3, 2), 3, 0, x, y) == 1
    assert q_kernel_pd(F(3, 2), 1, x, y) == 0


def _symmetric_kernel_poly(alpha, n, x):
    return symmetrize_polynomial(q_kernel_poly(alpha, n, x))


def test_ranked_kernel_orthogonality_exact():
    theta = F(3, 2)
    alpha = (F(theta) / 3,) * 3
    polys = {(n, pt): _symmetric_kernel_poly(alpha, n, pt) for n in range(4) for pt in (X3, Z3)}
    for n in range(4):
        assert poly_eval(polys[(n, X3)], Y3) == q_kernel_ranked(theta, 3, n, X3, Y3)
        for m in range(4):
            e = poly_expect_dirichlet(poly_mul(polys[(n, X3)], polys[(m, Z3)]), alpha)
            assert e == (q_kernel_ranked(theta, 3, n, X3, Z3) if n == m else 0)


def test_symmetrize_polynomial_examples():
    const = {(0, 0, 0): F(7, 3)}
    assert symmetrize_polynomial(const) == const
    p = symmetrize_polynomial({(1, 0): F(1)})
    assert p == {(1, 0): F(1, 2), (0, 1): F(1, 2)}
    assert poly_eval(p, (F(1, 3), F(2, 3))) == F(1, 2)
    q = {(2, 1, 0): F(1), (0, 0, 1): F(3)}
    assert symmetrize_polynomial(symmetrize_polynomial(q)) == symmetrize_polynomial(q)


def _solve(G, b):
    n = len(G)
    M = [list(row) + [v] for row, v in zip(G, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def _symmetric_projection_kernel(alpha, degree, x, y):
    """Reproducing kernel of symmetric polynomials of degree <= ``degree`` under D(alpha)."""
    d = len(alpha)
    basis = []
    for part in enumerate_partitions(degree, d):
        e = tuple(part.parts) + (0,) * (d - part.k)
        basis.append(symmetrize_polynomial({e: F(1)}))
    G = [[poly_expect_dirichlet(poly_mul(p, q), alpha) for q in basis] for p in basis]
    coef = _solve(G, [poly_eval(p, y) for p in basis])
    return sum(c * poly_eval(p, x) for c, p in zip(coef, basis))


def test_ranked_kernel_is_reproducing_kernel_of_symmetric_basis():
    """Orthonormalising the symmetric polynomials degree by degree gives the ranked kernel."""
    theta = 3
    alpha = (1, 1, 1)
    for n in range(1, 5):
        gs = _symmetric_projection_kernel(alpha, n, X3, Y3) - _symmetric_projection_kernel(alpha, n - 1, X3, Y3)
        assert gs == q_kernel_ranked(theta, 3, n, X3, Y3)


def test_pd_second_kernel_matches_closed_form():
    rng = RngStream(77)
    for theta in (0.5, 1.0, 2.5):
        for _ in range(7):
            x = sample_pd(theta, 2000, rng)
            y = sample_pd(theta, 2000, rng)
            a = q_kernel_pd(theta, 2, x, y)
            b = pd_second_kernel_closed(theta, x, y)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_pd_second_kernel_exact_on_finite_points():
    x = (F(1, 2), F(1, 3), F(1, 6))
    y = (F(3, 4), F(1, 4))
    assert q_kernel_pd(F(2), 2, x, y) == pd_second_kernel_closed(F(2), x, y)


def test_pd_second_kernel_is_centred():
    theta = 1.0
    x = RankedPoint(np.array([0.6, 0.3, 0.1]))
    w, tails = sample_pd_batch(theta, 40_000, RngStream(31))
    vals = np.array([q_kernel_pd(theta, 2, x, RankedPoint(row, t)) for row, t in zip(w, tails)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean()) <= 3 * se


def test_pd_tail_budget():
    heavy = RankedPoint(np.array([0.5, 0.3]), 0.2)
    with pytest.raises(DomainError):
        xi_pd(1, 2, heavy, heavy)
    assert xi_pd(1, 2, heavy, heavy, tail_budget=0.5) > 0


def test_xi_ranked_approaches_pd_limit():
    theta = F(3, 2)
    d = 200
    x = (F(1, 2), F(1, 4), F(1, 8), F(1, 8))
    y = (F(3, 5), F(3, 10), F(1, 10))
    xd = x + (0,) * (d - len(x))
    yd = y + (0,) * (d - len(y))
    for m in range(1, 4):
        finite = xi_ranked(theta, d, m, xd, yd)
        limit = xi_pd(theta, m, x, y)
        assert abs(finite - limit) / limit < F(1, 100)


def test_h_kernel_ranked_is_permutation_average():
    theta = F(3, 2)
    alpha = (F(theta) / 3,) * 3
    for N in range(1, 4):
        ctx = HahnContext(alpha, N)
        comps = compositions(3, N)
        for r in comps:
            for s in comps:
                for m in range(N + 1):
                    avg = _perm_average(lambda pr: xi_h(ctx, m, pr, s), r, 3)
                    assert xi_h_ranked(theta, 3, N, m, r, s) == avg
                    avg_h = _perm_average(lambda pr: h_kernel(ctx, m, pr, s), r, 3)
                    assert h_kernel_ranked(theta, 3, N, m, r, s) == avg_h


def test_h_kernel_ranked_errors():
    with pytest.raises(DomainError):
        h_kernel_ranked(1, 3, 2, 3, (2, 0, 0), (1, 1, 0))
    with pytest.raises(DomainError):
        xi_h_ranked(1, 3, 2, 1, (2, 0), (1, 1, 0))


def test_esf_kernel_examples():
    theta = F(3, 2)
    r = PartitionProfile((2, 1))
    s = PartitionProfile((1, 1, 1))
    assert h_kernel_esf(theta, 3, 0, r, s) == 1
    for N in range(1, 5):
        parts = list(enumerate_partitions(N, N))
        for a in parts:
            for b in parts:
                assert h_kernel_esf(theta, N, 1, a, b) == 0
    with pytest.raises(DomainError):
        h_kernel_esf(theta, 2, 3, PartitionProfile((2,)), PartitionProfile((2,)))
    with pytest.raises(DomainError):
        xi_h_esf(theta, 3, 1, PartitionProfile((2,)), s)


@pytest.mark.parametrize("theta", [F(1, 2), F(3, 2), 4])
def test_esf_kernel_orthogonality(theta):
    for N in range(1, 5):
        parts = list(enumerate_partitions(N, N))
        w = {p: esf_pmf(theta, p) for p in parts}
        K = {(n, a, b): h_kernel_esf(theta, N, n, a, b) for n in range(N + 1) for a in parts for b in parts}
        for n in range(N + 1):
            for m in range(N + 1):
                for a in parts:
                    for c in parts:
                        lhs = sum(w[b] * K[(n, a, b)] * K[(m, c, b)] for b in parts)
                        assert lhs == (K[(n, a, c)] if n == m else 0)


def test_esf_kernel_is_limit_of_ranked_kernel():
    theta = F(3, 2)
    r = (2, 1, 0)
    s = (1, 1, 1)
    limit = h_kernel_esf(theta, 3, 2, PartitionProfile((2, 1)), PartitionProfile((1, 1, 1)))
    errs = []
    for d in (10, 40, 160):
        val = h_kernel_ranked(theta, d, 3, 2, r + (0,) * (d - 3), s + (0,) * (d - 3))
        errs.append(abs(val - limit))
    # the gap closes at rate 1/d
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5
