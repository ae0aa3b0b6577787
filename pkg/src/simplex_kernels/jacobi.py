"""Jacobi polynomial kernels for the Dirichlet distribution.

The degree-n kernel is a triangular combination of the nonnegative
"posterior" kernels

    xi_m(x, y) = sum_{|l|=m} C(m,l)^2 x^l y^l / DM_alpha(l; m),

with coefficients from :func:`coeff_a`.  :func:`coeff_c` gives the inverse
triangle, so xi_m can be recovered from the kernels.
"""
from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np
from scipy.special import eval_jacobi

from .dist import params
from .numkit import (
    DomainError,
    Poly,
    compositions,
    falling,
    hyp_terminating,
    is_exact,
    multinomial,
    poly_add,
    poly_expect_dirichlet,
    poly_mul,
    poly_scale,
    ratio,
    rising,
    total_of,
)


# --- coefficient triangles ------------------------------------------------

def coeff_a(total_alpha, n: int, m: int):
    """Coefficient of xi_m in the degree-n kernel (zero when m > n)."""
    if total_alpha <= 0:
        raise DomainError(f"|alpha| must be positive, got {total_alpha}")
    if m < 0 or n < 0:
        raise DomainError("degrees must be nonnegative")
    if m > n:
        return 0
    if n == 0:
        return 1
    sign = -1 if (n - m) % 2 else 1
    num = (total_alpha + 2 * n - 1) * rising(total_alpha + m, n - 1) * sign
    return ratio(num, math.factorial(m) * math.factorial(n - m))


def coeff_c(total_alpha, m: int, n: int):
    """Coefficient of the degree-n kernel in xi_m (zero when n > m)."""
    if n > m:
        return 0
    return ratio(falling(m, n), rising(total_alpha + m, n))


def triangle_a(total_alpha, max_degree: int) -> List[list]:
    return [[coeff_a(total_alpha, n, m) for m in range(max_degree + 1)]
            for n in range(max_degree + 1)]


def triangle_c(total_alpha, max_degree: int) -> List[list]:
    return [[coeff_c(total_alpha, m, n) for n in range(max_degree + 1)]
            for m in range(max_degree + 1)]


# --- multivariate kernels -------------------------------------------------

def _xi_weight(alpha, l, total):
    """C(m,l) (|alpha|)_m / prod (alpha_i)_{l_i}: the x^l y^l coefficient of xi_m."""
    den = 1
    for a, li in zip(alpha, l):
        den *= rising(a, li)
    return ratio(multinomial(tuple(l)) * rising(total, sum(l)), den)


def xi(alpha, m: int, x: Sequence, y: Sequence):
    a = params(alpha)
    if len(x) != a.d or len(y) != a.d:
        raise DomainError(f"points must have dimension {a.d}")
    xy = [xi_ * yi for xi_, yi in zip(x, y)]
    out = 0
    for l in compositions(a.d, m):
        term = _xi_weight(a, l, a.total)
        for v, li in zip(xy, l):
            if li:
                term *= v ** li
        out += term
    return out


def xi_all(alpha, max_degree: int, x, y) -> list:
    return [xi(alpha, m, x, y) for m in range(max_degree + 1)]


def q_kernel(alpha, n: int, x: Sequence, y: Sequence):
    """Degree-n Jacobi kernel Q_n(x, y) for the Dirichlet(alpha) distribution."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    a = params(alpha)
    out = 0
    for m in range(n + 1):
        out += coeff_a(a.total, n, m) * xi(a, m, x, y)
    return out


def xi_poly(alpha, m: int, x: Sequence) -> Poly:
    """xi_m(x, .) as a polynomial in the second argument."""
    a = params(alpha)
    p = {}
    for l in compositions(a.d, m):
        c = _xi_weight(a, l, a.total)
        for v, li in zip(x, l):
            if li:
                c *= v ** li
        if c != 0:
            p[l] = c
    return p


def q_kernel_poly(alpha, n: int, x: Sequence) -> Poly:
    """Q_n(x, .) as a polynomial in the second argument (mixed degrees)."""
    a = params(alpha)
    out: Poly = {}
    for m in range(n + 1):
        # monomials of degree m in y; on the simplex these are not reduced
        out = poly_add(out, poly_scale(xi_poly(a, m, x), coeff_a(a.total, n, m)))
    return out


def kernel_inner_product(alpha, n: int, m: int, x: Sequence, z: Sequence):
    """E[Q_n(x, Y) Q_m(z, Y)] for Y ~ Dirichlet(alpha), exact for rational inputs."""
    a = params(alpha)
    return poly_expect_dirichlet(poly_mul(q_kernel_poly(a, n, x), q_kernel_poly(a, m, z)), a.alpha)


def q_kernel_batch(alpha, n: int, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Floating kernel values for row-paired points X[i], Y[i]."""
    a = params(alpha)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    P = X * Y
    total = float(a.total)
    out = np.zeros(P.shape[0])
    for m in range(n + 1):
        am = float(coeff_a(a.total, n, m))
        xm = np.zeros(P.shape[0])
        for l in compositions(a.d, m):
            term = np.full(P.shape[0], float(_xi_weight(a, l, total)))
            for i, li in enumerate(l):
                if li:
                    term *= P[:, i] ** li
            xm += term
        out += am * xm
    return out


# --- univariate shifted Jacobi polynomials --------------------------------

def univariate_r(alpha, beta, n: int, x):
    """R_n(x) = 2F1(-n, n+theta-1; beta; 1-x), normalised by R_n(1) = 1.

    Orthogonal under the Beta(alpha, beta) law of x.  Exact input gives an
    exact value; float input uses the stable three-term recurrence through
    R_n(x) = n! / (beta)_n P_n^{(beta-1, alpha-1)}(2x - 1).
    """
    if alpha <= 0 or beta <= 0:
        raise DomainError("alpha and beta must be positive")
    if n == 0:
        return 1 if is_exact(x) else 1.0
    if not is_exact(x):
        scale = math.exp(math.lgamma(n + 1) + math.lgamma(float(beta)) - math.lgamma(n + float(beta)))
        return scale * eval_jacobi(n, float(beta) - 1, float(alpha) - 1, 2 * np.asarray(x, float) - 1)
    theta = alpha + beta
    return hyp_terminating([-n, n + theta - 1], [beta], 1 - x, n)


def zeta(alpha, beta, n: int):
    """Reciprocal of E[R_n(X)^2] for X ~ Beta(alpha, beta)."""
    if n == 0:
        return 1
    theta = alpha + beta
    inv = ratio(math.factorial(n) * rising(alpha, n),
                (theta + 2 * n - 1) * rising(theta, n - 1) * rising(beta, n))
    return ratio(1, inv)


def r_coefficients(alpha, beta, n: int) -> list:
    """Power-basis coefficients c_k of R_n(x) = sum_k c_k x^k."""
    theta = alpha + beta
    coeffs = [0] * (n + 1)
    for k in range(n + 1):
        hk = ratio(rising(-n, k) * rising(n + theta - 1, k), rising(beta, k) * math.factorial(k))
        # (1 - x)^k = sum_j C(k, j) (-x)^j
        for j in range(k + 1):
            coeffs[j] += hk * math.comb(k, j) * (-1) ** j
    return coeffs


def orthonormal_r(alpha, beta, n: int, x) -> float:
    """sqrt(zeta_n) R_n(x): unit norm, positive leading coefficient."""
    return math.sqrt(float(zeta(alpha, beta, n))) * float(univariate_r(alpha, beta, n, x))


def univariate_q(alpha, beta, n: int, x, y):
    """Two-point kernel zeta_n R_n(x) R_n(y) for Beta(alpha, beta)."""
    return zeta(alpha, beta, n) * univariate_r(alpha, beta, n, x) * univariate_r(alpha, beta, n, y)


def project_to_coordinate(alpha, n: int, y: Sequence, j: int):
    """Kernel value Q_n(y, e_j) through the Beta marginal of coordinate j (0-based)."""
    a = params(alpha)
    if not 0 <= j < a.d:
        raise DomainError(f"coordinate {j} out of range for d={a.d}")
    aj = a[j]
    rest = a.total - aj
    return zeta(aj, rest, n) * univariate_r(aj, rest, n, y[j])


def aggregate(alpha, blocks: Sequence[Sequence[int]], n: int, x2: Sequence, y2: Sequence):
    """Kernel of the aggregated Dirichlet(A alpha) at the aggregated points."""
    a = params(alpha)
    seen = sorted(i for b in blocks for i in b)
    if any(len(b) == 0 for b in blocks):
        raise DomainError("aggregation blocks must be nonempty")
    if seen != list(range(a.d)):
        raise DomainError(f"blocks {blocks} do not partition the {a.d} coordinates")
    grouped = [total_of([a[i] for i in b]) for b in blocks]
    if len(grouped) == 1:
        return 1 if n == 0 else 0
    return q_kernel(grouped, n, x2, y2)


def aggregate_point(x: Sequence, blocks: Sequence[Sequence[int]]) -> list:
    return [total_of([x[i] for i in b]) for b in blocks]
