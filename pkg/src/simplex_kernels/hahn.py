"""Hahn polynomial kernels for the Dirichlet-multinomial distribution.

Kernels on compositions r, s of N are built from the posterior kernels

    xi^H_m(r, s) = sum_{|l|=m} DM_{alpha+r}(l; m) DM_{alpha+s}(l; m) / DM_alpha(l; m)

or, equivalently, from the falling-factorial kernels chi^H_m.  Negative
parameters alpha = -c give kernels for the multivariate hypergeometric law;
Pochhammer symbols are then evaluated with explicit zero/pole bookkeeping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from .jacobi import _xi_weight, coeff_a, coeff_c
from .numkit import (
    DomainError,
    compositions,
    dirichlet_moment,
    falling,
    hyp_terminating,
    multinomial,
    ratio,
    rising,
    total_of,
)


@dataclass(frozen=True)
class HahnContext:
    """Parameters alpha and sample size N.  alpha may be negative (hypergeometric case)."""

    alpha: Tuple
    N: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        if self.N < 0:
            raise DomainError(f"N must be nonnegative, got {self.N}")
        if not self.alpha:
            raise DomainError("alpha must be nonempty")

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def total(self):
        return total_of(self.alpha)

    def check(self, r: Sequence[int]) -> None:
        if len(r) != self.d:
            raise DomainError(f"composition {tuple(r)} has length {len(r)}, expected {self.d}")
        if any(v < 0 for v in r) or sum(r) != self.N:
            raise DomainError(f"composition {tuple(r)} does not sum to N={self.N}")


class _Poch:
    """Product of rising factorials tracked as (nonzero part, number of zero factors)."""

    __slots__ = ("value", "zeros")

    def __init__(self):
        self.value = Fraction(1)
        self.zeros = 0

    def mul_rising(self, a, k: int) -> "_Poch":
        for i in range(k):
            f = a + i
            if f == 0:
                self.zeros += 1
            else:
                self.value *= f
        return self

    def mul(self, v) -> "_Poch":
        if v == 0:
            self.zeros += 1
        else:
            self.value *= v
        return self


def _poch_ratio(num: _Poch, den: _Poch, what: str):
    if den.zeros > num.zeros:
        raise DomainError(f"vanishing Pochhammer denominator in {what}")
    if num.zeros > den.zeros:
        return Fraction(0)
    return num.value / den.value


def _is_float(ctx: HahnContext) -> bool:
    return any(isinstance(a, float) for a in ctx.alpha)


def _xi_h_term(alpha, total, l, r, s, N):
    m = sum(l)
    num = _Poch().mul(multinomial(tuple(l))).mul_rising(total, m)
    den = _Poch().mul_rising(total + N, m).mul_rising(total + N, m)
    for a, li, ri, si in zip(alpha, l, r, s):
        num.mul_rising(a + ri, li).mul_rising(a + si, li)
        den.mul_rising(a, li)
    return _poch_ratio(num, den, f"xi^H term l={tuple(l)}")


def xi_h(ctx: HahnContext, m: int, r: Sequence[int], s: Sequence[int]):
    """Posterior kernel xi^H_m(r, s)."""
    ctx.check(r)
    ctx.check(s)
    total = ctx.total
    if _is_float(ctx):
        out = 0.0
        for l in compositions(ctx.d, m):
            num = multinomial(l) * rising(total, m)
            den = rising(total + ctx.N, m) ** 2
            for a, li, ri, si in zip(ctx.alpha, l, r, s):
                num *= rising(a + ri, li) * rising(a + si, li)
                den *= rising(a, li)
            out += num / den
        return out
    alpha = tuple(Fraction(a) for a in ctx.alpha)
    out = Fraction(0)
    for l in compositions(ctx.d, m):
        out += _xi_h_term(alpha, Fraction(total), l, r, s, ctx.N)
    return out


def xi_h_posterior(ctx: HahnContext, m: int, r: Sequence[int], s: Sequence[int]):
    """E[xi_m(X, Y)] with X ~ Dirichlet(alpha + r), Y ~ Dirichlet(alpha + s) independent.

    xi_m is bilinear in the monomials x^l y^l, so the expectation factors into
    Dirichlet moments; this is an independent route to xi^H_m(r, s).
    """
    ctx.check(r)
    ctx.check(s)
    ar = tuple(a + ri for a, ri in zip(ctx.alpha, r))
    as_ = tuple(a + si for a, si in zip(ctx.alpha, s))
    out = 0
    for l in compositions(ctx.d, m):
        out += _xi_weight(ctx.alpha, l, ctx.total) * dirichlet_moment(ar, l) * dirichlet_moment(as_, l)
    return out


def _prefactor(total, N: int, n: int):
    if n > N:
        raise DomainError(f"degree n={n} exceeds N={N}; the falling factorial N_[n] vanishes")
    num = _Poch().mul_rising(total + N, n)
    den = _Poch().mul(falling(N, n))
    return _poch_ratio(num, den, "(|alpha|+N)_n / N_[n]")


def h_kernel(ctx: HahnContext, n: int, r: Sequence[int], s: Sequence[int]):
    """Degree-n Hahn kernel H_n(r, s) from the xi^H expansion."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    pre = _prefactor(ctx.total, ctx.N, n)
    out = 0
    for m in range(n + 1):
        out += coeff_a(ctx.total, n, m) * xi_h(ctx, m, r, s)
    return pre * out


def _coeff_a_any(total, n: int, m: int):
    """coeff_a without the positivity guard (negative totals in the hypergeometric case)."""
    if m > n:
        return 0
    if n == 0:
        return 1
    sign = -1 if (n - m) % 2 else 1
    return ratio((total + 2 * n - 1) * rising(total + m, n - 1) * sign,
                 math.factorial(m) * math.factorial(n - m))


def p_falling(r: Sequence[int], l: Sequence[int]) -> int:
    out = 1
    for ri, li in zip(r, l):
        out *= falling(ri, li)
    return out


def chi_h(ctx: HahnContext, m: int, r: Sequence[int], s: Sequence[int]):
    """Falling-factorial kernel chi^H_m(r, s)."""
    ctx.check(r)
    ctx.check(s)
    if m > ctx.N:
        raise DomainError(f"chi^H_m needs m <= N, got m={m}, N={ctx.N}")
    total = ctx.total
    nf = falling(ctx.N, m)
    out = 0
    for l in compositions(ctx.d, m):
        pr = p_falling(r, l)
        ps = p_falling(s, l)
        if pr == 0 or ps == 0:
            continue
        den = 1
        for a, li in zip(ctx.alpha, l):
            den *= rising(a, li)
        out += ratio(multinomial(l) * pr * ps * rising(total, m), den * nf * nf)
    return out


def h_kernel_chi(ctx: HahnContext, n: int, r: Sequence[int], s: Sequence[int]):
    """Degree-n Hahn kernel from the chi^H (product-formula) expansion."""
    if n > ctx.N:
        raise DomainError(f"degree n={n} exceeds N={ctx.N}")
    total = ctx.total
    pre = ratio(falling(ctx.N, n), rising(total + ctx.N, n))
    out = 0
    for m in range(n + 1):
        out += coeff_a(total, n, m) * chi_h(ctx, m, r, s)
    return pre * out


def connection_b(total_alpha, N: int, m: int, l: int):
    """Coefficient b_{ml} with xi^H_m = sum_l b_{ml} chi^H_l."""
    if not 0 <= l <= m <= N:
        raise DomainError(f"need 0 <= l <= m <= N, got l={l}, m={m}, N={N}")
    out = 0
    for n in range(l, m + 1):
        w = ratio(falling(N, n), rising(total_alpha + N, n))
        out += w * w * coeff_c(total_alpha, m, n) * coeff_a(total_alpha, n, l)
    return out


def xi_chi_cross_moment(total_alpha, m: int, l: int):
    """Closed form of E[xi^H_m chi^H_l] under DM_alpha x DM_alpha."""
    out = 0
    for n in range(min(m, l) + 1):
        out += ratio(falling(m, n) * falling(l, n),
                     rising(total_alpha + m, n) * rising(total_alpha + l, n))
    return out


# --- univariate Hahn polynomials (d = 2) ----------------------------------

def univariate_hahn(alpha, beta, n: int, r: int, N: int):
    """h_n(r; N) = 3F2(-n, n+theta-1, -r; alpha, -N; 1).

    r counts the outcomes of the alpha-type; h_n(0; N) = 1.
    """
    if not (0 <= n <= N and 0 <= r <= N):
        raise DomainError(f"need 0 <= n, r <= N, got n={n}, r={r}, N={N}")
    if n == 0:
        return Fraction(1) if isinstance(alpha + beta, (int, Fraction)) else 1.0
    theta = alpha + beta
    return hyp_terminating([-n, n + theta - 1, -r], [alpha, -N], 1, n)


def u_norm(alpha, beta, N: int, n: int):
    """u with 1/u = sum_r h_n(r; N)^2 DM_{alpha,beta}(r; N)."""
    if n == 0:
        return 1
    theta = alpha + beta
    inv = ratio(rising(theta + N, n) * rising(beta, n),
                math.comb(N, n) * rising(theta, n - 1) * (theta + 2 * n - 1) * rising(alpha, n))
    return ratio(1, inv)


def gasper_product(alpha, beta, n: int, r: int, s: int, N: int):
    """Double-sum product formula for h_n(r; N) h_n(s; N)."""
    theta = alpha + beta
    out = 0
    for l in range(n + 1):
        for k in range(n - l + 1):
            num = ((-1) ** (l + k) * falling(n, l + k) * rising(theta + n - 1, l + k)
                   * falling(r, l) * falling(s, l) * falling(N - r, k) * falling(N - s, k))
            den = (math.factorial(l) * math.factorial(k) * falling(N, l + k) ** 2
                   * rising(alpha, l) * rising(beta, k))
            out += ratio(num, den)
    return ratio((-1) ** n * rising(beta, n), rising(alpha, n)) * out


def chi_h_binomial(alpha, beta, m: int, r: int, s: int, N: int):
    """d = 2 form of chi^H_m with r, s the alpha-type counts."""
    theta = alpha + beta
    nf = falling(N, m)
    out = 0
    for j in range(m + 1):
        dm = ratio(math.comb(m, j) * rising(alpha, j) * rising(beta, m - j), rising(theta, m))
        br = ratio(math.comb(m, j) * falling(r, j) * falling(N - r, m - j), nf)
        bs = ratio(math.comb(m, j) * falling(s, j) * falling(N - s, m - j), nf)
        out += br * bs / dm
    return out


def project_hahn(ctx: HahnContext, n: int, s: Sequence[int], j: int):
    """H_n(s, N e_j) through the univariate Hahn polynomials of coordinate j (0-based)."""
    ctx.check(s)
    if not 0 <= j < ctx.d:
        raise DomainError(f"coordinate {j} out of range")
    if n > ctx.N:
        raise DomainError(f"degree n={n} exceeds N={ctx.N}")
    aj = ctx.alpha[j]
    rest = ctx.total - aj
    return (u_norm(aj, rest, ctx.N, n) * univariate_hahn(aj, rest, n, s[j], ctx.N)
            * univariate_hahn(aj, rest, n, ctx.N, ctx.N))


# --- hypergeometric kernels -----------------------------------------------

def hypergeom_range(c: Sequence[int], N: int) -> int:
    """Largest degree with a non-degenerate kernel under hypergeom(c, N)."""
    return min(N, sum(c) - N)


def hypergeom_kernel(c: Sequence[int], N: int, n: int, r: Sequence[int], s: Sequence[int]):
    """Kernel orthogonal under the multivariate hypergeometric law, via alpha = -c."""
    if any(ci <= 0 for ci in c):
        raise DomainError("urn contents must be positive")
    if N > sum(c):
        raise DomainError(f"N={N} exceeds urn size {sum(c)}")
    for v in (r, s):
        if any(vi > ci for vi, ci in zip(v, c)):
            raise DomainError(f"composition {tuple(v)} exceeds urn contents {tuple(c)}")
    top = hypergeom_range(c, N)
    if n > top:
        raise DomainError(f"degree n={n} outside the orthogonal range n <= {top}")
    ctx = HahnContext(tuple(-Fraction(ci) for ci in c), N)
    pre = _prefactor(ctx.total, N, n)
    out = Fraction(0)
    for m in range(n + 1):
        out += _coeff_a_any(ctx.total, n, m) * xi_h(ctx, m, r, s)
    return pre * out
