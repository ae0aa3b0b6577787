"""Kernels that are symmetric under relabelling of the coordinates.

Covers the ranked symmetric Dirichlet (parameter theta/d per cell), its
Poisson-Dirichlet limit, the ranked Dirichlet-multinomial and its Ewens
sampling formula limit.  Sums over distinct index tuples are computed by
inclusion-exclusion over set partitions of the tuple slots, so only power
sums of the point are needed; this is what makes the d -> infinity forms
computable from a truncated ranked point.
"""
from __future__ import annotations

import math
from itertools import permutations
from typing import Callable, Sequence

from .dist import RankedPoint, esf_pmf, ranked_dm_pmf
from .jacobi import coeff_a
from .numkit import (
    DomainError,
    PartitionProfile,
    Poly,
    enumerate_partitions,
    falling,
    is_exact,
    multinomial,
    ratio,
    rising,
    set_partitions,
)

TAIL_BUDGET = 1e-6


def _mobius(block_value: Callable[[tuple], object], k: int):
    """Sum over ordered tuples of distinct indices, given block sums.

    ``block_value(B)`` must return sum_i prod_{j in B} g_j(i) for a block B of
    slots; the result is sum over distinct (i_1..i_k) of prod_j g_j(i_j).
    """
    total = 0
    for blocks in set_partitions(list(range(k))):
        term = 1
        for b in blocks:
            term *= (-1) ** (len(b) - 1) * math.factorial(len(b) - 1) * block_value(tuple(b))
            if term == 0:
                break
        total += term
    return total


def _power_sums(x, upto: int) -> list:
    """p_0..p_upto of a point; a RankedPoint tail counts only toward p_1."""
    if isinstance(x, RankedPoint):
        return [None] + [x.power_sum(k) for k in range(1, upto + 1)]
    out = [None]
    for k in range(1, upto + 1):
        s = 0
        for v in x:
            s += v ** k
        out.append(s)
    return out


def power_sum_functional(x, part: PartitionProfile, psums: list | None = None):
    """[x; l] = sum over distinct index tuples of prod_j x_{i_j}^{l_j}."""
    l = part.parts
    if not l:
        return 1
    if psums is None:
        psums = _power_sums(x, sum(l))
    return _mobius(lambda b: psums[sum(l[j] for j in b)], len(l))


def sharp(part: PartitionProfile) -> object:
    """Multinomial coefficient of the parts divided by prod_j beta_j!."""
    den = 1
    for b in part.multiplicities.values():
        den *= math.factorial(b)
    return ratio(multinomial(part.parts), den)


def xi_ranked(theta, d: int, m: int, x, y):
    """Ranked posterior kernel for the symmetric Dirichlet(theta/d, ..., theta/d)."""
    if m == 0:
        return 1
    px = _power_sums(x, m)
    py = _power_sums(y, m)
    out = 0
    for part in enumerate_partitions(m, d):
        sh = sharp(part)
        out += ratio(sh * sh * power_sum_functional(x, part, px) * power_sum_functional(y, part, py),
                     ranked_dm_pmf(theta, d, part, m))
    return out


def q_kernel_ranked(theta, d: int, n: int, x, y):
    out = 0
    for m in range(n + 1):
        out += coeff_a(theta, n, m) * xi_ranked(theta, d, m, x, y)
    return out


def _check_tail(x, budget: float):
    if isinstance(x, RankedPoint) and x.tail > budget:
        raise DomainError(f"ranked point tail mass {x.tail:.3g} exceeds budget {budget:g}")


def xi_pd(theta, m: int, x, y, tail_budget: float = TAIL_BUDGET):
    """Posterior kernel for the Poisson-Dirichlet law (infinitely many cells)."""
    _check_tail(x, tail_budget)
    _check_tail(y, tail_budget)
    if m == 0:
        return 1
    px = _power_sums(x, m)
    py = _power_sums(y, m)
    out = 0
    for part in enumerate_partitions(m, m):
        sh = sharp(part)
        out += ratio(sh * sh * power_sum_functional(x, part, px) * power_sum_functional(y, part, py),
                     esf_pmf(theta, part))
    return out


def q_kernel_pd(theta, n: int, x, y, tail_budget: float = TAIL_BUDGET):
    """Degree-n kernel for the Poisson-Dirichlet(theta) law."""
    out = 0
    for m in range(n + 1):
        out += coeff_a(theta, n, m) * xi_pd(theta, m, x, y, tail_budget)
    return out


def pd_second_kernel_closed(theta, x, y):
    """(F(x) - mu)(F(y) - mu) / sigma^2 with F the sum of squared weights."""
    mu = ratio(1, 1 + theta)
    var = ratio(2 * theta, (theta + 3) * (theta + 2) * (theta + 1) ** 2)
    fx = _power_sums(x, 2)[2]
    fy = _power_sums(y, 2)[2]
    return (fx - mu) * (fy - mu) / var


# --- polynomials ----------------------------------------------------------

def symmetrize_polynomial(p: Poly) -> Poly:
    """Average of p over all coordinate permutations."""
    out: Poly = {}
    for e, c in p.items():
        orbit = set(permutations(e))
        share = ratio(c, len(orbit)) if is_exact(c) else c / len(orbit)
        for e2 in orbit:
            out[e2] = out.get(e2, 0) + share
    return {e: c for e, c in out.items() if c != 0}


# --- ranked Hahn and Ewens kernels ----------------------------------------

def _falling_or_rising_block(vals, l, b):
    # sum over cells i of prod_{j in b} (vals_i)_(l_j), vals_i = a + r_i
    s = 0
    for v in vals:
        t = 1
        for j in b:
            t *= rising(v, l[j])
        s += t
    return s


def _shifted_functional(a, r: Sequence[int], part: PartitionProfile):
    """sum over distinct cell tuples of prod_j (a + r_{i_j})_(l_j) for a finite vector r."""
    l = part.parts
    vals = [a + ri for ri in r]
    return _mobius(lambda b: _falling_or_rising_block(vals, l, b), len(l))


def _shifted_functional_limit(theta, r: Sequence[int], part: PartitionProfile):
    """Limit of the shifted functional as d -> infinity with a = theta/d.

    Empty cells contribute only through single-slot blocks, each worth
    theta (l_j - 1)!.
    """
    l = part.parts
    occupied = [ri for ri in r if ri > 0]

    def block(b):
        s = _falling_or_rising_block(occupied, l, b)
        if len(b) == 1:
            s += theta * math.factorial(l[b[0]] - 1)
        return s

    return _mobius(block, len(l))


def xi_h_ranked(theta, d: int, N: int, m: int, r: Sequence[int], s: Sequence[int]):
    """Permutation-averaged posterior Hahn kernel (symmetric theta/d parameters)."""
    if len(r) != d or len(s) != d:
        raise DomainError(f"compositions must have length d={d}")
    if sum(r) != N or sum(s) != N:
        raise DomainError(f"compositions must sum to N={N}")
    if m == 0:
        return 1
    a = ratio(theta, d)
    out = 0
    for part in enumerate_partitions(m, d):
        sh = sharp(part)
        out += ratio(sh * sh * _shifted_functional(a, r, part) * _shifted_functional(a, s, part),
                     ranked_dm_pmf(theta, d, part, m))
    return ratio(out, rising(theta + N, m) ** 2)


def h_kernel_ranked(theta, d: int, N: int, n: int, r: Sequence[int], s: Sequence[int]):
    if n > N:
        raise DomainError(f"degree n={n} exceeds N={N}")
    out = 0
    for m in range(n + 1):
        out += coeff_a(theta, n, m) * xi_h_ranked(theta, d, N, m, r, s)
    return ratio(rising(theta + N, n), falling(N, n)) * out


def xi_h_esf(theta, N: int, m: int, part_r: PartitionProfile, part_s: PartitionProfile):
    if part_r.total != N or part_s.total != N:
        raise DomainError(f"partitions must be partitions of N={N}")
    if m == 0:
        return 1
    out = 0
    for part in enumerate_partitions(m, m):
        sh = sharp(part)
        out += ratio(sh * sh * _shifted_functional_limit(theta, part_r.parts, part)
                     * _shifted_functional_limit(theta, part_s.parts, part),
                     esf_pmf(theta, part))
    return ratio(out, rising(theta + N, m) ** 2)


def h_kernel_esf(theta, N: int, n: int, part_r: PartitionProfile, part_s: PartitionProfile):
    """Degree-n kernel orthogonal under the Ewens sampling formula on partitions of N."""
    if n > N:
        raise DomainError(f"degree n={n} exceeds N={N}")
    out = 0
    for m in range(n + 1):
        out += coeff_a(theta, n, m) * xi_h_esf(theta, N, m, part_r, part_s)
    return ratio(rising(theta + N, n), falling(N, n)) * out
