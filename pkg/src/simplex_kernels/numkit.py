"""Scalar kernels shared by every other module.

Exact work is done with :class:`fractions.Fraction`; floating work with plain
Python floats or numpy arrays.  Python's numeric tower already promotes
``Fraction`` op ``float`` to ``float``, which is the mixed-flavor rule we want,
so the functions here are written once and accept either flavor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from numbers import Rational
from typing import Dict, Iterator, Sequence, Tuple

Scalar = "Fraction | float | int"
MultiIndex = Tuple[int, ...]
Poly = Dict[MultiIndex, object]


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


def as_exact(value) -> Fraction:
    """Parse a number or a string such as ``"3/2"`` into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def is_exact(value) -> bool:
    return isinstance(value, Rational)


def ratio(a, b):
    """a / b that stays a Fraction when both operands are rational."""
    if is_exact(a) and is_exact(b):
        if b == 0:
            raise ZeroDivisionError("exact division by zero")
        return Fraction(a) / Fraction(b)
    return a / b


def rising(a, x: int):
    """Rising factorial a(a+1)...(a+x-1); 1 when x == 0."""
    if x < 0:
        raise DomainError(f"rising factorial needs x >= 0, got {x}")
    out = 1 if is_exact(a) else 1.0
    for i in range(x):
        out *= a + i
    return out


def falling(a, x: int):
    """Falling factorial a(a-1)...(a-x+1); 1 when x == 0."""
    if x < 0:
        raise DomainError(f"falling factorial needs x >= 0, got {x}")
    out = 1 if is_exact(a) else 1.0
    for i in range(x):
        out *= a - i
    return out


@lru_cache(maxsize=None)
def multinomial(m: MultiIndex) -> int:
    out = math.factorial(sum(m))
    for part in m:
        out //= math.factorial(part)
    return out


def _compositions(d: int, total: int) -> Iterator[MultiIndex]:
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(d - 1, total - first):
            yield (first,) + rest


@lru_cache(maxsize=4096)
def compositions(d: int, total: int) -> Tuple[MultiIndex, ...]:
    """All length-``d`` multi-indices summing to ``total`` in lexicographic order."""
    if d < 1 or total < 0:
        raise DomainError(f"need d >= 1 and total >= 0, got d={d}, total={total}")
    return tuple(_compositions(d, total))


def enumerate_compositions(d: int, total: int) -> Iterator[MultiIndex]:
    return iter(compositions(d, total))


@dataclass(frozen=True)
class PartitionProfile:
    """An integer partition held both as ranked parts and as multiplicities.

    ``parts`` is weakly decreasing with no zeros; ``multiplicities[j]`` is the
    number of parts equal to ``j``.
    """

    parts: Tuple[int, ...]
    multiplicities: Dict[int, int] = field(compare=False, hash=False, repr=False, default=None)

    def __post_init__(self):
        parts = tuple(sorted((p for p in self.parts if p > 0), reverse=True))
        object.__setattr__(self, "parts", parts)
        mult: Dict[int, int] = {}
        for p in parts:
            mult[p] = mult.get(p, 0) + 1
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_vector(cls, r: Sequence[int]) -> "PartitionProfile":
        return cls(tuple(r))

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    def beta(self, j: int) -> int:
        return self.multiplicities.get(j, 0)

    def padded(self, d: int) -> MultiIndex:
        if self.k > d:
            raise DomainError(f"partition {self.parts} has more than {d} parts")
        return self.parts + (0,) * (d - self.k)


def _partitions(total: int, max_parts: int, largest: int) -> Iterator[Tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, max_parts - 1, first):
            yield (first,) + rest


def enumerate_partitions(total: int, max_parts: int) -> Iterator[PartitionProfile]:
    """Partitions of ``total`` into at most ``max_parts`` parts, largest first part first."""
    if total < 0 or max_parts < 1:
        raise DomainError(f"need total >= 0 and max_parts >= 1, got {total}, {max_parts}")
    for parts in _partitions(total, max_parts, total):
        yield PartitionProfile(parts)


def set_partitions(items: Sequence[int]) -> Iterator[list]:
    """All set partitions of ``items`` (as lists of blocks)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        yield [[first]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]


def distinct_permutations(m: Sequence[int]) -> Iterator[MultiIndex]:
    """Distinct rearrangements of ``m`` (the orbit of a multi-index under S_d)."""
    return iter(sorted(set(permutations(m))))


def hyp_terminating(numer: Sequence, denom: Sequence, z, terminate_at: int):
    """Terminating generalized hypergeometric series pFq(numer; denom; z).

    One numerator parameter must equal ``-terminate_at``; the sum runs over
    terms ``0..terminate_at``.  Any numbers of upper and lower parameters are allowed.
    """
    n = terminate_at
    if n < 0 or not any(_equals_int(a, -n) for a in numer):
        raise DomainError(f"no numerator parameter equals -{n}; the series does not terminate")
    exact = all(is_exact(v) for v in (*numer, *denom, z))
    term = Fraction(1) if exact else 1.0
    total = term
    for k in range(n):
        num = 1
        for a in numer:
            num *= a + k
        den = k + 1
        for b in denom:
            if b + k == 0:
                raise DomainError(f"denominator parameter {b} vanishes at term {k + 1}")
            den *= b + k
        term = term * num * z / den
        total += term
    return total


def _equals_int(a, target: int) -> bool:
    try:
        return a == target
    except TypeError:
        return False


def total_of(alpha: Sequence):
    out = 0
    for a in alpha:
        out += a
    return out


def dirichlet_moment(alpha: Sequence, k: Sequence[int]):
    """E[prod X_i^k_i] for X ~ Dirichlet(alpha)."""
    if len(alpha) != len(k):
        raise DomainError(f"alpha has length {len(alpha)} but k has length {len(k)}")
    num = 1
    for a, ki in zip(alpha, k):
        num *= rising(a, ki)
    return ratio(num, rising(total_of(alpha), sum(k)))


def dm_weight(alpha: Sequence, l: Sequence[int]):
    """Dirichlet-multinomial mass DM_alpha(l; |l|)."""
    return multinomial(tuple(l)) * dirichlet_moment(alpha, l)


def monomial(x: Sequence, l: Sequence[int]):
    out = 1
    for xi, li in zip(x, l):
        if li:
            out *= xi ** li
    return out


# Sparse polynomials in d variables: {exponent tuple: coefficient}.

def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def poly_scale(p: Poly, c) -> Poly:
    return {e: v * c for e, v in p.items() if v * c != 0}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def poly_eval(p: Poly, x: Sequence):
    total = 0
    for e, c in p.items():
        total += c * monomial(x, e)
    return total


def poly_expect_dirichlet(p: Poly, alpha: Sequence):
    """E[p(X)] for X ~ Dirichlet(alpha), by exact moments when inputs are exact."""
    total = 0
    for e, c in p.items():
        total += c * dirichlet_moment(alpha, e)
    return total
