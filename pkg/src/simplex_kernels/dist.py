"""Dirichlet-type distributions on the continuous and discrete simplex.

Pmfs are exact when their inputs are Fractions.  Samplers are numpy-based and
take an :class:`RngStream`, so a fixed seed reproduces a sample path exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .numkit import (
    DomainError,
    PartitionProfile,
    as_exact,
    falling,
    is_exact,
    multinomial,
    ratio,
    rising,
    total_of,
)

SIMPLEX_TOL = 1e-12
PD_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class DirichletParams:
    """Positive weights alpha with their cached total |alpha|."""

    alpha: Tuple
    total: object = field(init=False)

    def __post_init__(self):
        alpha = tuple(self.alpha)
        if not alpha:
            raise DomainError("alpha must have at least one coordinate")
        if any(a <= 0 for a in alpha):
            raise DomainError(f"alpha must be strictly positive, got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "total", total_of(alpha))

    @classmethod
    def parse(cls, text: str, exact: bool = True) -> "DirichletParams":
        vals = [as_exact(v) for v in text.split(",")]
        return cls(tuple(vals if exact else map(float, vals)))

    @property
    def d(self) -> int:
        return len(self.alpha)

    def __len__(self):
        return len(self.alpha)

    def __iter__(self):
        return iter(self.alpha)

    def __getitem__(self, i):
        return self.alpha[i]

    def shifted(self, r: Sequence[int]) -> "DirichletParams":
        return DirichletParams(tuple(a + ri for a, ri in zip(self.alpha, r)))


def params(alpha) -> DirichletParams:
    return alpha if isinstance(alpha, DirichletParams) else DirichletParams(tuple(alpha))


def check_simplex(x: Sequence, d: int | None = None) -> None:
    if d is not None and len(x) != d:
        raise DomainError(f"point has dimension {len(x)}, expected {d}")
    if any(v < 0 for v in x):
        raise DomainError(f"simplex point has a negative coordinate: {x}")
    s = sum(x)
    if all(is_exact(v) for v in x):
        if s != 1:
            raise DomainError(f"exact simplex point must sum to 1, sums to {s}")
    elif abs(s - 1) > SIMPLEX_TOL:
        raise DomainError(f"simplex point sums to {s}, off by more than {SIMPLEX_TOL}")


class RngStream:
    """Seeded numpy generator; identical seeds give identical draw sequences."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, n: int) -> list["RngStream"]:
        """Independent child streams, reproducible from the parent seed."""
        children = np.random.SeedSequence(self.seed).spawn(n)
        out = []
        for i, ss in enumerate(children):
            child = RngStream.__new__(RngStream)
            child.seed = self.seed * 1_000_003 + i
            child.gen = np.random.Generator(np.random.PCG64(ss))
            out.append(child)
        return out


# --- pmfs -----------------------------------------------------------------

def dm_pmf(alpha, r: Sequence[int]):
    """Dirichlet-multinomial mass of the composition r (N = |r|)."""
    a = params(alpha)
    if len(r) != a.d:
        raise DomainError(f"composition has length {len(r)}, alpha has {a.d}")
    num = multinomial(tuple(r))
    for ai, ri in zip(a, r):
        num *= rising(ai, ri)
    return ratio(num, rising(a.total, sum(r)))


def esf_pmf(theta, part: PartitionProfile):
    """Ewens sampling formula probability of a partition of |part|."""
    n = part.total
    if n < 1:
        raise DomainError("Ewens sampling formula needs a partition of at least 1")
    denom = 1
    for j, b in part.multiplicities.items():
        denom *= j ** b * math.factorial(b)
    return ratio(math.factorial(n) * theta ** part.k, denom * rising(theta, n))


def ranked_dm_pmf(theta, d: int, part: PartitionProfile, N: int):
    """Ranked symmetric Dirichlet-multinomial mass (parameter theta/d per cell)."""
    if part.total != N:
        raise DomainError(f"partition of {part.total} does not match N={N}")
    if part.k > d:
        raise DomainError(f"partition {part.parts} has more than d={d} parts")
    a = ratio(theta, d)
    num = falling(d, part.k) * math.factorial(N)
    denom = 1
    for j, b in part.multiplicities.items():
        num *= rising(a, j) ** b
        denom *= math.factorial(j) ** b * math.factorial(b)
    return ratio(num, denom * rising(theta, N))


def hypergeom_pmf(c: Sequence[int], r: Sequence[int]):
    """Multivariate hypergeometric mass prod C(c_i, r_i) / C(|c|, |r|)."""
    if len(c) != len(r):
        raise DomainError("c and r must have the same length")
    if any(ri > ci or ri < 0 for ri, ci in zip(r, c)):
        raise DomainError(f"composition {tuple(r)} exceeds urn contents {tuple(c)}")
    num = 1
    for ci, ri in zip(c, r):
        num *= math.comb(ci, ri)
    return Fraction(num, math.comb(sum(c), sum(r)))


# --- samplers -------------------------------------------------------------

def sample_dirichlet(alpha, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Gamma-normalisation draw(s); shape (d,) or (size, d)."""
    a = np.asarray([float(v) for v in params(alpha)])
    shape = a.shape if size is None else (size, a.size)
    g = rng.gen.standard_gamma(np.broadcast_to(a, shape))
    return g / g.sum(axis=-1, keepdims=True)


def sample_dm(alpha, N: int, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Dirichlet then multinomial compounding."""
    x = sample_dirichlet(alpha, rng, size)
    return multinomial_split(N, x, rng)


def multinomial_split(N, x: np.ndarray, rng: RngStream) -> np.ndarray:
    """Multinomial(N, x) by sequential conditional binomials, row-wise.

    ``N`` may be a scalar or one count per row.
    """
    x = np.atleast_2d(x)
    rows, d = x.shape
    remaining = np.broadcast_to(np.asarray(N, dtype=np.int64), (rows,)).copy()
    left = np.ones(rows)
    out = np.zeros((rows, d), dtype=np.int64)
    for i in range(d - 1):
        p = np.where(left > 0, np.clip(x[:, i] / np.where(left > 0, left, 1.0), 0.0, 1.0), 0.0)
        k = rng.gen.binomial(remaining, p)
        out[:, i] = k
        remaining -= k
        left = left - x[:, i]
    out[:, d - 1] = remaining
    return out


def sample_posterior_dirichlet(alpha, r: Sequence[int], rng: RngStream, size: int | None = None):
    return sample_dirichlet(params(alpha).shifted(r), rng, size)


@dataclass
class RankedPoint:
    """Weakly decreasing weights; ``tail`` is the mass not represented by atoms."""

    weights: np.ndarray
    tail: float = 0.0

    def power_sum(self, k: int) -> float:
        # the tail is a cloud of infinitesimal atoms: it only counts for k == 1
        if k == 1:
            return float(self.weights.sum()) + self.tail
        return float(np.sum(self.weights ** k))


def sample_pd(theta, truncation: int, rng: RngStream, tail_tol: float = PD_TAIL_TOL) -> RankedPoint:
    """Poisson-Dirichlet(theta) by GEM stick-breaking, then ranking.

    Sticks are broken until the unbroken mass drops below ``tail_tol``; if that
    needs more than ``truncation`` atoms a DomainError is raised.
    """
    if truncation < 1:
        raise DomainError("truncation must be at least 1")
    theta = float(theta)
    left = 1.0
    atoms = []
    block = 32
    while left >= tail_tol:
        if len(atoms) >= truncation:
            raise DomainError(
                f"tail mass {left:.3g} still above {tail_tol:g} after {truncation} atoms"
            )
        v = rng.gen.beta(1.0, theta, size=block)
        for vi in v:
            atoms.append(left * vi)
            left *= 1.0 - vi
            if left < tail_tol or len(atoms) >= truncation:
                break
    w = np.sort(np.asarray(atoms))[::-1]
    return RankedPoint(w, left)


def sample_pd_batch(theta, size: int, rng: RngStream, n_sticks: int | None = None,
                    tail_tol: float = PD_TAIL_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised GEM draws: ranked weights of shape (size, n_sticks) and tails.

    ``n_sticks`` defaults to a stick count whose expected leftover is far below
    ``tail_tol``; rows whose leftover still exceeds it are redrawn.
    """
    theta = float(theta)
    if n_sticks is None:
        # E[log leftover] = -k / theta; leave 12 standard deviations of room
        target = -math.log(tail_tol) * theta
        n_sticks = int(target + 12 * math.sqrt(max(target, 1.0)) * max(theta, 1.0) ** 0.5 + 20)
    w = np.empty((size, n_sticks))
    tails = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        v = rng.gen.beta(1.0, theta, size=(todo.size, n_sticks))
        keep = np.cumprod(1.0 - v, axis=1)
        prev = np.concatenate([np.ones((todo.size, 1)), keep[:, :-1]], axis=1)
        atoms = prev * v
        ok = keep[:, -1] < tail_tol
        idx = todo[ok]
        w[idx] = -np.sort(-atoms[ok], axis=1)
        tails[idx] = keep[ok, -1]
        todo = todo[~ok]
    return w, tails


class RunningStats:
    """Streaming mean and variance (Welford), mergeable across batches."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push_batch(self, values) -> "RunningStats":
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return self
        other = RunningStats()
        other.n = v.size
        other.mean = float(v.mean())
        other.m2 = float(((v - other.mean) ** 2).sum())
        return self.merge(other)

    def merge(self, other: "RunningStats") -> "RunningStats":
        n = self.n + other.n
        if n == 0:
            return self
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else float("nan")

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.n) if self.n > 1 else float("nan")

    def z_score(self, target) -> float:
        se = self.se
        diff = self.mean - float(target)
        if se == 0:
            return 0.0 if abs(diff) < 1e-12 else math.copysign(math.inf, diff)
        return diff / se
