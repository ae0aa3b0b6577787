"""Exchangeable pairs with Dirichlet or Poisson-Dirichlet marginals.

X is drawn from the marginal.  Given a sample size M from the mixing pmf,
counts l ~ Multinomial(M, X) are taken and Y is drawn from the posterior
given l.  The canonical correlations of the pair are the image of the pmf under
``pds.pmf_to_jpds``; ``estimate_canonical_correlation`` recovers them from
samples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .dist import (
    DirichletParams,
    RngStream,
    multinomial_split,
    params,
    sample_dirichlet,
    sample_pd_batch,
)
from .jacobi import q_kernel_batch, univariate_r, zeta
from .numkit import DomainError
from .pds import DegreeSequence, _check_pmf, dirac_pmf


@dataclass
class CopulaSpec:
    """Marginal (Dirichlet alpha, or Poisson-Dirichlet theta) and mixing pmf of M."""

    pmf: DegreeSequence
    alpha: Optional[DirichletParams] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.pmf, DegreeSequence):
            self.pmf = DegreeSequence(list(self.pmf))
        _check_pmf(self.pmf)
        if (self.alpha is None) == (self.theta is None):
            raise DomainError("give exactly one of alpha (Dirichlet) or theta (Poisson-Dirichlet)")
        if self.alpha is not None:
            self.alpha = params(self.alpha)
        elif self.theta <= 0:
            raise DomainError("theta must be positive")

    @classmethod
    def dirac(cls, m: int, alpha=None, theta=None) -> "CopulaSpec":
        return cls(dirac_pmf(m), params(alpha) if alpha is not None else None, theta)

    @property
    def degenerate(self) -> bool:
        return sum(1 for v in self.pmf.values if v != 0) == 1

    @property
    def ranked(self) -> bool:
        return self.theta is not None

    def draw_m(self, rng: RngStream, size: int) -> np.ndarray:
        p = np.array(self.pmf.floats())
        if self.degenerate:
            return np.full(size, int(np.flatnonzero(p)[0]), dtype=np.int64)
        return rng.gen.choice(p.size, size=size, p=p / p.sum())


def sample_pairs(spec: CopulaSpec, rng: RngStream, size: int):
    """Draw ``size`` pairs; returns arrays X, Y of shape (size, d)."""
    if spec.ranked:
        raise DomainError("a CopulaSpec with theta needs sample_pair_pd")
    a = np.array([float(v) for v in spec.alpha])
    X = sample_dirichlet(spec.alpha, rng, size)
    M = spec.draw_m(rng, size)
    counts = multinomial_split(M, X, rng)
    g = rng.gen.standard_gamma(a[None, :] + counts)
    Y = g / g.sum(axis=1, keepdims=True)
    return X, Y


def sample_pair(spec: CopulaSpec, rng: RngStream):
    X, Y = sample_pairs(spec, rng, 1)
    return X[0], Y[0]


@dataclass
class RankedPairs:
    """Ranked weights of both coordinates plus their unrepresented tail masses."""

    x: np.ndarray
    x_tail: np.ndarray
    y: np.ndarray
    y_tail: np.ndarray

    def power_sums(self, k: int):
        """sum_i w_i^k for each row of x and y (tails count only for k = 1)."""
        if k == 1:
            return self.x.sum(axis=1) + self.x_tail, self.y.sum(axis=1) + self.y_tail
        return (self.x ** k).sum(axis=1), (self.y ** k).sum(axis=1)


def sample_pair_pd(theta, m, rng: RngStream, size: int, n_sticks: Optional[int] = None,
                   tail_tol: float = 1e-6) -> RankedPairs:
    """Exchangeable pairs with Poisson-Dirichlet(theta) marginals.

    ``m`` is a fixed sample size or a pmf (DegreeSequence).  Given X, counts
    l ~ Multinomial(M, X) mark the occupied atoms; Y gives the occupied cells
    Dirichlet(l_1, .., l_k, theta) weights, and the last share is filled with
    a fresh, independent PD(theta) draw.  This is the d -> infinity limit of
    the symmetric Dirichlet(theta/d + l_i) posterior.  Counts landing in the
    unrepresented tail are treated as distinct singleton atoms.
    """
    theta = float(theta)
    if theta <= 0:
        raise DomainError("theta must be positive")
    if isinstance(m, (int, np.integer)):
        M = np.full(size, int(m), dtype=np.int64)
    else:
        M = CopulaSpec(m, theta=theta).draw_m(rng, size)
    w, tails = sample_pd_batch(theta, size, rng, n_sticks, tail_tol)
    cells = np.concatenate([w, tails[:, None]], axis=1)
    counts = multinomial_split(M, cells, rng)
    tail_counts = counts[:, -1]
    counts = counts[:, :-1]
    kmax = int(M.max()) if size else 0
    if counts.shape[1] < kmax:
        counts = np.pad(counts, ((0, 0), (0, kmax - counts.shape[1])))
    # at most M occupied cells per row: pack their counts into kmax columns
    order = np.argsort(-counts, axis=1, kind="stable")[:, :kmax]
    top = np.take_along_axis(counts, order, axis=1).astype(float)
    # tail hits become singletons in the free columns
    top = np.where(_first_free(top, tail_counts), 1.0, top)
    shape = np.concatenate([top, np.full((size, 1), theta)], axis=1)
    g = np.where(shape > 0, rng.gen.standard_gamma(np.where(shape > 0, shape, 1.0)), 0.0)
    share = g / g.sum(axis=1, keepdims=True)
    fresh, fresh_tail = sample_pd_batch(theta, size, rng, n_sticks, tail_tol)
    rest = share[:, -1:]
    y = np.concatenate([share[:, :-1], rest * fresh], axis=1)
    y = -np.sort(-y, axis=1)
    return RankedPairs(w, tails, y, rest[:, 0] * fresh_tail)


def _first_free(top: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Mask selecting the first k[i] zero columns of each row of top."""
    free = top == 0
    rank = np.cumsum(free, axis=1)
    return free & (rank <= k[:, None])


# --- estimation -----------------------------------------------------------

@dataclass
class CorrelationEstimate:
    n: int
    estimate: float
    se: float
    draws: int

    def z_score(self, target) -> float:
        if self.se == 0:
            return 0.0 if abs(self.estimate - float(target)) < 1e-12 else math.inf
        return (self.estimate - float(target)) / self.se

    def as_dict(self) -> dict:
        return {"n": self.n, "estimate": self.estimate, "se": self.se, "draws": self.draws}


def _mean_with_jackknife(values: np.ndarray):
    # the delete-one jackknife standard error of a sample mean is s / sqrt(n)
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def orthonormal_r_batch(alpha, beta, n: int, x: np.ndarray) -> np.ndarray:
    """sqrt(zeta_n) R_n(x) evaluated on an array."""
    return math.sqrt(float(zeta(alpha, beta, n))) * univariate_r(alpha, beta, n, np.asarray(x, float))


def estimate_canonical_correlation(X: np.ndarray, Y: np.ndarray, alpha, n: int) -> CorrelationEstimate:
    """Estimate rho_n from paired samples.

    For d = 2 this is the mean of Q°_n(X_1) Q°_n(Y_1) with Q°_n the
    orthonormal Jacobi polynomial.  For general d it uses E[Q_n(X, Y)] =
    rho_n C(n + d - 2, n), the number of orthonormal polynomials of degree n.
    """
    a = params(alpha)
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    if n == 0:
        return CorrelationEstimate(0, 1.0, 0.0, X.shape[0])
    if a.d == 2:
        v = (orthonormal_r_batch(a[0], a[1], n, X[:, 0])
             * orthonormal_r_batch(a[0], a[1], n, Y[:, 0]))
    else:
        v = q_kernel_batch(a, n, X, Y) / math.comb(n + a.d - 2, n)
    est, se = _mean_with_jackknife(v)
    return CorrelationEstimate(n, est, se, v.size)


def estimate_pd_second_correlation(pairs: RankedPairs, theta) -> CorrelationEstimate:
    """rho_2 from E[(F(X) - mu)(F(Y) - mu)] / sigma^2 with F the sum of squared weights."""
    theta = float(theta)
    mu = 1.0 / (1.0 + theta)
    var = 2 * theta / ((theta + 3) * (theta + 2) * (theta + 1) ** 2)
    fx, fy = pairs.power_sums(2)
    est, se = _mean_with_jackknife((fx - mu) * (fy - mu) / var)
    return CorrelationEstimate(2, est, se, fx.size)


def write_pairs_csv(stream: TextIO, X: np.ndarray, Y: np.ndarray, meta: Optional[dict] = None) -> None:
    """One pair per row: x_1..x_d, y_1..y_d, then constant metadata columns."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    meta = meta or {}
    w = csv.writer(stream, lineterminator="\n")
    d = X.shape[1]
    w.writerow([f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(Y.shape[1])] + list(meta))
    tail = [str(v) for v in meta.values()]
    for xr, yr in zip(X, Y):
        w.writerow([repr(float(v)) for v in xr] + [repr(float(v)) for v in yr] + tail)
