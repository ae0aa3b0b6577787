"""Integral representations of Jacobi and Hahn kernels.

For d = 2 the product R_n(x) R_n(y) of shifted Jacobi polynomials is the
expectation of R_n(Z) under an explicit mixing law (sampled by
:func:`sample_koornwinder`).  For d > 2 a chain of such draws gives a random
Z_d in [0, 1] whose moments reproduce the multivariate xi kernels:

    xi_m(x, y) = (|alpha|)_m / (alpha_d)_m * E[Z_d^m].

Stage j of the chain works on the first j coordinates renormalised to sum to
one; with W = Z_{j-1}, u = x_j / (x_j + (1 - x_j) sqrt W) and likewise v,

    Z_j = Phi_j (x_j + (1 - x_j) sqrt W)(y_j + (1 - y_j) sqrt W),

where Phi_j is drawn from the d = 2 mixing law at (u, v) with parameters
(alpha_j, alpha_{j-1}).  Parameters are sorted decreasing first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import RngStream, RunningStats, params, sample_dirichlet
from .hahn import HahnContext, h_kernel
from .jacobi import coeff_a, q_kernel, r_coefficients, univariate_r, xi, zeta
from .numkit import DomainError, falling, ratio, rising


@dataclass(frozen=True)
class GasperVerdict:
    alpha: object
    beta: object
    ok: bool
    reason: str
    explicit: bool  # an explicit sampler exists (alpha >= 1/2, beta >= alpha)

    def __bool__(self):
        return self.ok


def check_gasper_region(alpha, beta) -> GasperVerdict:
    """Region where the d = 2 product formula has a positive mixing measure."""
    if alpha <= 0 or beta <= 0:
        raise DomainError("alpha and beta must be positive")
    if beta < alpha:
        return GasperVerdict(alpha, beta, False, f"beta={beta} < alpha={alpha}", False)
    if alpha >= 0.5:
        return GasperVerdict(alpha, beta, True, "beta >= alpha and alpha >= 1/2", True)
    if alpha + beta >= 2:
        return GasperVerdict(alpha, beta, True, "beta >= alpha and alpha + beta >= 2", False)
    return GasperVerdict(alpha, beta, False,
                         f"alpha={alpha} < 1/2 and alpha + beta={alpha + beta} < 2", False)


def _phi(x, y, u, c):
    return x * y + (1 - x) * (1 - y) * u * u + 2 * u * c * np.sqrt(np.clip(x * (1 - x) * y * (1 - y), 0, None))


def sample_koornwinder(alpha, beta, x, y, rng: RngStream, size: int | None = None):
    """Draw Z with E[R_n(Z)] = R_n(x) R_n(y) for the Beta(alpha, beta) Jacobi family.

    x and y are the coordinates carrying parameter alpha; they may be scalars
    or arrays broadcastable to ``size``.
    """
    verdict = check_gasper_region(alpha, beta)
    if not verdict.explicit:
        raise DomainError(f"no explicit mixing law for (alpha, beta)=({alpha}, {beta}): {verdict.reason}")
    alpha = float(alpha)
    beta = float(beta)
    shape = np.broadcast(np.asarray(x), np.asarray(y)).shape if size is None else size
    if beta == alpha:
        u = np.ones(shape)
    else:
        u = np.sqrt(rng.gen.beta(alpha, beta - alpha, size=shape))
    if alpha == 0.5:
        c = rng.gen.choice([-1.0, 1.0], size=shape)
    else:
        c = 2.0 * rng.gen.beta(alpha - 0.5, alpha - 0.5, size=shape) - 1.0
    return np.clip(_phi(np.asarray(x, float), np.asarray(y, float), u, c), 0.0, 1.0)


def density_k(alpha, beta, x, y, z, truncation: int):
    """Partial sum of sum_n zeta_n R_n(x) R_n(y) R_n(z); returns (value, last term)."""
    total = 0
    last = 0
    for n in range(truncation + 1):
        last = zeta(alpha, beta, n) * univariate_r(alpha, beta, n, x) \
            * univariate_r(alpha, beta, n, y) * univariate_r(alpha, beta, n, z)
        total += last
    return total, abs(last)


# --- the Z chain ----------------------------------------------------------

@dataclass(frozen=True)
class ZChainPlan:
    """Decreasing order of the parameters and the per-stage parameter pairs."""

    order: tuple
    alpha: tuple
    stages: tuple = field(default=())


def zchain_plan(alpha) -> ZChainPlan:
    """Sort parameters decreasingly and check every stage has an explicit mixing law."""
    a = params(alpha)
    if a.d < 2:
        raise DomainError("the chain needs d >= 2")
    order = tuple(sorted(range(a.d), key=lambda i: -a[i]))
    srt = tuple(a[i] for i in order)
    stages = []
    for j in range(1, a.d):
        verdict = check_gasper_region(srt[j], srt[j - 1])
        if not verdict.explicit:
            raise DomainError(
                f"stage {j + 1}: parameters ({srt[j]}, {srt[j - 1]}) have no explicit mixing law "
                f"({verdict.reason}); each sorted parameter after the first must be >= 1/2"
            )
        stages.append((srt[j], srt[j - 1]))
    return ZChainPlan(order, srt, tuple(stages))


def _run_chain(plan: ZChainPlan, X: np.ndarray, Y: np.ndarray, rng: RngStream) -> np.ndarray:
    """Vectorised chain; X, Y have shape (draws, d) in the plan's sorted order."""
    draws = X.shape[0]
    W = np.ones(draws)
    sx = X[:, 0].copy()
    sy = Y[:, 0].copy()
    for j, (aj, ajm1) in enumerate(plan.stages, start=1):
        sx = sx + X[:, j]
        sy = sy + Y[:, j]
        # coordinate j among the first j+1, renormalised; 0 if that block is empty
        xs = np.divide(X[:, j], sx, out=np.zeros(draws), where=sx > 0)
        ys = np.divide(Y[:, j], sy, out=np.zeros(draws), where=sy > 0)
        root = np.sqrt(W)
        dx = xs + (1 - xs) * root
        dy = ys + (1 - ys) * root
        u = np.divide(xs, dx, out=np.zeros(draws), where=dx > 0)
        v = np.divide(ys, dy, out=np.zeros(draws), where=dy > 0)
        phi = sample_koornwinder(aj, ajm1, u, v, rng, size=draws)
        W = phi * dx * dy
    return W


def sample_z_chain(alpha, x: Sequence, y: Sequence, rng: RngStream, size: int = 1) -> np.ndarray:
    """Draws of Z_d for fixed points x, y (given in the caller's coordinate order)."""
    plan = zchain_plan(alpha)
    xs = np.asarray([float(x[i]) for i in plan.order])
    ys = np.asarray([float(y[i]) for i in plan.order])
    X = np.broadcast_to(xs, (size, xs.size))
    Y = np.broadcast_to(ys, (size, ys.size))
    return _run_chain(plan, X, Y, rng)


def _univariate_q_at_one_poly(a_last, rest, n: int) -> np.ndarray:
    """Power coefficients of z -> zeta_n R_n(z) R_n(1) for Beta(a_last, rest)."""
    theta = a_last + rest
    coeffs = np.zeros(n + 1)
    for m in range(n + 1):
        coeffs[m] = float(coeff_a(theta, n, m) * ratio(rising(theta, m), rising(a_last, m)))
    return coeffs


@dataclass
class MCReport:
    label: str
    estimate: float
    se: float
    exact: object
    draws: int

    @property
    def z(self) -> float:
        diff = self.estimate - float(self.exact)
        if self.se == 0:
            return 0.0 if abs(diff) < 1e-12 else math.copysign(math.inf, diff)
        return diff / self.se

    def passed(self, bound: float = 3.0) -> bool:
        return abs(self.z) <= bound

    def as_dict(self) -> dict:
        return {"label": self.label, "estimate": self.estimate, "se": self.se,
                "exact": str(self.exact), "z": self.z, "draws": self.draws}


def _batched(draws: int, batch: int, fn) -> RunningStats:
    stats = RunningStats()
    done = 0
    while done < draws:
        k = min(batch, draws - done)
        stats.push_batch(fn(k))
        done += k
    return stats


def verify_kernel_representation(alpha, x, y, n: int, draws: int, rng: RngStream,
                                 batch: int = 200_000) -> MCReport:
    """Compare E[Q_n^{(alpha_d, |alpha|-alpha_d)}(Z_d, 1)] with the exact kernel Q_n(x, y)."""
    plan = zchain_plan(alpha)
    a_last = plan.alpha[-1]
    rest = params(alpha).total - a_last
    poly = _univariate_q_at_one_poly(a_last, rest, n)
    stats = _batched(draws, batch,
                     lambda k: np.polyval(poly[::-1], sample_z_chain(alpha, x, y, rng, k)))
    return MCReport(f"Q_{n}", stats.mean, stats.se, q_kernel(alpha, n, x, y), stats.n)


def verify_xi_moment(alpha, x, y, m: int, draws: int, rng: RngStream,
                     batch: int = 200_000) -> MCReport:
    """Compare E[Z_d^m] with (alpha_d)_m / (|alpha|)_m xi_m(x, y)."""
    plan = zchain_plan(alpha)
    a = params(alpha)
    target = ratio(rising(plan.alpha[-1], m), rising(a.total, m)) * xi(a, m, x, y)
    stats = _batched(draws, batch, lambda k: sample_z_chain(alpha, x, y, rng, k) ** m)
    return MCReport(f"E[Z^{m}]", stats.mean, stats.se, target, stats.n)


def verify_zchain_point(alpha, x, y, max_degree: int, max_moment: int, draws: int,
                        rng: RngStream, batch: int = 200_000) -> list:
    """Kernel checks for n = 1..max_degree and moment checks for m = 1..max_moment.

    Every check at this (x, y) reuses the same Z_d draws, so the checks are
    correlated with each other but each has its own standard error.
    """
    plan = zchain_plan(alpha)
    a = params(alpha)
    a_last = plan.alpha[-1]
    polys = [_univariate_q_at_one_poly(a_last, a.total - a_last, n)[::-1] for n in range(1, max_degree + 1)]
    kern = [RunningStats() for _ in polys]
    mom = [RunningStats() for _ in range(max_moment)]
    done = 0
    while done < draws:
        k = min(batch, draws - done)
        z = sample_z_chain(alpha, x, y, rng, k)
        for st, p in zip(kern, polys):
            st.push_batch(np.polyval(p, z))
        for m, st in enumerate(mom, start=1):
            st.push_batch(z ** m)
        done += k
    out = [MCReport(f"Q_{n}", st.mean, st.se, q_kernel(alpha, n, x, y), st.n)
           for n, st in enumerate(kern, start=1)]
    for m, st in enumerate(mom, start=1):
        target = ratio(rising(a_last, m), rising(a.total, m)) * xi(a, m, x, y)
        out.append(MCReport(f"E[Z^{m}]", st.mean, st.se, target, st.n))
    return out


# --- Hahn mixing ----------------------------------------------------------

def beta_expected_r(a_last, rest, n: int, N: int, k: int):
    """E[R_n(X)] for X ~ Beta(a_last + k, rest + N - k), exact."""
    coeffs = r_coefficients(a_last, rest, n)
    out = 0
    for j, c in enumerate(coeffs):
        out += c * ratio(rising(a_last + k, j), rising(a_last + rest + N, j))
    return out


def _binom_pmf_matrix(N: int, z: np.ndarray) -> np.ndarray:
    k = np.arange(N + 1)
    comb = np.array([math.comb(N, i) for i in k], dtype=float)
    return comb * np.power.outer(z, k) * np.power.outer(1 - z, N - k)


def _mixing_draws(alpha, r, s, rng: RngStream, size: int) -> np.ndarray:
    plan = zchain_plan(alpha)
    a = params(alpha)
    X = sample_dirichlet(a.shifted(r), rng, size)[:, list(plan.order)]
    Y = sample_dirichlet(a.shifted(s), rng, size)[:, list(plan.order)]
    return _run_chain(plan, X, Y, rng)


def hahn_mixing_weight(alpha, r: Sequence[int], s: Sequence[int], draws: int, rng: RngStream,
                       batch: int = 100_000):
    """Monte Carlo estimate of u(k), k = 0..N, with standard errors."""
    N = sum(r)
    if sum(s) != N:
        raise DomainError("r and s must have the same total")
    if N == 0:
        return np.ones(1), np.zeros(1)
    stats = [RunningStats() for _ in range(N + 1)]
    done = 0
    while done < draws:
        k = min(batch, draws - done)
        pm = _binom_pmf_matrix(N, _mixing_draws(alpha, r, s, rng, k))
        for i in range(N + 1):
            stats[i].push_batch(pm[:, i])
        done += k
    return np.array([st.mean for st in stats]), np.array([st.se for st in stats])


def hahn_mixing_kernel(alpha, r: Sequence[int], s: Sequence[int], n: int, draws: int,
                       rng: RngStream, batch: int = 100_000) -> MCReport:
    """Hahn kernel rebuilt from the mixing weights, against the exact H_n(r, s)."""
    plan = zchain_plan(alpha)
    a = params(alpha)
    N = sum(r)
    a_last = plan.alpha[-1]
    rest = a.total - a_last
    htilde = np.array([float(beta_expected_r(a_last, rest, n, N, k)) for k in range(N + 1)])
    scale = float(zeta(a_last, rest, n) * ratio(rising(a.total + N, n), falling(N, n)) ** 2)
    stats = _batched(draws, batch,
                     lambda k: scale * (_binom_pmf_matrix(N, _mixing_draws(alpha, r, s, rng, k)) @ htilde))
    exact = h_kernel(HahnContext(a.alpha, N), n, r, s)
    return MCReport(f"H_{n}", stats.mean, stats.se, exact, stats.n)
