import csv
import io
import math
from fractions import Fraction as F

import numpy as np
import pytest

from simplex_kernels.copula import (
    CopulaSpec,
    CorrelationEstimate,
    estimate_canonical_correlation,
    estimate_pd_second_correlation,
    orthonormal_r_batch,
    sample_pair,
    sample_pair_pd,
    sample_pairs,
    write_pairs_csv,
)
from simplex_kernels.dist import RngStream
from simplex_kernels.jacobi import orthonormal_r
from simplex_kernels.numkit import DomainError, dirichlet_moment
from simplex_kernels.pds import DegreeSequence, dirac_pmf, pmf_to_jpds

DRAWS = 100_000


def _within(est: CorrelationEstimate, target, k=3.0):
    return abs(est.z_score(target)) <= k


def test_spec_validation():
    with pytest.raises(DomainError):
        CopulaSpec(dirac_pmf(1))
    with pytest.raises(DomainError):
        CopulaSpec(dirac_pmf(1), alpha=(1, 1), theta=1.0)
    with pytest.raises(DomainError):
        CopulaSpec([F(1, 2), F(1, 3)], alpha=(1, 1))
    with pytest.raises(DomainError):
        CopulaSpec(dirac_pmf(1), theta=-1.0)
    spec = CopulaSpec.dirac(3, alpha=(1, 2))
    assert spec.degenerate and not spec.ranked
    assert np.all(spec.draw_m(RngStream(0), 5) == 3)
    mix = CopulaSpec([F(1, 2), F(1, 2)], alpha=(1, 1))
    assert not mix.degenerate
    with pytest.raises(DomainError):
        sample_pairs(CopulaSpec.dirac(1, theta=1.0), RngStream(0), 3)


def test_single_pair_is_on_the_simplex():
    x, y = sample_pair(CopulaSpec.dirac(2, alpha=(1, 1, 1)), RngStream(1))
    assert x.shape == (3,) and y.shape == (3,)
    assert abs(x.sum() - 1) < 1e-12 and abs(y.sum() - 1) < 1e-12


def test_orthonormal_batch_matches_scalar():
    xs = np.array([0.0, 0.2, 0.9, 1.0])
    got = orthonormal_r_batch(F(1, 2), 2, 3, xs)
    assert np.allclose(got, [orthonormal_r(F(1, 2), 2, 3, F(x)) for x in xs])


def test_independence_copula():
    X, Y = sample_pairs(CopulaSpec.dirac(0, alpha=(1, 1)), RngStream(2), DRAWS)
    for n in (1, 2):
        assert _within(estimate_canonical_correlation(X, Y, (1, 1), n), 0)
    X, Y = sample_pairs(CopulaSpec.dirac(0, alpha=(1, 2, 1)), RngStream(3), DRAWS)
    assert _within(estimate_canonical_correlation(X, Y, (1, 2, 1), 1), 0)


@pytest.mark.parametrize("alpha,m", [((1, 1), 2), ((F(1, 2), 2), 3), ((1, 2, 1), 3)])
def test_dirac_copula_correlations(alpha, m):
    theta = sum(F(a) for a in alpha)
    X, Y = sample_pairs(CopulaSpec.dirac(m, alpha=alpha), RngStream(10 + m), DRAWS)
    target = pmf_to_jpds(theta, dirac_pmf(m), max_degree=2)
    for n in (1, 2):
        assert _within(estimate_canonical_correlation(X, Y, alpha, n), target[n])
    assert estimate_canonical_correlation(X, Y, alpha, 0).estimate == 1.0


def test_mixture_copula_matches_pmf_image():
    pmf = [F(1, 4)] * 4
    X, Y = sample_pairs(CopulaSpec(pmf, alpha=(1, 1)), RngStream(20), DRAWS)
    target = pmf_to_jpds(2, pmf)
    for n in (1, 2, 3):
        assert _within(estimate_canonical_correlation(X, Y, (1, 1), n), target[n])


def test_marginals_are_dirichlet():
    alpha = (F(1, 2), 2, F(3, 2))
    X, Y = sample_pairs(CopulaSpec.dirac(4, alpha=alpha), RngStream(30), DRAWS)
    for k in ((1, 0, 0), (0, 2, 0), (1, 0, 1)):
        target = float(dirichlet_moment(alpha, k))
        for Z in (X, Y):
            v = np.prod(Z ** np.array(k), axis=1)
            assert abs(v.mean() - target) <= 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_pairs_are_exchangeable():
    X, Y = sample_pairs(CopulaSpec([F(1, 3), F(1, 3), F(1, 3)], alpha=(1, 2)), RngStream(31), DRAWS)
    for f, g in ((lambda z: z[:, 0], lambda z: z[:, 0] ** 2), (lambda z: z[:, 1] ** 2, lambda z: z[:, 0] ** 3)):
        diff = f(X) * g(Y) - f(Y) * g(X)
        assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / math.sqrt(diff.size)


def test_posterior_step():
    # m = 1, alpha = (1, 1): E[X_1 Y_1] = (alpha_1 E[X_1] + E[X_1^2]) / (theta + 1) = 5/18
    X, Y = sample_pairs(CopulaSpec.dirac(1, alpha=(1, 1)), RngStream(32), DRAWS)
    v = X[:, 0] * Y[:, 0]
    assert abs(v.mean() - 5 / 18) <= 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_pd_copula_independent_when_m_is_zero():
    pairs = sample_pair_pd(1.0, 0, RngStream(40), DRAWS)
    assert _within(estimate_pd_second_correlation(pairs, 1.0), 0)


def test_pd_copula_second_correlation():
    theta = 1.0
    pairs = sample_pair_pd(theta, 2, RngStream(41), DRAWS)
    assert _within(estimate_pd_second_correlation(pairs, theta), F(2, 12))
    fx, fy = pairs.power_sums(1)
    assert np.allclose(fx, 1) and np.allclose(fy, 1)
    f2 = pairs.power_sums(2)[1]
    assert abs(f2.mean() - 1 / (1 + theta)) <= 3 * f2.std(ddof=1) / math.sqrt(f2.size)
    assert np.all(np.diff(pairs.y, axis=1) <= 0)


def test_pd_copula_with_mixing_pmf():
    theta = 2.0
    pmf = DegreeSequence([F(1, 2), F(0), F(1, 2)])
    pairs = sample_pair_pd(theta, pmf, RngStream(42), DRAWS)
    target = pmf_to_jpds(F(2), pmf)[2]
    assert _within(estimate_pd_second_correlation(pairs, theta), target)
    with pytest.raises(DomainError):
        sample_pair_pd(0.0, 1, RngStream(0), 2)


def _finite_d_second_moments(theta, d):
    a = (F(theta) / d,) * d
    mu = d * dirichlet_moment(a, (2,) + (0,) * (d - 1))
    m2 = d * dirichlet_moment(a, (4,) + (0,) * (d - 1)) + d * (d - 1) * dirichlet_moment(a, (2, 2) + (0,) * (d - 2))
    return float(mu), float(m2 - mu * mu)


def test_pd_sampler_agrees_with_finite_dimensional_sampler():
    """Both samplers give rho_2 = 2 / ((theta+2)(theta+3)) in their own marginal."""
    theta, d, draws = 1, 200, 50_000
    X, Y = sample_pairs(CopulaSpec.dirac(2, alpha=(F(theta, d),) * d), RngStream(43), draws)
    mu, var = _finite_d_second_moments(theta, d)
    v = ((X ** 2).sum(axis=1) - mu) * ((Y ** 2).sum(axis=1) - mu) / var
    finite = CorrelationEstimate(2, float(v.mean()), float(v.std(ddof=1) / math.sqrt(draws)), draws)
    limit = estimate_pd_second_correlation(sample_pair_pd(theta, 2, RngStream(44), draws), theta)
    assert _within(finite, F(1, 6)) and _within(limit, F(1, 6))
    gap = finite.estimate - limit.estimate
    assert abs(gap) <= 3 * math.hypot(finite.se, limit.se)


def test_correlation_estimate_helpers():
    est = CorrelationEstimate(1, 0.52, 0.01, 100)
    assert est.z_score(0.5) == pytest.approx(2.0)
    assert CorrelationEstimate(0, 1.0, 0.0, 5).z_score(1) == 0.0
    assert est.as_dict()["draws"] == 100


def test_pairs_csv_round_trip():
    X, Y = sample_pairs(CopulaSpec.dirac(2, alpha=(1, 1)), RngStream(50), 5)
    buf = io.StringIO()
    write_pairs_csv(buf, X, Y, {"seed": 50, "m": 2})
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["x1", "x2", "y1", "y2", "seed", "m"]
    assert len(rows) == 6
    back = np.array([[float(v) for v in r[:4]] for r in rows[1:]])
    assert np.array_equal(back, np.hstack([X, Y]))
    assert all(r[4:] == ["50", "2"] for r in rows[1:])
