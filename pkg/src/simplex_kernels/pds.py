"""Positive-definite sequences for Dirichlet and Dirichlet-multinomial kernels.

A sequence rho with rho_0 = 1 is a Jacobi PDS when sum_n rho_n Q_n(x, y) >= 0
on the simplex, and a Hahn PDS at sample size N when sum_n rho_n H_n(r, s) >= 0
for all compositions r, s of N.  Hahn scans are exhaustive and exact, so their
verdicts are certificates; Jacobi scans are grid checks of a truncated series
and are labelled as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy import integrate

from .dist import params
from .hahn import HahnContext, h_kernel, u_norm, univariate_hahn
from .jacobi import coeff_a, coeff_c, r_coefficients, univariate_r, xi, zeta
from .numkit import DomainError, compositions, falling, is_exact, ratio, rising

CERTIFIED = "certified-positive"
GRID_POSITIVE = "positive-on-grid"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass
class DegreeSequence:
    """Values indexed by total degree, with a flavor tag and a provenance note."""

    values: list
    provenance: str = ""
    tail_bound: float = 0.0

    @property
    def flavor(self) -> str:
        return "exact" if all(is_exact(v) for v in self.values) else "float"

    @property
    def max_degree(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n] if n < len(self.values) else 0

    def floats(self) -> list:
        return [float(v) for v in self.values]

    def to_json(self) -> dict:
        vals = [str(v) if is_exact(v) else float(v) for v in self.values]
        return {"flavor": self.flavor, "provenance": self.provenance, "values": vals,
                "tail_bound": self.tail_bound}


@dataclass
class PositivityReport:
    verdict: str
    certifying: bool
    min_value: float = math.inf
    witness: Optional[tuple] = None
    witness_value: Optional[float] = None
    truncation: Optional[int] = None
    tail_bound: Optional[float] = None
    checked: int = 0
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict == VIOLATED and self.witness is None:
            raise ValueError("a violated verdict needs a witness")

    @property
    def positive(self) -> bool:
        return self.verdict in (CERTIFIED, GRID_POSITIVE)

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, (tuple, list)):
                return [conv(u) for u in v]
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        return {"verdict": self.verdict, "certifying": self.certifying,
                "min_value": conv(self.min_value), "witness": conv(self.witness),
                "witness_value": conv(self.witness_value), "truncation": self.truncation,
                "tail_bound": self.tail_bound, "checked": self.checked, "notes": self.notes}


def _seq(rho) -> DegreeSequence:
    return rho if isinstance(rho, DegreeSequence) else DegreeSequence(list(rho))


# --- sequence zoo ---------------------------------------------------------

def wright_fisher(theta, t: float, max_degree: int) -> DegreeSequence:
    """Eigenvalue sequence exp(-n(n+theta-1)t/2) of the neutral Wright-Fisher diffusion."""
    vals = [math.exp(-0.5 * n * (n + float(theta) - 1) * t) for n in range(max_degree + 1)]
    return DegreeSequence(vals, f"wright-fisher(theta={theta}, t={t})")


def poisson_kernel(z, max_degree: int) -> DegreeSequence:
    return DegreeSequence([z ** n for n in range(max_degree + 1)], f"poisson-kernel(z={z})")


def dirac_pmf(l: int) -> DegreeSequence:
    return DegreeSequence([Fraction(int(m == l)) for m in range(l + 1)], f"dirac({l})")


def fraction_sequence(total_alpha, m: int, max_degree: int) -> DegreeSequence:
    """m_[n] / (|alpha| + m)_(n)."""
    return DegreeSequence([coeff_c(total_alpha, m, n) for n in range(max_degree + 1)],
                          f"falling-ratio(m={m})")


def scaled_fraction_sequence(total_alpha, m: int, N: int) -> DegreeSequence:
    """m_[n] / (|alpha| + m)_(n) * (|alpha| + N)_(n) / N_[n], n <= N."""
    vals = [coeff_c(total_alpha, m, n) * ratio(rising(total_alpha + N, n), falling(N, n))
            for n in range(N + 1)]
    return DegreeSequence(vals, f"scaled-falling-ratio(m={m}, N={N})")


# --- evaluation -----------------------------------------------------------

def p_rho(alpha, rho, x, y, truncation: Optional[int] = None):
    """Partial sum sum_{n <= truncation} rho_n Q_n(x, y); returns (value, |last term|)."""
    a = params(alpha)
    rho = _seq(rho)
    T = rho.max_degree if truncation is None else truncation
    if T > rho.max_degree:
        raise DomainError(f"truncation {T} exceeds the sequence length {rho.max_degree}")
    xis = [xi(a, m, x, y) for m in range(T + 1)]
    total = 0
    last = 0
    for n in range(T + 1):
        qn = 0
        for m in range(n + 1):
            qn += coeff_a(a.total, n, m) * xis[m]
        last = rho[n] * qn
        total += last
    return total, abs(last)


def _beta_r_table(a, b, points, T: int) -> np.ndarray:
    """float table R_n(points) for n <= T, computed exactly at rational points."""
    tab = np.empty((T + 1, len(points)))
    for n in range(T + 1):
        for i, p in enumerate(points):
            tab[n, i] = float(univariate_r(a, b, n, p))
    return tab


def p_rho_beta(a, b, rho, x, truncation: Optional[int] = None, y=1):
    """d = 2 series sum_n rho_n zeta_n R_n(x) R_n(y) (x carries parameter a)."""
    rho = _seq(rho)
    T = rho.max_degree if truncation is None else truncation
    total = 0
    for n in range(T + 1):
        total += rho[n] * zeta(a, b, n) * univariate_r(a, b, n, x) * univariate_r(a, b, n, y)
    return total


def simplex_grid(d: int, resolution: int) -> list:
    """Barycentric lattice with spacing 1/resolution (contains vertices and edge midpoints
    for even resolution)."""
    pts = [tuple(Fraction(c, resolution) for c in comp) for comp in compositions(d, resolution)]
    if resolution % 2:
        for i in range(d):
            for j in range(i + 1, d):
                mid = [Fraction(0)] * d
                mid[i] = mid[j] = Fraction(1, 2)
                pts.append(tuple(mid))
    return pts


def _xi_float_batch(alpha, m: int, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    a = params(alpha)
    P = X * Y
    out = np.zeros(P.shape[0])
    for l in compositions(a.d, m):
        w = ratio(math.factorial(m) * rising(a.total, m), 1)
        for ai, li in zip(a, l):
            w = ratio(w, math.factorial(li) * rising(ai, li))
        term = np.full(P.shape[0], float(w))
        for i, li in enumerate(l):
            if li:
                term *= P[:, i] ** li
        out += term
    return out


def scan_jpds(alpha, rho, resolution: int = 20, truncation: Optional[int] = None,
              tol: float = 1e-12) -> PositivityReport:
    """Grid check of sum_n rho_n Q_n(x, y) >= 0 (not a certificate)."""
    a = params(alpha)
    rho = _seq(rho)
    T = rho.max_degree if truncation is None else min(truncation, rho.max_degree)
    pts = simplex_grid(a.d, resolution)
    if a.d == 2:
        xs = [p[0] for p in pts]
        tab = _beta_r_table(a[0], a[1], xs, T)
        w = np.array([float(rho[n]) * float(zeta(a[0], a[1], n)) for n in range(T + 1)])
        vals = tab.T @ (w[:, None] * tab)
        last = np.abs(w[T] * np.outer(tab[T], tab[T])).max()
        idx = np.unravel_index(np.argmin(vals), vals.shape)
        vmin = float(vals[idx])
        witness = (pts[idx[0]], pts[idx[1]])
        checked = vals.size
    else:
        P = np.array([[float(v) for v in p] for p in pts])
        I, J = np.meshgrid(np.arange(len(pts)), np.arange(len(pts)), indexing="ij")
        X, Y = P[I.ravel()], P[J.ravel()]
        # sum_n rho_n Q_n = sum_m (sum_n a_nm rho_n) xi_m
        weights = [sum(coeff_a(a.total, n, m) * Fraction(rho[n]) for n in range(m, T + 1))
                   for m in range(T + 1)]
        vals = np.zeros(X.shape[0])
        for m in range(T + 1):
            vals += float(weights[m]) * _xi_float_batch(a, m, X, Y)
        k = int(np.argmin(vals))
        vmin = float(vals[k])
        witness = (pts[I.ravel()[k]], pts[J.ravel()[k]])
        checked = vals.size
        last = float("nan")
    note = f"grid resolution 1/{resolution}, truncation {T}, last-term magnitude {float(last):.3g}"
    if vmin < -tol:
        return PositivityReport(VIOLATED, False, vmin, witness, vmin, T, None, checked, [note])
    return PositivityReport(GRID_POSITIVE, False, vmin, None, None, T, None, checked, [note])


def _exact(v):
    return v if is_exact(v) else Fraction(v)


def hpds_values(alpha, N: int, rho):
    """Exact table of sum_{n<=N} rho_n H_n(r, s) over all composition pairs."""
    a = params(alpha)
    rho = _seq(rho)
    comps = compositions(a.d, N)
    coef = [_exact(rho[n]) for n in range(N + 1)]
    if a.d == 2:
        al, be = a[0], a[1]
        # H_n(r, s) = u_n h_n(r_1) h_n(s_1) for d = 2
        h = [[univariate_hahn(al, be, n, c[0], N) for c in comps] for n in range(N + 1)]
        w = [coef[n] * u_norm(al, be, N, n) for n in range(N + 1)]
        table = {}
        for i, r in enumerate(comps):
            for j, s in enumerate(comps):
                if j < i:
                    table[(r, s)] = table[(s, r)]
                    continue
                table[(r, s)] = sum(w[n] * h[n][i] * h[n][j] for n in range(N + 1))
        return table
    ctx = HahnContext(a.alpha, N)
    table = {}
    for r in comps:
        for s in comps:
            if (s, r) in table:
                table[(r, s)] = table[(s, r)]
                continue
            table[(r, s)] = sum(coef[n] * h_kernel(ctx, n, r, s) for n in range(N + 1))
    return table


def scan_hpds(alpha, N: int, rho) -> PositivityReport:
    """Exhaustive exact check of sum_{n<=N} rho_n H_n(r, s) >= 0; a certificate."""
    table = hpds_values(alpha, N, rho)
    (r, s), vmin = min(table.items(), key=lambda kv: kv[1])
    if vmin < 0:
        return PositivityReport(VIOLATED, True, vmin, (r, s), vmin, N, 0.0, len(table))
    return PositivityReport(CERTIFIED, True, vmin, None, None, N, 0.0, len(table))


# --- transforms -----------------------------------------------------------

def _check_pmf(d_pmf: DegreeSequence):
    vals = d_pmf.values
    if any(v < 0 for v in vals):
        raise DomainError("pmf has a negative entry")
    s = sum(vals)
    if d_pmf.flavor == "exact":
        if s != 1:
            raise DomainError(f"pmf sums to {s}, not 1")
    elif abs(s - 1) > 1e-12 + d_pmf.tail_bound:
        raise DomainError(f"pmf sums to {s}, not 1")


def pmf_to_jpds(theta, d_pmf, max_degree: Optional[int] = None) -> DegreeSequence:
    """rho_n = sum_{m >= n} m_[n] / (theta + m)_(n) d_m."""
    d_pmf = _seq(d_pmf)
    _check_pmf(d_pmf)
    M = d_pmf.max_degree
    T = M if max_degree is None else max_degree
    vals = []
    for n in range(T + 1):
        s = 0
        for m in range(n, M + 1):
            s += coeff_c(theta, m, n) * d_pmf[m]
        vals.append(s)
    # every weight lies in [0, 1], so missing pmf mass bounds the error in each rho_n
    return DegreeSequence(vals, f"pmf-image({d_pmf.provenance})", d_pmf.tail_bound)


@dataclass
class InversionResult:
    pmf: DegreeSequence
    derivative_route: Optional[list]
    is_pmf: bool
    negative_at: List[int]
    converged: bool
    condition: float
    report: PositivityReport


def jpds_to_pmf(theta, rho, max_degree: Optional[int] = None, derivative_check: bool = True,
                cauchy_tol: float = 1e-12) -> InversionResult:
    """d_m = sum_{n >= m} a_nm rho_n, summed exactly, plus a derivative-route cross-check.

    The derivative route expands p_rho(x) = sum_n rho_n zeta_n R_n(x) for the
    Beta(theta/2, theta/2) pair in powers of x and uses
    d_m = (alpha)_m / ((theta)_m m!) p_rho^{(m)}(0).
    """
    rho = _seq(rho)
    exact_in = rho.flavor == "exact"
    T = rho.max_degree
    M = T if max_degree is None else min(max_degree, T)
    ex = [_exact(v) for v in rho.values]
    vals, worst, conv = [], 0.0, True
    for m in range(M + 1):
        terms = [coeff_a(theta, n, m) * ex[n] for n in range(m, T + 1)]
        s = sum(terms)
        big = max(abs(float(t)) for t in terms)
        worst = max(worst, big / max(abs(float(s)), 1e-300))
        # an exact finite sequence is summed exactly; floats get a Cauchy test on the tail
        if not exact_in and len(terms) > 1 and abs(float(terms[-1])) > cauchy_tol * max(1.0, abs(float(s))):
            conv = False
        vals.append(s if exact_in else float(s))
    deriv = None
    if derivative_check:
        a = b = ratio(theta, 2)
        # row n holds zeta_n rho_n times the power coefficients of R_n
        rows = []
        for n in range(T + 1):
            w = zeta(a, b, n) * ex[n]
            coeffs = r_coefficients(a, b, n)
            rows.append([w * c for c in coeffs])
        deriv = []
        for m in range(M + 1):
            # coefficient of x^m in p_rho, times m!, is p_rho^{(m)}(0)
            cm = sum(rows[n][m] for n in range(m, T + 1))
            w = ratio(rising(a, m), rising(theta, m))
            deriv.append(w * cm if exact_in else float(w * cm))
    neg = [m for m, v in enumerate(vals) if v < 0]
    seq = DegreeSequence(vals, f"inverse-image({rho.provenance})")
    if neg:
        m = neg[0]
        rep = PositivityReport(VIOLATED, exact_in and conv, float(vals[m]), (m,), float(vals[m]), T)
    else:
        rep = PositivityReport(CERTIFIED if exact_in and conv else INCONCLUSIVE,
                               exact_in and conv, min(float(v) for v in vals), None, None, T)
    rep.notes.append(f"max |term| / |sum| = {worst:.3g}; partial sums converged: {conv}")
    total = float(sum(vals))
    is_pmf = not neg and abs(total - 1) < 1e-8
    return InversionResult(seq, deriv, is_pmf, neg, conv, worst, rep)


def coalescent_pmf(theta, t: float, truncation: int) -> DegreeSequence:
    """Lineage-count pmf: the inverse image of the Wright-Fisher sequence."""
    res = jpds_to_pmf(theta, wright_fisher(theta, t, truncation), derivative_check=False)
    return DegreeSequence(res.pmf.values, f"coalescent(theta={theta}, t={t})")


def jpds_to_hpds(alpha, N: int, rho) -> DegreeSequence:
    """rho_n N_[n] / (|alpha| + N)_(n), which vanishes beyond n = N."""
    a = params(alpha)
    rho = _seq(rho)
    vals = [rho[n] * ratio(falling(N, n), rising(a.total + N, n)) for n in range(N + 1)]
    return DegreeSequence(vals, f"hahn-image(N={N}, {rho.provenance})")


def multiply(rho1, rho2) -> DegreeSequence:
    r1, r2 = _seq(rho1), _seq(rho2)
    k = min(len(r1), len(r2))
    return DegreeSequence([r1[n] * r2[n] for n in range(k)], "product")


def bernstein_approx(alpha, rho, N: int, truncation: Optional[int] = None) -> DegreeSequence:
    """Coefficients of the Bernstein smoothing of p_rho (d = 2), exact in the grid values.

    rho^N_n = N_[n]/(theta+N)_(n) sum_{i,j=0..N} DM(i) DM(j) p_rho(i/N, j/N) H_n(i, j),
    with p_rho evaluated by its truncated series and converted to an exact rational.
    """
    a = params(alpha)
    if a.d != 2:
        raise DomainError("bernstein_approx is implemented for d = 2")
    rho = _seq(rho)
    al, be = a[0], a[1]
    theta = a.total
    T = rho.max_degree if truncation is None else truncation
    grid = [Fraction(i, N) for i in range(N + 1)]
    tab = _beta_r_table(al, be, grid, T)
    w = np.array([float(rho[n]) * float(zeta(al, be, n)) for n in range(T + 1)])
    P = tab.T @ (w[:, None] * tab)  # p_rho(i/N, j/N), i the alpha-type fraction
    P = [[Fraction(float(v)) for v in row] for row in P]
    dm = [ratio(math.comb(N, i) * rising(al, i) * rising(be, N - i), rising(theta, N))
          for i in range(N + 1)]
    vals = []
    for n in range(N + 1):
        h = [dm[i] * univariate_hahn(al, be, n, i, N) for i in range(N + 1)]
        Ph = [sum(P[i][j] * h[j] for j in range(N + 1)) for i in range(N + 1)]
        quad = sum(h[i] * Ph[i] for i in range(N + 1))
        vals.append(ratio(falling(N, n), rising(theta + N, n)) * u_norm(al, be, N, n) * quad)
    return DegreeSequence(vals, f"bernstein(N={N}, {rho.provenance})")


@dataclass
class DualReport:
    rho: DegreeSequence
    hpds: PositivityReport
    jpds: PositivityReport

    @property
    def both_positive(self) -> bool:
        return self.hpds.positive and self.jpds.positive


def truncated_pmf_pds(theta, d_pmf, N: int, alpha=None, resolution: int = 20) -> DualReport:
    """Image of a pmf supported on {0..N}: certify HPDS at N and grid-check JPDS."""
    d_pmf = _seq(d_pmf)
    if any(v != 0 for v in d_pmf.values[N + 1:]):
        raise DomainError(f"pmf has mass beyond N={N}")
    alpha = alpha if alpha is not None else (ratio(theta, 2), ratio(theta, 2))
    if params(alpha).total != theta:
        raise DomainError("alpha must have total theta")
    rho = pmf_to_jpds(theta, DegreeSequence(d_pmf.values[:N + 1], d_pmf.provenance), N)
    return DualReport(rho, scan_hpds(alpha, N, rho), scan_jpds(alpha, rho, resolution))


def shift_parameters(alpha, beta, mu, rho) -> DegreeSequence:
    """rho_n zeta_n^{alpha+mu, beta-mu} / zeta_n^{alpha, beta}."""
    if mu < 0 or mu >= beta:
        raise DomainError(f"need 0 <= mu < beta, got mu={mu}, beta={beta}")
    rho = _seq(rho)
    vals = [rho[n] * ratio(zeta(alpha + mu, beta - mu, n), zeta(alpha, beta, n))
            for n in range(len(rho))]
    return DegreeSequence(vals, f"shift(mu={mu}, {rho.provenance})")


def scan_beta_series(a, b, rho, resolution: int = 200, truncation: Optional[int] = None,
                     tol: float = 1e-12) -> PositivityReport:
    """Grid check of u(x) = sum_n zeta_n rho_n R_n(x) >= 0 on [0, 1] (d = 2)."""
    rho = _seq(rho)
    T = rho.max_degree if truncation is None else truncation
    xs = [Fraction(i, resolution) for i in range(resolution + 1)]
    tab = _beta_r_table(a, b, xs, T)
    w = np.array([float(rho[n]) * float(zeta(a, b, n)) for n in range(T + 1)])
    vals = w @ tab
    k = int(np.argmin(vals))
    if vals[k] < -tol:
        return PositivityReport(VIOLATED, False, float(vals[k]), (xs[k],), float(vals[k]), T)
    return PositivityReport(GRID_POSITIVE, False, float(vals[k]), None, None, T, checked=len(xs))


# --- counterexample -------------------------------------------------------

@dataclass
class CounterexampleReport:
    violation_order: Optional[int]
    location: Optional[float]
    fd_value: Optional[float]
    series_value: Optional[float]
    verdict: str
    per_order: list


def counterexample_check(lam, theta, truncation: int = 4, h: float = 1e-3,
                         quad_tol: float = 1e-10, grid: int = 19) -> CounterexampleReport:
    """Look for a negative derivative of q(s) = E[exp(-lam W s)], W ~ Beta(theta/2, theta/2).

    A probability generating function has all derivatives nonnegative on
    (0, 1).  Derivatives of order k <= ``truncation`` are computed by central
    finite differences of quadrature values and cross-checked against the
    moment series (-lam)^k E[W^k exp(-lam W s)].
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    a = b = float(theta) / 2
    lam = float(lam)
    beta_norm = math.gamma(a) * math.gamma(b) / math.gamma(a + b)

    def q(s):
        f = lambda w: math.exp(-lam * w * s) * w ** (a - 1) * (1 - w) ** (b - 1) / beta_norm
        return integrate.quad(f, 0, 1, epsabs=quad_tol, epsrel=quad_tol, limit=200)[0]

    def series(k, s, terms=200):
        # E[W^j] = (a)_j / (a+b)_j, accumulated in floats term by term
        total, mom, fact = 0.0, 1.0, 1.0
        for j in range(k):
            mom *= (a + j) / (a + b + j)
        for j in range(terms):
            total += mom * (-lam * s) ** j / fact
            mom *= (a + k + j) / (a + b + k + j)
            fact *= j + 1
        return (-lam) ** k * total

    per_order = []
    points = [(i + 1) / (grid + 1) for i in range(grid)]
    for k in range(1, truncation + 1):
        best = None
        for s in points:
            fd = sum((-1) ** i * math.comb(k, i) * q(s + (k / 2 - i) * h) for i in range(k + 1)) / h ** k
            sv = series(k, s)
            if best is None or sv < best[2]:
                best = (s, fd, sv)
        per_order.append({"order": k, "s": best[0], "finite_difference": best[1], "series": best[2]})
        if best[2] < 0 and best[1] < 0:
            return CounterexampleReport(k, best[0], best[1], best[2], "not a pgf", per_order)
    return CounterexampleReport(None, None, None, None, INCONCLUSIVE, per_order)
