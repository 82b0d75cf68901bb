"""Statistical validation tools: paired Wilcoxon signed-rank test and
total-order Sobol sensitivity indices.

The Wilcoxon implementation drops zero differences, uses average ranks on
ties, and computes the exact null distribution of the positive rank sum by
subset-sum counting (equivalent to enumerating all 2^n sign assignments)
for n <= 25, switching to the tie-corrected normal approximation with
continuity correction above that.

Sobol total-order indices use Saltelli A/B/AB_i sampling on a scrambled
Sobol sequence and the Jansen estimator
``ST_i = mean((f(A) - f(AB_i))^2) / (2 Var f)``; confidence half-widths
come from a bootstrap over sample rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata
from scipy.stats import qmc

EXACT_LIMIT = 25
ALPHA = 0.05


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float
    r_plus: float
    r_minus: float
    n_effective: int
    p_value: float
    method: str  # "exact" | "normal_approx"
    alternative: str
    reject_h0: bool

    def as_dict(self) -> dict:
        return {
            "w_statistic": self.w_statistic,
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "n_effective": self.n_effective,
            "p_value": self.p_value,
            "method": self.method,
            "alternative": self.alternative,
            "reject_h0": self.reject_h0,
        }


def _exact_pmf(ranks: np.ndarray) -> tuple[np.ndarray, int]:
    """PMF of 2*W+ (doubled so tied average ranks stay integral) under the
    null that every sign pattern of the ranked differences is equally
    likely. Returns (pmf over 0..S, S) with S = sum of doubled ranks."""
    doubled = np.rint(ranks * 2).astype(int)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts += shifted
    return counts / counts.sum(), total


def wilcoxon_signed_rank(a, b, alternative: str = "two_sided") -> WilcoxonResult:
    """Paired Wilcoxon signed-rank test of a vs b.

    Zero differences are dropped; if all differences are zero the test is
    undefined and a :class:`StatsError` is raised rather than reporting
    p = 1.
    """
    if alternative not in ("two_sided", "greater", "less"):
        raise StatsError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise StatsError(f"paired series must be equal-length 1-D, got {a.shape} vs {b.shape}")
    if a.size < 1:
        raise StatsError("need at least one pair")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise StatsError("all differences are zero; the signed-rank test is undefined")

    ranks = rankdata(np.abs(d))
    r_plus = float(ranks[d > 0].sum())
    r_minus = float(ranks[d < 0].sum())
    w = min(r_plus, r_minus)

    if n <= EXACT_LIMIT:
        pmf, total = _exact_pmf(ranks)
        support = np.arange(total + 1)
        rp2 = int(round(2 * r_plus))
        if alternative == "greater":
            p = float(pmf[support >= rp2].sum())
        elif alternative == "less":
            p = float(pmf[support <= rp2].sum())
        else:
            w2 = int(round(2 * w))
            extreme = np.minimum(support, total - support) <= w2
            p = float(pmf[extreme].sum())
        method = "exact"
    else:
        mu = n * (n + 1) / 4.0
        tie_sizes = np.unique(ranks, return_counts=True)[1]
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_sizes**3 - tie_sizes).sum()) / 48.0
        sd = math.sqrt(var)
        p_greater = float(norm.sf((r_plus - mu - 0.5) / sd))
        p_less = float(norm.cdf((r_plus - mu + 0.5) / sd))
        if alternative == "greater":
            p = p_greater
        elif alternative == "less":
            p = p_less
        else:
            p = min(1.0, 2.0 * min(p_greater, p_less))
        method = "normal_approx"

    p = min(1.0, max(p, np.finfo(float).tiny))
    return WilcoxonResult(
        w_statistic=w,
        r_plus=r_plus,
        r_minus=r_minus,
        n_effective=n,
        p_value=p,
        method=method,
        alternative=alternative,
        reject_h0=bool(p < ALPHA),
    )


@dataclass(frozen=True)
class Factor:
    """One input dimension of a sensitivity sweep.

    Continuous factors map u in [0,1) to [lower, upper); discrete factors
    quantize u uniformly onto ``values``.
    """

    name: str
    lower: float = 0.0
    upper: float = 1.0
    values: tuple | None = None

    def transform(self, u: np.ndarray) -> np.ndarray:
        if self.values is not None:
            idx = np.minimum((u * len(self.values)).astype(int), len(self.values) - 1)
            return np.asarray(self.values, dtype=float)[idx]
        return self.lower + u * (self.upper - self.lower)


@dataclass
class SobolReport:
    factor_names: tuple[str, ...]
    st: np.ndarray
    ci_half_width: np.ndarray
    n_base: int
    estimator: str
    output_variance: float

    def as_dict(self) -> dict:
        return {
            "factor_names": list(self.factor_names),
            "st": [float(x) for x in self.st],
            "ci_half_width": [float(x) for x in self.ci_half_width],
            "n_base": self.n_base,
            "estimator": self.estimator,
            "output_variance": self.output_variance,
        }


def sobol_total_order(
    model,
    factors: list[Factor],
    n_base: int,
    seed: int,
    bootstrap: int = 100,
    vectorized: bool = False,
) -> SobolReport:
    """Estimate total-order indices of ``model`` over the factor space.

    ``model`` maps one transformed sample vector to a scalar (or, when
    ``vectorized``, an (N, k) matrix to an (N,) vector). ``n_base`` must
    be a power of two >= 64; the total number of model evaluations is
    (k + 2) * n_base.
    """
    k = len(factors)
    if k == 0:
        raise StatsError("need at least one factor")
    if n_base < 64 or (n_base & (n_base - 1)) != 0:
        raise StatsError(f"n_base must be a power of two >= 64, got {n_base}")

    sampler = qmc.Sobol(d=2 * k, scramble=True, seed=seed)
    u = sampler.random(n_base)
    a_u, b_u = u[:, :k], u[:, k:]

    def transform(mat_u):
        cols = [factors[j].transform(mat_u[:, j]) for j in range(k)]
        return np.column_stack(cols)

    a_x, b_x = transform(a_u), transform(b_u)

    def run(mat):
        if vectorized:
            return np.asarray(model(mat), dtype=float)
        return np.array([float(model(row)) for row in mat])

    f_a = run(a_x)
    f_b = run(b_x)
    f_ab = np.empty((k, n_base))
    for j in range(k):
        ab = a_x.copy()
        ab[:, j] = b_x[:, j]
        f_ab[j] = run(ab)

    var = float(np.var(np.concatenate([f_a, f_b])))
    if var <= 0.0 or not math.isfinite(var):
        raise StatsError("model output variance is zero; total-order indices undefined")

    st = ((f_a[None, :] - f_ab) ** 2).mean(axis=1) / (2.0 * var)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB007]))
    if bootstrap > 0:
        idx = rng.integers(0, n_base, size=(bootstrap, n_base))
        fa_r = f_a[idx]                                  # (B, N)
        fb_r = f_b[idx]
        var_r = np.var(np.concatenate([fa_r, fb_r], axis=1), axis=1)
        var_r = np.where(var_r > 0, var_r, np.nan)
        st_b = np.empty((bootstrap, k))
        for j in range(k):
            st_b[:, j] = ((fa_r - f_ab[j][idx]) ** 2).mean(axis=1) / (2.0 * var_r)
        half = 1.96 * np.nanstd(st_b, axis=0)
    else:
        half = np.zeros(k)

    return SobolReport(
        factor_names=tuple(f.name for f in factors),
        st=st,
        ci_half_width=half,
        n_base=n_base,
        estimator="jansen",
        output_variance=var,
    )


def ishigami(x: np.ndarray, a: float = 7.0, b: float = 0.1) -> np.ndarray:
    """Ishigami benchmark, vectorized over rows of x in [-pi, pi]^3."""
    x = np.atleast_2d(x)
    return np.sin(x[:, 0]) + a * np.sin(x[:, 1]) ** 2 + b * x[:, 2] ** 4 * np.sin(x[:, 0])


def ishigami_analytic_st(a: float = 7.0, b: float = 0.1) -> tuple[float, float, float]:
    """Closed-form total-order indices of the Ishigami function."""
    pi = math.pi
    v1 = 0.5 * (1 + b * pi**4 / 5) ** 2
    v2 = a**2 / 8
    v13 = 8 * b**2 * pi**8 / 225
    total = v1 + v2 + v13
    return ((v1 + v13) / total, v2 / total, v13 / total)
