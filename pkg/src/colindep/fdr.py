"""Outlier scan over pairwise column correlations with FDR control.

The spread of column correlations says nothing about column dependence
(row correlation alone can produce any amount of it), but individual
outliers among them can.  Each pairwise correlation gets a p-value
under a null calibrated to the effective sample size, and the
Benjamini-Hochberg step-up rule flags the discoveries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc
from scipy.stats import norm as _norm

from .correlation import column_cov
from .errors import InvalidInput
from .matrix import DataMatrix

_NULL_MODELS = ("correlation", "gaussian")


def corr_null_pvalue(r, m_tilde: float, shift: float = 0.0):
    """Upper-tail p-value for a null correlation of m_tilde bivariate pairs.

    The null density of a correlation coefficient built from nu =
    ``m_tilde`` uncorrelated normal pairs is proportional to
    (1 - r^2)^{(nu-4)/2} on [-1, 1]; fractional nu is accepted as-is
    through the regularized incomplete beta function.  The p-value is
    P(R >= r - shift), so a negative ``shift`` recenters the null to the
    left (as demeaning does to observed correlations).  Scalar or array
    ``r``.
    """
    if m_tilde <= 3:
        raise InvalidInput("m_tilde must exceed 3")
    rr = np.asarray(r, dtype=float)
    if np.any(rr < -1.0) or np.any(rr > 1.0):
        raise InvalidInput("correlations must lie in [-1, 1]")
    x = rr - shift
    a = (m_tilde - 2.0) / 2.0
    inside = np.clip(x, -1.0, 1.0)
    upper_half = 0.5 * betainc(a, 0.5, 1.0 - inside * inside)
    p = np.where(inside >= 0, upper_half, 1.0 - upper_half)
    p = np.where(x >= 1.0, 0.0, np.where(x <= -1.0, 1.0, p))
    if np.isscalar(r) or rr.ndim == 0:
        return float(p)
    return p


def bh_fdr(pvalues, q: float) -> np.ndarray:
    """Benjamini-Hochberg step-up rule; returns the rejected indices.

    Sorts the p-values, finds the largest k with p_(k) <= k*q/N and
    rejects the k smallest.  Tied p-values at the cutoff are always
    rejected together.  Returns a sorted array of indices into the
    input, empty when nothing is rejected.
    """
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1:
        raise InvalidInput("pvalues must be one-dimensional")
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise InvalidInput("p-values must lie in [0, 1]")
    if not 0.0 < q < 1.0:
        raise InvalidInput("q must lie in (0, 1)")
    n = p.size
    order = np.argsort(p, kind="stable")
    thresholds = q * np.arange(1, n + 1) / n
    passing = np.nonzero(p[order] <= thresholds)[0]
    if passing.size == 0:
        return np.array([], dtype=np.int64)
    k = int(passing[-1]) + 1
    return np.sort(order[:k])


@dataclass(frozen=True)
class OutlierReport:
    """All pairwise column correlations with p-values and BH discoveries.

    ``pair_j``/``pair_jp`` list the column pairs (j < j'), ``r`` their
    correlations and ``p_values`` the one-sided null p-values.
    ``discoveries`` indexes the pairs flagged at FDR level ``q`` and
    ``threshold_r`` is the smallest correlation among them (None when
    there are no discoveries).
    """

    pair_j: np.ndarray = field(repr=False)
    pair_jp: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    p_values: np.ndarray = field(repr=False)
    q: float
    discoveries: np.ndarray = field(repr=False)
    threshold_r: float | None
    null_model: str
    m_tilde: float

    @property
    def n_pairs(self) -> int:
        return int(self.r.size)

    def to_dict(self, include_pairs: bool = True) -> dict:
        sig = np.zeros(self.n_pairs, dtype=bool)
        sig[self.discoveries] = True
        out = {
            "q": self.q,
            "null_model": self.null_model,
            "m_tilde": self.m_tilde,
            "n_pairs": self.n_pairs,
            "n_discoveries": int(self.discoveries.size),
            "threshold_r": self.threshold_r,
        }
        if include_pairs:
            out["pairs"] = [
                {
                    "j": int(self.pair_j[k]),
                    "jp": int(self.pair_jp[k]),
                    "r": float(self.r[k]),
                    "p": float(self.p_values[k]),
                    "significant": bool(sig[k]),
                }
                for k in range(self.n_pairs)
            ]
        return out


def scan_column_pairs(
    x: DataMatrix,
    m_tilde: float,
    q: float,
    null_model: str = "correlation",
    gauss_mu: float | None = None,
    gauss_sd: float | None = None,
    two_sided: bool = False,
) -> OutlierReport:
    """FDR scan of all n(n-1)/2 column correlations of a standardized matrix.

    ``null_model="correlation"`` uses the correlation-coefficient null
    with nu = m_tilde pairs, recentered by the -1/(n-1) shift that
    demeaning forces on the observed correlations.  ``"gaussian"`` uses
    N(gauss_mu, gauss_sd^2), the cruder alternative (both parameters
    required).  One-sided upper p-values by default; ``two_sided``
    doubles the smaller tail.  Swapping null models changes only the
    p-values, never the correlations.
    """
    if x.state != "double_std":
        raise InvalidInput("scan_column_pairs expects a doubly standardized matrix")
    if null_model not in _NULL_MODELS:
        raise InvalidInput(f"null_model must be one of {_NULL_MODELS}")
    n = x.n
    cov = column_cov(x)
    ju, jpu = np.triu_indices(n, 1)
    r = np.clip(cov[ju, jpu], -1.0, 1.0)
    if null_model == "correlation":
        p = corr_null_pvalue(r, m_tilde, shift=-1.0 / (n - 1))
    else:
        if gauss_mu is None or gauss_sd is None:
            raise InvalidInput("gaussian null requires gauss_mu and gauss_sd")
        if gauss_sd <= 0:
            raise InvalidInput("gauss_sd must be positive")
        p = _norm.sf((r - gauss_mu) / gauss_sd)
    if two_sided:
        p = 2.0 * np.minimum(p, 1.0 - p)
    discoveries = bh_fdr(p, q)
    threshold_r = float(r[discoveries].min()) if discoveries.size else None
    return OutlierReport(
        pair_j=ju,
        pair_jp=jpu,
        r=r,
        p_values=np.asarray(p, dtype=float),
        q=q,
        discoveries=discoveries,
        threshold_r=threshold_r,
        null_model=null_model,
        m_tilde=m_tilde,
    )
