"""Matrix-normal and Wishart simulation, eigenratio and bilinear tests.

The generative model is X ~ N(0, Sigma (x) Delta): rows correlate
through the m-by-m Sigma, columns through the n-by-n Delta, and
cov(X_ij, X_i'j') = Sigma_ii' * Delta_jj'.  Two parameterized families
cover what the tests need: a block Sigma (shared row effects within
equal-sized groups) and a spiked Delta = I + lambda * beta beta'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlation import alpha_corrected, _pair_indices, _pearson_rows
from .errors import CalibrationFailure, InvalidInput
from .matrix import DataMatrix, SpectralSummary, double_standardize

_SIGMA_MODELS = ("identity", "block")
_DELTA_MODELS = ("identity", "spiked")


@dataclass(frozen=True)
class SimulationSpec:
    """Generative description of an m-by-n matrix-normal draw.

    ``sigma_model="block"`` adds a shared N(0, gamma^2) effect per
    (block, column) cell, giving within-block row correlation
    gamma^2/(1+gamma^2); rows are split into ``num_blocks`` equal groups
    with any remainder assigned to the last.  ``delta_model="spiked"``
    right-multiplies by the symmetric square root of I + lambda *
    beta beta'.  With ``standardize=True`` the result is column
    standardized after sampling.
    """

    m: int
    n: int
    sigma_model: str = "identity"
    num_blocks: int = 5
    gamma: float = 0.0
    delta_model: str = "identity"
    spike_lambda: float = 0.0
    spike_beta: np.ndarray | None = None
    seed: int = 0
    standardize: bool = False

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise InvalidInput("m and n must be at least 2")
        if self.sigma_model not in _SIGMA_MODELS:
            raise InvalidInput(f"sigma_model must be one of {_SIGMA_MODELS}")
        if self.delta_model not in _DELTA_MODELS:
            raise InvalidInput(f"delta_model must be one of {_DELTA_MODELS}")
        if self.gamma < 0:
            raise InvalidInput("gamma must be nonnegative")
        if self.sigma_model == "block" and not 1 <= self.num_blocks <= self.m:
            raise InvalidInput("num_blocks must lie in [1, m]")
        if self.delta_model == "spiked":
            if self.spike_beta is None:
                raise InvalidInput("spiked delta_model requires spike_beta")
            beta = np.array(self.spike_beta, dtype=float)
            if beta.shape != (self.n,):
                raise InvalidInput(f"spike_beta must have length n={self.n}")
            if not np.all(np.isfinite(beta)):
                raise InvalidInput("spike_beta must be finite")
            nb = float(beta @ beta)
            if nb > 0 and self.spike_lambda * nb <= -1.0:
                raise InvalidInput(
                    "spiked delta is not positive definite: need lambda > -1/|beta|^2"
                )
            beta.setflags(write=False)
            object.__setattr__(self, "spike_beta", beta)


def block_labels(m: int, num_blocks: int) -> np.ndarray:
    """Block index per row: equal fifths (etc.), remainder in the last block."""
    size = m // num_blocks
    labels = np.repeat(np.arange(num_blocks), size)
    if labels.size < m:
        labels = np.concatenate([labels, np.full(m - labels.size, num_blocks - 1)])
    return labels


def within_block_correlation(gamma: float) -> float:
    """Row correlation inside a block before any standardization."""
    return gamma * gamma / (1.0 + gamma * gamma)


def block_total_correlation(m: int, num_blocks: int, gamma: float) -> float:
    """Root-mean-square correlation over all row pairs of the block model."""
    labels = block_labels(m, num_blocks)
    sizes = np.bincount(labels, minlength=num_blocks)
    within = float(np.sum(sizes * (sizes - 1) // 2))
    total = m * (m - 1) / 2.0
    rho = within_block_correlation(gamma)
    return math.sqrt(within / total * rho * rho)


def _spiked_root(lam: float, beta: np.ndarray) -> np.ndarray:
    # symmetric square root of I + lam * beta beta' in closed form
    n = beta.size
    b2 = float(beta @ beta)
    if b2 == 0.0 or lam == 0.0:
        return np.eye(n)
    coef = (math.sqrt(1.0 + lam * b2) - 1.0) / b2
    return np.eye(n) + coef * np.outer(beta, beta)


def sample_matrix_normal(spec: SimulationSpec, rng: np.random.Generator | None = None) -> DataMatrix:
    """One draw from the matrix-normal model described by ``spec``.

    Deterministic given (spec, spec.seed); pass ``rng`` to draw from an
    externally managed stream instead.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    y = rng.standard_normal((spec.m, spec.n))
    if spec.sigma_model == "block":
        # explicit gamma scaling keeps draws continuous in gamma under
        # common random numbers, which the calibrator relies on
        effects = spec.gamma * rng.standard_normal((spec.num_blocks, spec.n))
        y = y + effects[block_labels(spec.m, spec.num_blocks)]
    if spec.delta_model == "spiked":
        y = y @ _spiked_root(spec.spike_lambda, spec.spike_beta)
    state = "raw"
    if spec.standardize:
        y = y - y.mean(axis=0)
        sd = y.std(axis=0)
        if np.any(sd <= 0):
            raise InvalidInput("degenerate column in simulated matrix")
        y = y / sd
        state = "col_std"
    return DataMatrix(y, state)


def _bartlett_factor(df: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Lower-trapezoid T with T T' ~ Wishart(df, I_n).

    Classic Bartlett construction: the j-th diagonal entry is the square
    root of a chi-square with df - j degrees of freedom (j zero-based)
    and entries below the diagonal are standard normal.  For df <= n-1
    only the ceil(df) columns with positive chi-square degrees survive,
    which reproduces the singular Wishart at integer df and interpolates
    it at fractional df.
    """
    k = min(n, int(math.ceil(df)))
    t = np.zeros((n, k))
    dof = df - np.arange(k)
    t[np.arange(k), np.arange(k)] = np.sqrt(rng.chisquare(dof))
    rows, cols = np.tril_indices(n, -1)
    keep = cols < k
    t[rows[keep], cols[keep]] = rng.standard_normal(int(keep.sum()))
    return t


def sample_wishart(
    df: float,
    delta: np.ndarray,
    seed: int = 0,
    size: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Draws of Wishart(df, delta)/df for real df > n-1.

    Fractional degrees of freedom are supported through chi-square
    marginals with fractional df in the Bartlett factor.  Returns an
    (n, n) matrix, or (size, n, n) when ``size`` is given.
    """
    d = np.asarray(delta, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidInput("delta must be square")
    n = d.shape[0]
    if df <= n - 1:
        raise InvalidInput(f"df must exceed n-1={n - 1}, got {df}")
    try:
        chol = np.linalg.cholesky(d)
    except np.linalg.LinAlgError as exc:
        raise InvalidInput("delta must be positive definite") from exc
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
    reps = 1 if size is None else int(size)
    out = np.empty((reps, n, n))
    for r in range(reps):
        lt = chol @ _bartlett_factor(df, n, rng)
        out[r] = lt @ lt.T / df
    return out[0] if size is None else out


def eigenratio(s: SpectralSummary) -> float:
    """Share of spectral mass in the top eigenvalue, e1 / sum_k e_k."""
    if s.rank < 1:
        raise InvalidInput("spectrum has rank 0")
    e = s.eigenvalues
    return float(e[0] / e.sum())


def _eigenratio_of_psd(mat: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(mat)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise InvalidInput("matrix has no positive eigenvalues")
    return float(vals[-1] / total)


def eigenratio_null(
    model: str,
    reps: int,
    n: int,
    seed: int,
    df: float | None = None,
    spec: SimulationSpec | None = None,
) -> np.ndarray:
    """Simulated null distribution of the eigenratio statistic.

    ``model="wishart"`` draws scaled Wishart(df, I_n) column covariance
    matrices (df may be fractional, and may drop below n-1, where the
    singular Bartlett interpolation is used).  ``model="correlated_rows"``
    draws data matrices from ``spec``, doubly standardizes each and takes
    the eigenratio of its column covariance; this is the null that keeps
    the row-correlation structure.  Each replicate uses an independent
    substream of ``seed``, so results do not depend on evaluation order.
    """
    if reps < 1:
        raise InvalidInput("reps must be positive")
    out = np.empty(reps)
    if model == "wishart":
        if df is None or df <= 0:
            raise InvalidInput("wishart model requires df > 0")
        for rep in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
            t = _bartlett_factor(df, n, rng)
            sv = np.linalg.svd(t, compute_uv=False)
            e = sv * sv
            out[rep] = e[0] / e.sum()
    elif model == "correlated_rows":
        if spec is None:
            raise InvalidInput("correlated_rows model requires a SimulationSpec")
        if spec.n != n:
            raise InvalidInput(f"spec.n={spec.n} does not match n={n}")
        for rep in range(reps):
            rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
            x = sample_matrix_normal(spec, rng)
            z, _ = double_standardize(x)
            delta_hat = z.values.T @ z.values / z.m
            out[rep] = _eigenratio_of_psd(delta_hat)
    else:
        raise InvalidInput("model must be 'wishart' or 'correlated_rows'")
    return out


def _measured_alpha_sq(
    gamma: float,
    m: int,
    n: int,
    num_blocks: int,
    reps: int,
    seed: int,
    pair_count: int,
) -> float:
    """Monte Carlo estimate of alpha^2 for the column-standardized block model."""
    total_pairs = m * (m - 1) // 2
    count = min(pair_count, total_pairs)
    est = 0.0
    for rep in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
        spec = SimulationSpec(
            m=m, n=n, sigma_model="block", num_blocks=num_blocks, gamma=gamma,
            standardize=True,
        )
        x = sample_matrix_normal(spec, rng)
        i, j = _pair_indices(m, count, rng)
        corrs = _pearson_rows(x.values, i, j)
        corrected, _ = alpha_corrected(float(corrs.var()), n)
        est += corrected
    return est / reps


def calibrate_gamma(
    target_alpha: float,
    m: int,
    n: int,
    num_blocks: int,
    reps: int,
    seed: int,
    tol: float = 0.005,
    gamma_max: float = 5.0,
    pair_count: int = 20_000,
) -> float:
    """Find the block-effect size gamma whose simulated alpha hits a target.

    The measurement pipeline mirrors how alpha is estimated on data:
    sample the block model, column standardize, estimate row
    correlations on random pairs and apply the noise-corrected
    estimator.  The same random numbers are reused at every trial gamma
    (the block effects enter as an explicit gamma scaling), making the
    measured alpha a continuous increasing function of gamma that plain
    bisection can invert.  Requires n >= 6 for the corrected estimator.
    """
    if not 0.0 <= target_alpha < 1.0:
        raise InvalidInput("target_alpha must lie in [0, 1)")
    if target_alpha == 0.0:
        return 0.0
    target_sq = target_alpha * target_alpha

    def measure(g: float) -> float:
        return _measured_alpha_sq(g, m, n, num_blocks, reps, seed, pair_count)

    lo, hi = 0.0, gamma_max
    f_hi = measure(hi)
    if f_hi < target_sq:
        raise CalibrationFailure(
            f"alpha({gamma_max}) = {math.sqrt(f_hi):.4f} is below target {target_alpha}"
        )
    f_mid = None
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = measure(mid)
        if abs(math.sqrt(f_mid) - target_alpha) <= 0.5 * tol or hi - lo < 1e-4:
            break
        if f_mid < target_sq:
            lo = mid
        else:
            hi = mid
    else:
        mid = 0.5 * (lo + hi)
        f_mid = measure(mid)
    if abs(math.sqrt(f_mid) - target_alpha) > tol:
        raise CalibrationFailure(
            f"bisection stalled at gamma={mid:.4f} with alpha={math.sqrt(f_mid):.4f}"
        )
    return mid


def two_sample_w(n1: int, n2: int) -> np.ndarray:
    """Unit-norm two-group contrast: constant -1/n1 then +1/n2, scaled.

    The scaling sqrt(n1 n2 / (n1 + n2)) makes |w| = 1 and w'x equal to
    the variance-one multiple of the group mean difference.
    """
    if n1 < 1 or n2 < 1:
        raise InvalidInput("group sizes must be positive")
    c = math.sqrt(n1 * n2 / (n1 + n2))
    return c * np.concatenate([np.full(n1, -1.0 / n1), np.full(n2, 1.0 / n2)])


@dataclass(frozen=True)
class BilinearResult:
    """Bilinear statistic w' (X'X/m) w with its null comparison.

    ``z_scores`` holds the per-row contrasts Z_i = x_i'w whose mean
    square is ``tau_hat_sq``; ``cv`` is the coefficient of variation of
    tau_hat implied by the effective sample size, and ``std_distance``
    measures (tau_hat - |w|) in units of cv * |w|.
    """

    tau_hat: float
    tau_hat_sq: float
    cv: float
    z_scores: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    null_tau: float
    std_distance: float
    m_tilde: float

    def to_dict(self) -> dict:
        return {
            "method": "bilinear",
            "tau_hat": self.tau_hat,
            "tau_hat_sq": self.tau_hat_sq,
            "cv": self.cv,
            "null_tau": self.null_tau,
            "std_distance": self.std_distance,
            "m_tilde": self.m_tilde,
            "w_norm": float(np.linalg.norm(self.w)),
        }


def bilinear_test(x: DataMatrix, w: np.ndarray, m_tilde: float) -> BilinearResult:
    """Evaluate the bilinear statistic for a fixed contrast vector.

    Computes Z_i = x_i'w for every row, tau_hat^2 as the mean of Z_i^2
    (identical to w' (X'X/m) w), and the coefficient of variation
    (2 m_tilde)^{-1/2}.  The null value of tau is |w| when the columns
    are uncorrelated with unit variance, which presumes rows that are
    standardized or unit variance by construction.
    """
    if m_tilde <= 0:
        raise InvalidInput("m_tilde must be positive")
    w = np.asarray(w, dtype=float)
    if w.shape != (x.n,):
        raise InvalidInput(f"w must have length n={x.n}, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInput("w must be finite")
    z = x.values @ w
    tau_hat_sq = float(np.mean(z * z))
    tau_hat = math.sqrt(tau_hat_sq)
    cv = 1.0 / math.sqrt(2.0 * m_tilde)
    null_tau = float(np.linalg.norm(w))
    if null_tau > 0:
        std_distance = (tau_hat - null_tau) / (cv * null_tau)
    else:
        std_distance = 0.0
    return BilinearResult(
        tau_hat=tau_hat,
        tau_hat_sq=tau_hat_sq,
        cv=cv,
        z_scores=z,
        w=w,
        null_tau=null_tau,
        std_distance=std_distance,
        m_tilde=m_tilde,
    )


def trace_stat_moments(B: np.ndarray, m_tilde: float) -> tuple[float, float]:
    """Null mean and variance of tr(delta_hat @ B) when the truth is identity.

    Under column independence the statistic is centered at tr(B) with
    variance 2 tr(B^2) / m_tilde.
    """
    b = np.asarray(B, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidInput("B must be square")
    if not np.allclose(b, b.T, rtol=0.0, atol=1e-8 * (np.abs(b).max() + 1.0)):
        raise InvalidInput("B must be symmetric")
    if m_tilde <= 0:
        raise InvalidInput("m_tilde must be positive")
    mean = float(np.trace(b))
    var = 2.0 * float(np.trace(b @ b)) / m_tilde
    return mean, var
