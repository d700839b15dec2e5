"""Dense data-matrix container, demeaning, standardization and spectra.

Conventions used throughout the package:

* rows are features, columns are samples;
* "population" variance (divide by the axis length), so a standardized
  row of length n has sum of squares exactly n;
* a matrix is *demeaned* when every row sum and column sum is zero, and
  *doubly standardized* when additionally every row and column has
  variance one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as _norm
from scipy.stats import rankdata
from scipy.stats import t as _student_t

from .errors import DegenerateAxis, InvalidInput, NonConvergence, NumericalError

#: tolerance used when verifying the standardization state of a matrix
TOL_STD = 1e-8
#: tolerance for orthonormality of singular vectors
TOL_ORTH = 1e-8
#: relative eigenvalue cutoff below which spectral components are dropped
RANK_TOL = 1e-12
#: default iteration cap for double standardization
MAX_ITER = 50

_STATES = ("raw", "demeaned", "row_std", "col_std", "double_std")


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An m-by-n real matrix together with its standardization state.

    The state flag records which normalization has been applied:
    ``raw``, ``demeaned`` (all row/column sums zero), ``row_std`` /
    ``col_std`` (one axis has mean 0 and variance 1), or ``double_std``
    (every row and column has mean 0 and variance 1).
    """

    values: np.ndarray
    state: str = "raw"

    def __post_init__(self):
        a = np.array(self.values, dtype=float)
        if a.ndim != 2:
            raise InvalidInput(f"expected a 2-d array, got ndim={a.ndim}")
        if a.shape[0] < 2 or a.shape[1] < 2:
            raise InvalidInput(f"matrix must be at least 2x2, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix entries must be finite")
        if self.state not in _STATES:
            raise InvalidInput(f"unknown state {self.state!r}")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def validate(self, tol: float = TOL_STD) -> None:
        """Check that the values actually satisfy the declared state.

        Raises InvalidInput when a mean/variance deviates by more than
        ``tol`` from what the state flag promises.
        """
        a = self.values
        checks: list[tuple[str, float]] = []
        if self.state in ("demeaned", "double_std"):
            checks.append(("row means", float(np.abs(a.mean(axis=1)).max())))
            checks.append(("column means", float(np.abs(a.mean(axis=0)).max())))
        if self.state == "row_std":
            checks.append(("row means", float(np.abs(a.mean(axis=1)).max())))
            checks.append(("row variances", float(np.abs(a.var(axis=1) - 1.0).max())))
        if self.state == "col_std":
            checks.append(("column means", float(np.abs(a.mean(axis=0)).max())))
            checks.append(("column variances", float(np.abs(a.var(axis=0) - 1.0).max())))
        if self.state == "double_std":
            checks.append(("row variances", float(np.abs(a.var(axis=1) - 1.0).max())))
            checks.append(("column variances", float(np.abs(a.var(axis=0) - 1.0).max())))
        for name, dev in checks:
            if dev > tol:
                raise InvalidInput(
                    f"state {self.state!r} violated: {name} deviate by {dev:.3g} > {tol:.3g}"
                )


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues of X'X (squared singular values) and singular vectors.

    ``eigenvalues`` is sorted in decreasing order and contains only the
    K components above the rank cutoff; ``left_vectors`` is m-by-K and
    ``right_vectors`` n-by-K, both orthonormal.
    """

    eigenvalues: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def singular_values(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)


@dataclass(frozen=True)
class StandardizeInfo:
    """Outcome of double standardization: iterations used and final deviation."""

    iterations: int
    max_deviation: float
    order: str = "col_first"


def standardization_deviation(a: np.ndarray) -> float:
    """Largest deviation of any row/column mean from 0 or variance from 1."""
    return float(
        max(
            np.abs(a.mean(axis=1)).max(),
            np.abs(a.mean(axis=0)).max(),
            np.abs(a.var(axis=1) - 1.0).max(),
            np.abs(a.var(axis=0) - 1.0).max(),
        )
    )


def demean(x: DataMatrix) -> DataMatrix:
    """Remove row, column and grand means: x_ij - xbar_i. - xbar_.j + xbar_.. .

    The result has every row sum and column sum equal to zero; the
    operation is idempotent.
    """
    a = x.values
    out = a - a.mean(axis=1, keepdims=True) - a.mean(axis=0, keepdims=True) + a.mean()
    state = x.state if x.state in ("demeaned", "double_std") else "demeaned"
    return DataMatrix(out, state)


def _standardize_axis(a: np.ndarray, axis: int) -> np.ndarray:
    # axis=0 standardizes columns, axis=1 rows; population variance
    mean = a.mean(axis=axis, keepdims=True)
    sd = a.std(axis=axis, keepdims=True)
    scale = np.abs(mean) + 1.0
    bad = np.nonzero(sd.ravel() <= 1e-12 * scale.ravel())[0]
    if bad.size:
        raise DegenerateAxis("column" if axis == 0 else "row", int(bad[0]))
    return (a - mean) / sd


def standardize_columns(x: DataMatrix) -> DataMatrix:
    """Give every column mean 0 and (population) variance 1."""
    return DataMatrix(_standardize_axis(x.values, axis=0), "col_std")


def standardize_rows(x: DataMatrix) -> DataMatrix:
    """Give every row mean 0 and (population) variance 1."""
    return DataMatrix(_standardize_axis(x.values, axis=1), "row_std")


def double_standardize(
    x: DataMatrix,
    max_iter: int = MAX_ITER,
    tol: float = TOL_STD,
    order: str = "col_first",
) -> tuple[DataMatrix, StandardizeInfo]:
    """Alternate column and row standardization until both axes settle.

    Iterates until every row/column mean is within ``tol`` of 0 and every
    row/column variance within ``tol`` of 1.  A matrix that already
    satisfies those conditions is returned unchanged with 0 iterations.

    Parameters
    ----------
    x : DataMatrix
    max_iter : int
        Iteration cap; exceeding it raises NonConvergence.  Small
        matrices exist for which no doubly standardized form exists, so
        non-convergence is an error rather than a silent best effort.
    tol : float
        Convergence tolerance on means and variances.
    order : str
        ``"col_first"`` (default) standardizes columns then rows within
        each sweep; ``"row_first"`` reverses the two steps.
    """
    if order not in ("col_first", "row_first"):
        raise InvalidInput(f"order must be 'col_first' or 'row_first', got {order!r}")
    if max_iter < 1:
        raise InvalidInput("max_iter must be at least 1")
    a = x.values
    dev = standardization_deviation(a)
    if dev < tol:
        return DataMatrix(a, "double_std"), StandardizeInfo(0, dev, order)
    first, second = (0, 1) if order == "col_first" else (1, 0)
    for it in range(1, max_iter + 1):
        a = _standardize_axis(a, axis=first)
        a = _standardize_axis(a, axis=second)
        dev = standardization_deviation(a)
        if dev < tol:
            return DataMatrix(a, "double_std"), StandardizeInfo(it, dev, order)
    raise NonConvergence(
        f"double standardization did not reach tol={tol:.3g} in {max_iter} sweeps "
        f"(deviation {dev:.3g})"
    )


def spectral(x: DataMatrix, rank_tol: float = RANK_TOL) -> SpectralSummary:
    """SVD-derived summary of X: eigenvalues of X'X and singular vectors.

    Components whose eigenvalue (squared singular value) falls at or
    below ``rank_tol`` times the largest are treated as numerical zeros
    and dropped, so a demeaned matrix reports rank at most
    min(m-1, n-1).
    """
    try:
        u, d, vt = np.linalg.svd(x.values, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    e = d * d
    if e.size == 0 or e[0] == 0.0:
        k = 0
    else:
        k = int(np.sum(e > rank_tol * e[0]))
    return SpectralSummary(
        eigenvalues=e[:k].copy(),
        left_vectors=u[:, :k].copy(),
        right_vectors=vt[:k].T.copy(),
    )


def t_to_z(t, df: int):
    """Map a t statistic to the z scale: Phi^{-1}(F_df(t)).

    Strictly increasing and antisymmetric in ``t``.  Accepts a scalar or
    an array; evaluation goes through the upper tail so precision is
    kept far out in either tail.
    """
    if df < 1:
        raise InvalidInput("df must be at least 1")
    tt = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(tt)):
        raise InvalidInput("t must be finite")
    sf = _student_t.sf(np.abs(tt), df)
    z = np.where(tt >= 0, _norm.isf(sf), -_norm.isf(sf))
    if np.isscalar(t) or tt.ndim == 0:
        return float(z)
    return z


def normal_scores_columns(x: DataMatrix) -> DataMatrix:
    """Optional hook: replace each column by its normal scores.

    Ranks within each column are mapped through Phi^{-1}(rank/(m+1)),
    making all column marginals identical.
    """
    a = x.values
    m = a.shape[0]
    ranks = np.apply_along_axis(rankdata, 0, a)
    return DataMatrix(_norm.ppf(ranks / (m + 1.0)), "raw")
