"""Order-sensitive permutation tests of column-wise i.i.d. structure.

If the columns of a matrix are independent and identically distributed,
every ordering of the components of the first eigenvector of the column
covariance matrix is equally likely.  The tests here score an observed
ordering (runs of similar components, or a linear trend) and compare it
against scores of randomly permuted orderings.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigengapWarning, InvalidInput
from .matrix import DataMatrix, SpectralSummary, spectral

_STATISTICS = ("block", "trend", "trace")


@dataclass(frozen=True)
class BlockBasis:
    """Catalog of contiguous 0/1 block vectors and their summed outer product.

    ``vectors`` stacks one row per block vector (1s forming a contiguous
    run of length between ``min_len`` and ``max_len``); ``B`` is the
    n-by-n matrix sum_h beta_h beta_h', so v'Bv = sum_h (beta_h'v)^2.
    """

    n: int
    min_len: int
    max_len: int
    vectors: np.ndarray
    B: np.ndarray

    @property
    def size(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class TestResult:
    """A statistic, its simulated null sample and the resulting p-value."""

    statistic: float
    null_samples: np.ndarray
    p_value: float
    method: str
    seed: int
    exceed_count: int

    @property
    def L(self) -> int:
        return int(self.null_samples.size)

    def to_dict(self, include_null: bool = False) -> dict:
        out = {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "L": self.L,
            "exceed_count": self.exceed_count,
            "seed": self.seed,
        }
        if include_null:
            out["null_samples"] = [float(v) for v in self.null_samples]
        return out


def block_basis(n: int, min_len: int = 2, max_len: int = 10) -> BlockBasis:
    """Enumerate all contiguous block vectors of length min_len..max_len.

    ``max_len`` is silently truncated to n so the catalog stays well
    defined for short vectors; min_len below 2 or above n is an error.
    """
    if min_len < 2:
        raise InvalidInput("min_len must be at least 2")
    if min_len > max_len:
        raise InvalidInput("min_len must not exceed max_len")
    if min_len > n:
        raise InvalidInput(f"min_len={min_len} exceeds n={n}")
    max_len = min(max_len, n)
    rows = []
    for length in range(min_len, max_len + 1):
        for start in range(n - length + 1):
            v = np.zeros(n)
            v[start : start + length] = 1.0
            rows.append(v)
    vectors = np.array(rows)
    return BlockBasis(n=n, min_len=min_len, max_len=max_len, vectors=vectors, B=vectors.T @ vectors)


def block_statistic(v: np.ndarray, basis: BlockBasis) -> float:
    """Quadratic form v'Bv; large values mean runs of similar components."""
    v = np.asarray(v, dtype=float)
    if v.shape != (basis.n,):
        raise InvalidInput(f"expected a vector of length {basis.n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("v must be finite")
    return float(v @ basis.B @ v)


def trend_statistic(v: np.ndarray) -> float:
    """Squared least-squares slope of v against its index 1..n."""
    v = np.asarray(v, dtype=float)
    n = v.size
    if n < 3:
        raise InvalidInput("trend statistic needs at least 3 components")
    idx = np.arange(1, n + 1, dtype=float)
    idx -= idx.mean()
    slope = idx @ (v - v.mean()) / (idx @ idx)
    return float(slope * slope)


def first_eigvec(s: SpectralSummary) -> np.ndarray:
    """First right singular vector, sign-fixed so its largest entry is positive.

    Warns with DegenerateEigengapWarning when the top two eigenvalues
    agree to within 1e-8 relative, in which case the vector is unstable.
    """
    if s.rank < 1:
        raise InvalidInput("spectrum has rank 0")
    e = s.eigenvalues
    if s.rank >= 2 and (e[0] - e[1]) <= 1e-8 * e[0]:
        warnings.warn(
            f"top eigenvalues nearly equal ({e[0]:.6g} vs {e[1]:.6g}); "
            "first eigenvector is poorly determined",
            DegenerateEigengapWarning,
            stacklevel=2,
        )
    v = s.right_vectors[:, 0].copy()
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    return v


def trace_statistic(delta_hat: np.ndarray, basis: BlockBasis) -> float:
    """tr(delta_hat @ B): total block energy of a column covariance matrix."""
    d = np.asarray(delta_hat, dtype=float)
    if d.shape != (basis.n, basis.n):
        raise InvalidInput(f"expected a {basis.n}x{basis.n} matrix, got {d.shape}")
    # B is symmetric, so the trace reduces to an elementwise sum
    return float(np.sum(d * basis.B))


def _null_rng(seed: int, replicate: int) -> np.random.Generator:
    # substream per replicate: results do not depend on evaluation order
    return np.random.default_rng(np.random.SeedSequence((seed, replicate)))


def perm_pvalue(
    x: DataMatrix,
    statistic: str,
    L: int,
    seed: int,
    min_len: int = 2,
    max_len: int = 10,
    conservative: bool = False,
    exhaustive: bool = False,
) -> TestResult:
    """Permutation p-value for one of the order-sensitive statistics.

    ``statistic`` is ``"block"`` or ``"trend"`` (computed on the first
    eigenvector, whose components are permuted L times) or ``"trace"``
    (tr of the column covariance against the block catalog, recomputed
    under column permutations of the data).  The p-value is the fraction
    of permuted statistics at least as large as the observed one;
    ``conservative=True`` uses (count+1)/(L+1) instead.

    ``exhaustive=True`` replaces sampling with all n! permutations
    (allowed only for n <= 8) and returns the exact tail fraction.
    """
    if statistic not in _STATISTICS:
        raise InvalidInput(f"statistic must be one of {_STATISTICS}")
    if L < 1 and not exhaustive:
        raise InvalidInput("L must be positive")
    n = x.n
    if exhaustive and n > 8:
        raise InvalidInput("exhaustive enumeration is limited to n <= 8")

    if statistic == "trace":
        basis = block_basis(n, min_len, max_len)
        delta_hat = x.values.T @ x.values / x.m

        def observed() -> float:
            return trace_statistic(delta_hat, basis)

        def permuted(perm: np.ndarray) -> float:
            return trace_statistic(delta_hat[np.ix_(perm, perm)], basis)

    else:
        v1 = first_eigvec(spectral(x))
        if statistic == "block":
            basis = block_basis(n, min_len, max_len)

            def observed() -> float:
                return block_statistic(v1, basis)

            def permuted(perm: np.ndarray) -> float:
                return block_statistic(v1[perm], basis)

        else:

            def observed() -> float:
                return trend_statistic(v1)

            def permuted(perm: np.ndarray) -> float:
                return trend_statistic(v1[perm])

    s_obs = observed()
    if exhaustive:
        nulls = np.array(
            [permuted(np.array(p)) for p in itertools.permutations(range(n))]
        )
    else:
        nulls = np.empty(L)
        for rep in range(L):
            rng = _null_rng(seed, rep)
            nulls[rep] = permuted(rng.permutation(n))
    # ties count as exceedances (conservative); the epsilon keeps exact
    # mathematical ties counted when reordered float sums differ in the
    # last ulp, e.g. permutations of a constant eigenvector
    tie_eps = 1e-12 * max(1.0, abs(s_obs))
    exceed = int(np.sum(nulls >= s_obs - tie_eps))
    if conservative:
        p = (exceed + 1) / (nulls.size + 1)
    else:
        p = exceed / nulls.size
    method = f"perm_{statistic}" + ("_exhaustive" if exhaustive else "")
    return TestResult(
        statistic=s_obs,
        null_samples=nulls,
        p_value=float(p),
        method=method,
        seed=seed,
        exceed_count=exceed,
    )
