"""Double standardization, step by step.

Starts from a matrix with uneven row/column scales, demeans it, then
alternates column and row standardization until every row and column
has mean 0 and variance 1, printing the deviation after each sweep.
"""

import numpy as np

from colindep import (
    DataMatrix,
    demean,
    double_standardize,
    standardization_deviation,
    standardize_columns,
    standardize_rows,
)

rng = np.random.default_rng(7)

# heterogeneous scales: some loud rows, some quiet columns
m, n = 200, 24
base = rng.standard_normal((m, n))
row_scale = np.exp(rng.normal(0.0, 0.8, size=(m, 1)))
col_shift = rng.normal(2.0, 3.0, size=(1, n))
x = DataMatrix(base * row_scale + col_shift)

print(f"raw matrix: {m} x {n}")
print(f"  column means range  [{x.values.mean(0).min():7.3f}, {x.values.mean(0).max():7.3f}]")
print(f"  row sd range        [{x.values.std(1).min():7.3f}, {x.values.std(1).max():7.3f}]")

d = demean(x)
print("\nafter demeaning (row and column sums all zero):")
print(f"  max |row sum|    {np.abs(d.values.sum(1)).max():.2e}")
print(f"  max |column sum| {np.abs(d.values.sum(0)).max():.2e}")
print(f"  deviation from full standardization: {standardization_deviation(d.values):.4f}")

print("\nalternating sweeps (column then row):")
work = d
for sweep in range(1, 7):
    work = standardize_rows(standardize_columns(work))
    dev = standardization_deviation(work.values)
    print(f"  sweep {sweep}: max deviation of any mean/variance = {dev:.3e}")

z, info = double_standardize(x, tol=1e-8)
print(f"\ndouble_standardize: converged in {info.iterations} sweeps "
      f"(final deviation {info.max_deviation:.2e})")
print(f"  every row sum of squares is n = {n}: "
      f"max error {np.abs((z.values**2).sum(1) - n).max():.2e}")
print(f"  every column sum of squares is m = {m}: "
      f"max error {np.abs((z.values**2).sum(0) - m).max():.2e}")
