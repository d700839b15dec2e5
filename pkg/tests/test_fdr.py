import numpy as np
import pytest
from scipy.integrate import quad

from colindep import (
    DataMatrix,
    InvalidInput,
    bh_fdr,
    corr_null_pvalue,
    double_standardize,
    scan_column_pairs,
)


def quadrature_pvalue(r: float, nu: float) -> float:
    """Independent oracle: normalize and integrate the null density directly."""
    dens = lambda u: (1 - u * u) ** ((nu - 4) / 2)
    total, _ = quad(dens, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    upper, _ = quad(dens, r, 1.0, epsabs=1e-13, epsrel=1e-13)
    return upper / total


class TestCorrNullPvalue:
    def test_center_is_half(self):
        assert corr_null_pvalue(0.0, 17.2) == pytest.approx(0.5)
        shift = -1.0 / 43
        assert corr_null_pvalue(shift, 17.2, shift=shift) == pytest.approx(0.5)

    def test_support_endpoints(self):
        assert corr_null_pvalue(1.0, 17.2) == 0.0
        assert corr_null_pvalue(-1.0, 17.2) == 1.0
        shift = -1.0 / 43
        assert corr_null_pvalue(1.0, 17.2, shift=shift) == 0.0
        assert corr_null_pvalue(-1.0, 17.2, shift=shift) == pytest.approx(1.0, abs=1e-9)

    def test_matches_quadrature(self):
        nu = 17.2
        for r in np.linspace(-0.95, 0.95, 21):
            assert abs(corr_null_pvalue(float(r), nu) - quadrature_pvalue(float(r), nu)) < 1e-8

    def test_strictly_decreasing(self):
        grid = np.linspace(-0.999, 0.999, 200)
        p = corr_null_pvalue(grid, 12.5)
        assert np.all(np.diff(p) < 0)

    def test_symmetry_about_shift(self):
        shift = -0.023
        rng = np.random.default_rng(110)
        for r in rng.uniform(-0.9, 0.9, 20):
            left = corr_null_pvalue(float(r), 17.2, shift=shift)
            right = corr_null_pvalue(float(-r + 2 * shift), 17.2, shift=shift)
            assert left + right == pytest.approx(1.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidInput):
            corr_null_pvalue(0.5, 3.0)
        with pytest.raises(InvalidInput):
            corr_null_pvalue(1.5, 10.0)


class TestBhFdr:
    def test_all_ones_rejects_nothing(self):
        assert bh_fdr(np.ones(8), 0.1).size == 0

    def test_hand_worked_case(self):
        rejected = bh_fdr([0.001, 0.015, 0.2, 0.6, 0.9], 0.1)
        assert list(rejected) == [0, 1]  # 0.015 <= 2*0.1/5

    def test_single_small_p(self):
        assert list(bh_fdr([0.04], 0.1)) == [0]
        assert bh_fdr([0.2], 0.1).size == 0

    def test_matches_brute_force(self):
        def brute(p, q):
            p = np.asarray(p)
            order = np.argsort(p, kind="stable")
            best = 0
            for k in range(1, p.size + 1):
                if p[order[k - 1]] <= k * q / p.size:
                    best = k
            return set(order[:best].tolist())

        rng = np.random.default_rng(111)
        for trial in range(300):
            size = int(rng.integers(1, 13))
            p = np.round(rng.uniform(size=size), 2)  # rounding forces ties
            q = float(rng.uniform(0.02, 0.4))
            assert set(bh_fdr(p, q).tolist()) == brute(p, q)

    def test_monotone_in_q(self):
        rng = np.random.default_rng(112)
        p = rng.uniform(size=25)
        previous: set = set()
        for q in (0.01, 0.05, 0.1, 0.2, 0.4):
            current = set(bh_fdr(p, q).tolist())
            assert previous <= current
            previous = current

    def test_ties_rejected_together(self):
        rejected = bh_fdr([0.03, 0.03, 0.9], 0.1)
        assert list(rejected) == [0, 1]

    def test_validation(self):
        with pytest.raises(InvalidInput):
            bh_fdr([0.5, 1.2], 0.1)
        with pytest.raises(InvalidInput):
            bh_fdr([0.5], 1.0)


class TestScanColumnPairs:
    def standardized(self, a):
        z, _ = double_standardize(DataMatrix(a), max_iter=300)
        return z

    def test_planted_pair_discovered(self):
        rng = np.random.default_rng(113)
        a = rng.standard_normal((200, 12))
        a[:, 5] = a[:, 4] + 0.35 * rng.standard_normal(200)  # near-duplicate columns
        z = self.standardized(a)
        out = scan_column_pairs(z, m_tilde=200.0, q=0.1)
        assert out.discoveries.size >= 1
        top = int(np.argmax(out.r))
        assert {out.pair_j[top], out.pair_jp[top]} == {4, 5}
        assert top in out.discoveries
        assert out.threshold_r is not None

    def test_null_data_usually_clean(self):
        rng = np.random.default_rng(114)
        z = self.standardized(rng.standard_normal((300, 10)))
        out = scan_column_pairs(z, m_tilde=300.0, q=0.1)
        assert out.discoveries.size == 0
        assert out.threshold_r is None

    def test_false_discovery_rate_held_on_null(self):
        # independent columns, m_tilde = m: discoveries are false by
        # construction and should average well under control
        rng = np.random.default_rng(119)
        false_counts = []
        for _ in range(60):
            z = self.standardized(rng.standard_normal((120, 8)))
            out = scan_column_pairs(z, m_tilde=120.0, q=0.1)
            false_counts.append(int(out.discoveries.size))
        assert np.mean(false_counts) <= 0.1
        assert np.median(false_counts) == 0

    def test_null_model_changes_p_not_r(self):
        rng = np.random.default_rng(115)
        z = self.standardized(rng.standard_normal((100, 8)))
        a = scan_column_pairs(z, m_tilde=50.0, q=0.1, null_model="correlation")
        b = scan_column_pairs(
            z, m_tilde=50.0, q=0.1, null_model="gaussian",
            gauss_mu=-1 / 7, gauss_sd=0.2,
        )
        assert np.array_equal(a.r, b.r)
        assert not np.allclose(a.p_values, b.p_values)

    def test_pair_enumeration(self):
        rng = np.random.default_rng(116)
        z = self.standardized(rng.standard_normal((60, 7)))
        out = scan_column_pairs(z, m_tilde=30.0, q=0.2)
        assert out.n_pairs == 21
        assert np.all(out.pair_j < out.pair_jp)
        d = out.to_dict()
        assert len(d["pairs"]) == 21
        assert d["n_discoveries"] == int(out.discoveries.size)

    def test_two_sided_flag(self):
        rng = np.random.default_rng(117)
        z = self.standardized(rng.standard_normal((80, 6)))
        one = scan_column_pairs(z, m_tilde=40.0, q=0.1)
        two = scan_column_pairs(z, m_tilde=40.0, q=0.1, two_sided=True)
        assert np.allclose(
            two.p_values, 2 * np.minimum(one.p_values, 1 - one.p_values)
        )

    def test_validation(self):
        rng = np.random.default_rng(118)
        raw = DataMatrix(rng.standard_normal((20, 5)))
        with pytest.raises(InvalidInput):
            scan_column_pairs(raw, m_tilde=10.0, q=0.1)
        z = self.standardized(rng.standard_normal((40, 6)))
        with pytest.raises(InvalidInput):
            scan_column_pairs(z, m_tilde=10.0, q=0.1, null_model="gaussian")
        with pytest.raises(InvalidInput):
            scan_column_pairs(z, m_tilde=10.0, q=0.1, null_model="cauchy")
