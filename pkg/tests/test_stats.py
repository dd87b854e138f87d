import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleoplab.errors import (
    DegenerateVariance, NonPositiveValue, UnbalancedDesign,
)
from teleoplab.stats import (
    CellTable, betainc, f_cdf, log_transform, paired_t, pairwise, rm_anova,
    t_sf_two_sided,
)

# 3 subjects x 2 A-levels x 2 B-levels worked example. Expected values were
# computed independently before implementation: the sums of squares by
# explicit expansion (exact rationals) and F/p cross-checked with
# statsmodels AnovaRM / scipy.stats.f.
WORKED = np.array([
    [[4.0, 6.0], [7.0, 9.0]],
    [[5.0, 8.0], [9.0, 12.0]],
    [[3.0, 5.0], [6.0, 10.0]],
])
WORKED_SS = {
    "S": 14.0, "A": 121.0 / 3.0, "B": 64.0 / 3.0, "AB": 1.0 / 3.0,
    "AS": 2.0 / 3.0, "BS": 2.0 / 3.0, "ABS": 2.0 / 3.0, "total": 78.0,
}
WORKED_F = {"A": 121.0, "B": 64.0, "AxB": 1.0}
WORKED_P = {"A": 0.008163401865824482, "B": 0.015268072165338141,
            "AxB": 0.4226497308103668}


class TestRmAnova:
    def test_worked_example(self):
        table = CellTable(WORKED, ("a0", "a1"), ("b0", "b1"))
        res = rm_anova(table)
        assert res.effects["A"].ss == pytest.approx(WORKED_SS["A"], abs=1e-9)
        assert res.effects["B"].ss == pytest.approx(WORKED_SS["B"], abs=1e-9)
        assert res.effects["AxB"].ss == pytest.approx(WORKED_SS["AB"], abs=1e-9)
        assert res.ss_subject == pytest.approx(WORKED_SS["S"], abs=1e-9)
        assert res.ss_total == pytest.approx(WORKED_SS["total"], abs=1e-9)
        assert res.error_terms["AxS"][0] == pytest.approx(WORKED_SS["AS"], abs=1e-9)
        assert res.error_terms["BxS"][0] == pytest.approx(WORKED_SS["BS"], abs=1e-9)
        assert res.error_terms["AxBxS"][0] == pytest.approx(WORKED_SS["ABS"], abs=1e-9)
        for name in ("A", "B", "AxB"):
            assert res.effects[name].f == pytest.approx(WORKED_F[name], abs=1e-9)
            assert res.effects[name].p == pytest.approx(WORKED_P[name], abs=1e-9)
        assert res.effects["A"].df == 1
        assert res.effects["AxB"].df == 1
        assert res.error_terms["AxS"][1] == 2

    def test_identical_cells_degenerate(self):
        table = CellTable(np.full((3, 2, 2), 5.0), ("a0", "a1"), ("b0", "b1"))
        with pytest.raises(DegenerateVariance):
            rm_anova(table)

    def test_pure_control_effect(self, rng):
        n, a, b = 6, 3, 5
        effect = np.array([0.0, 1.0, 2.0])
        y = effect[None, :, None] + rng.normal(0, 1e-6, size=(n, a, b))
        res = rm_anova(CellTable(y, range(a), range(b)))
        assert res.effects["A"].p < 1e-6
        assert res.effects["B"].p > 0.05

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_ss_decomposition(self, seed):
        r = np.random.default_rng(seed)
        n, a, b = r.integers(2, 6), r.integers(2, 4), r.integers(2, 5)
        y = r.normal(size=(n, a, b))
        res = rm_anova(CellTable(y, range(a), range(b)))
        parts = (res.ss_subject
                 + sum(e.ss for e in res.effects.values())
                 + sum(ss for ss, _ in res.error_terms.values()))
        assert parts == pytest.approx(res.ss_total, rel=1e-9, abs=1e-12)

    def test_level_order_invariance(self, rng):
        y = rng.normal(size=(5, 3, 4))
        res1 = rm_anova(CellTable(y, range(3), range(4)))
        perm = [2, 0, 1]
        res2 = rm_anova(CellTable(y[:, perm, :], range(3), range(4)))
        for name in ("A", "B", "AxB"):
            assert res1.effects[name].f == pytest.approx(
                res2.effects[name].f, rel=1e-9)

    def test_unbalanced_rejected(self):
        bad = np.full((3, 2, 2), 1.0)
        bad[1, 0, 1] = np.nan
        with pytest.raises(UnbalancedDesign):
            CellTable(bad, ("a0", "a1"), ("b0", "b1"))
        with pytest.raises(UnbalancedDesign):
            rm_anova(CellTable(np.zeros((1, 2, 2)), ("a0", "a1"), ("b0", "b1")))


class TestFCdf:
    def test_published_f_table_points(self):
        # F-table 95th percentiles: F(5,10)=3.326, F(2,10)=4.103, F(1,1)=161.45
        assert f_cdf(3.326, 5, 10) == pytest.approx(0.95, abs=0.001)
        assert f_cdf(4.103, 2, 10) == pytest.approx(0.95, abs=0.001)
        assert f_cdf(161.45, 1, 1) == pytest.approx(0.95, abs=0.001)

    def test_f11_median(self):
        assert f_cdf(1.0, 1, 1) == pytest.approx(0.5, abs=1e-12)

    def test_limits(self):
        assert f_cdf(0.0, 3, 7) == 0.0
        assert f_cdf(1e9, 3, 7) == pytest.approx(1.0, abs=1e-9)

    def test_against_scipy_grid(self):
        from scipy.stats import f as fdist
        for d1 in (1, 2, 5, 10, 40):
            for d2 in (1, 4, 8, 30, 120):
                for x in (0.1, 0.5, 1.0, 2.5, 7.0, 30.0):
                    assert f_cdf(x, d1, d2) == pytest.approx(
                        float(fdist.cdf(x, d1, d2)), abs=1e-10)

    def test_monotone_in_x(self):
        xs = np.linspace(0.01, 20, 200)
        vals = [f_cdf(x, 4, 9) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_betainc_bounds(self):
        with pytest.raises(ValueError):
            betainc(1.0, 1.0, 1.5)


class TestTTail:
    def test_published_point(self):
        # t-table: two-sided p of 2.306 at df=8 is 0.05
        assert t_sf_two_sided(2.306, 8) == pytest.approx(0.05, abs=0.001)

    def test_zero(self):
        assert t_sf_two_sided(0.0, 5) == 1.0

    def test_against_scipy(self):
        from scipy.stats import t as tdist
        for df in (1, 3, 8, 30):
            for x in (0.5, 1.0, 2.0, 4.0):
                assert t_sf_two_sided(x, df) == pytest.approx(
                    float(2 * tdist.sf(x, df)), abs=1e-10)


class TestPairwise:
    def test_identical_samples_not_significant(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        t, p, df = paired_t(x, x)
        assert t == 0.0
        assert p == 1.0

    def test_constant_offset_degenerate(self):
        x = np.array([1.0, 2.0, 3.0])
        with pytest.raises(DegenerateVariance):
            paired_t(x, x + 2.0)

    def test_power_with_subject_correlation(self):
        # within-subject pairs: strong shared subject term, small noise.
        # the 3*sigma/sqrt(n) shift is then detected essentially always.
        rng = np.random.default_rng(42)
        n = 9
        hits = 0
        resamples = 200
        for _ in range(resamples):
            subj = rng.normal(0, 1.0, n)
            x = subj + rng.normal(0, 0.2, n)
            sigma_x = math.sqrt(1.0 + 0.04)
            shift = 3.0 * sigma_x / math.sqrt(n)
            y = subj + rng.normal(0, 0.2, n) + shift
            res = pairwise({"x": x, "y": y}, alpha=0.05)
            if res[("x", "y")]["significant"]:
                hits += 1
        assert hits / resamples > 0.95

    def test_three_way_bonferroni(self, rng):
        groups = {k: rng.normal(size=6) for k in ("dc", "ptgc", "eptgc")}
        res = pairwise(groups)
        assert len(res) == 3
        for row in res.values():
            assert row["alpha_corrected"] == pytest.approx(0.05 / 3)


class TestLogTransform:
    def test_known_values(self):
        out = log_transform([1.0, math.e, math.e ** 2])
        assert out == pytest.approx([0.0, 1.0, 2.0], abs=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(NonPositiveValue):
            log_transform([1.0, 0.0])

    def test_monotone(self, rng):
        vals = np.sort(rng.uniform(0.1, 50.0, 30))
        out = log_transform(vals)
        assert (np.diff(out) >= 0).all()
