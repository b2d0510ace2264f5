import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from oracles import ks_exact_by_permutation, mw_exact_by_permutation
from segnet.stats import (
    DegenerateAxisError, ModeError, ecdf, gaussian_kde_2d, histogram_pdf, ks_two_sample,
    mann_whitney_u, significance_code, size_bins, zscore_vs_opposite,
)


def test_mw_reference_value():
    r = mann_whitney_u([1, 2], [3, 4], mode="exact")
    assert r.p_exact == Fraction(1, 3)
    assert r.statistic == 0.0


@pytest.mark.parametrize("a,b", [
    ([0.1, 2.5], [1.0, 3.0, 4.0]),
    ([5.0], [1.0, 2.0, 3.0]),
    ([1.0, 4.0, 6.0], [2.0, 3.0, 5.0, 7.0]),
    ([1.0, 2.0, 2.0], [2.0, 3.0]),          # ties
    ([1.0, 1.0], [1.0, 2.0, 2.0]),
])
def test_ks_exact_matches_permutations(a, b):
    assert ks_two_sample(a, b, "exact").p_exact == ks_exact_by_permutation(a, b)


@pytest.mark.parametrize("alternative", ["two_sided", "a_less", "a_greater"])
@pytest.mark.parametrize("a,b", [
    ([0.1, 2.5], [1.0, 3.0, 4.0]),
    ([1.0, 4.0, 6.0], [2.0, 3.0, 5.0, 7.0]),
    ([9.0], [1.0, 2.0]),
])
def test_mw_exact_matches_permutations(a, b, alternative):
    got = mann_whitney_u(a, b, "exact", alternative).p_exact
    assert got == mw_exact_by_permutation(a, b, alternative)


def test_ks_statistic_and_scipy_agreement(rng):
    for _ in range(20):
        a = rng.normal(size=int(rng.integers(15, 60)))
        b = rng.normal(0.3, size=int(rng.integers(15, 60)))
        r = ks_two_sample(a, b)
        ref = sps.ks_2samp(a, b, method="asymp")
        assert r.mode == "asymptotic"
        assert r.statistic == pytest.approx(ref.statistic, abs=1e-12)
        # limiting Kolmogorov law at sqrt(nm/(n+m)) * D
        en = math.sqrt(a.size * b.size / (a.size + b.size))
        assert r.p_value == pytest.approx(sps.kstwobign.sf(en * r.statistic), rel=1e-9, abs=1e-12)


def test_mw_asymptotic_against_scipy(rng):
    for alt, sp_alt in (("two_sided", "two-sided"), ("a_less", "less"), ("a_greater", "greater")):
        a = rng.integers(0, 8, size=40).astype(float)   # ties on purpose
        b = rng.integers(1, 9, size=35).astype(float)
        r = mann_whitney_u(a, b, "asymptotic", alt)
        ref = sps.mannwhitneyu(a, b, alternative=sp_alt, method="asymptotic", use_continuity=True)
        assert r.statistic == ref.statistic
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_mw_tie_fallback():
    r = mann_whitney_u([1.0, 2.0, 2.0], [2.0, 3.0], "exact")
    assert r.fallback and r.mode == "asymptotic" and r.p_exact is None


def test_identical_constant_samples():
    r = mann_whitney_u([1.0, 1.0], [1.0, 1.0], "auto")
    assert r.p_value == 1.0 and r.fallback
    assert ks_two_sample([1.0, 1.0], [1.0, 1.0]).p_value == 1.0


def test_modes():
    with pytest.raises(ModeError):
        ks_two_sample(range(10), range(10, 20), "exact")
    with pytest.raises(ModeError):
        ks_two_sample([1], [2], "bogus")
    assert ks_two_sample(range(7), range(7, 14)).mode == "exact"
    assert ks_two_sample(range(8), range(8, 15)).mode == "asymptotic"
    with pytest.raises(ValueError):
        mann_whitney_u([1], [2], alternative="less")
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])
    with pytest.raises(ValueError):
        mann_whitney_u([math.nan], [1.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=5),
       st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_exact_p_values_are_probabilities(a, b):
    ks = ks_two_sample(a, b, "exact")
    assert 0 < ks.p_exact <= 1
    # the observed split is always counted, so p >= 1 / C(n+m, n)
    assert ks.p_exact >= Fraction(1, math.comb(len(a) + len(b), len(a)))
    mw = mann_whitney_u(a, b, "auto")
    assert 0 <= mw.p_value <= 1


@pytest.mark.parametrize("p,code", [(0.001, "***"), (0.00999, "***"), (0.01, "**"), (0.049, "**"),
                                    (0.05, "*"), (0.0999, "*"), (0.1, ""), (0.7, ""),
                                    (math.nan, "")])
def test_significance_codes(p, code):
    assert significance_code(p) == code


def test_zscore():
    ref = np.arange(30, dtype=float)
    z = zscore_vs_opposite(20.0, ref)
    assert z.ok
    assert z.value == pytest.approx((20 - ref.mean()) / ref.std(ddof=1))
    assert zscore_vs_opposite(1.0, ref[:29]).status == "insufficient"
    assert zscore_vs_opposite(1.0, np.ones(40)).status == "degenerate"
    assert zscore_vs_opposite(1.0, [1.0, 2.0, 3.0], min_n=3).ok


def test_size_bins_equal_counts():
    sizes = list(range(1, 101))
    bins = size_bins(sizes, k=10)
    assert bins.edges == [1, 11, 21, 31, 41, 51, 61, 71, 81, 91]
    assert np.bincount(bins.assignment).tolist() == [10] * 10
    assert bins.labels[0] == "1-10" and bins.labels[-1] == "91-100"


def test_size_bins_ties_never_straddle():
    sizes = [2] * 50 + [3] * 30 + [4, 5, 6, 7, 8, 9, 10, 11, 12, 40]
    bins = size_bins(dict(enumerate(sizes)), k=10)
    for s in set(sizes):
        assert len({bins.bin_of(s)}) == 1
    assert len(bins) < 10
    groups = {}
    for cid, b in bins.assignment.items():
        groups.setdefault(b, set()).add(sizes[cid])
    # ranges are disjoint and increasing
    ordered = [groups[b] for b in sorted(groups)]
    for lo, hi in zip(ordered, ordered[1:]):
        assert max(lo) < min(hi)


def test_size_bins_override():
    bins = size_bins([2, 3, 5, 8, 13], edges_override=[2, 5, 10])
    assert bins.assignment == [0, 0, 1, 1, 2]
    assert bins.labels == ["2-4", "5-9", "10-13"]
    with pytest.raises(ValueError):
        size_bins([1, 5], edges_override=[2, 5])
    with pytest.raises(ValueError):
        size_bins([])


def test_histogram_pdf(rng):
    v = rng.normal(size=500)
    x, d = histogram_pdf(v, 25)
    assert len(x) == 25
    assert np.sum(d) * (x[1] - x[0]) == pytest.approx(1.0)
    assert histogram_pdf([3.0, 3.0])[1].tolist() == [1.0]


def test_ecdf():
    x, y = ecdf([3, 1, 2, 2])
    assert x.tolist() == [1, 2, 3]
    assert y.tolist() == [0.25, 0.75, 1.0]


def test_kde_integrates_to_one(rng):
    pts = rng.normal(size=(200, 2)) * [1.0, 3.0]
    k = gaussian_kde_2d(pts, grid=120)
    assert k.density.shape == (120, 120)
    assert float(k.density.sum() * k.cell_area()) == pytest.approx(1.0, abs=5e-3)
    sd = pts.std(axis=0, ddof=1)
    assert k.bandwidth == pytest.approx(tuple(sd * 200 ** (-1 / 6)))
    assert len(list(k.long_rows())) == 120 * 120


def test_kde_fixed_bandwidth_pointwise(rng):
    pts = rng.normal(size=(50, 2))
    k = gaussian_kde_2d(pts, bandwidth=(0.5, 0.5), grid=15)
    iso = gaussian_kde_2d(pts, bandwidth=0.5, grid=15)
    assert np.allclose(k.density, iso.density)
    x0, y0 = k.x[7], k.y[7]
    direct = np.mean(sps.norm.pdf((x0 - pts[:, 0]) / 0.5) * sps.norm.pdf((y0 - pts[:, 1]) / 0.5)) / 0.25
    assert k.density[7, 7] == pytest.approx(direct, rel=1e-12)


def test_kde_degenerate():
    with pytest.raises(DegenerateAxisError):
        gaussian_kde_2d([[0, 1], [0, 2], [0, 3]])
    with pytest.raises(ValueError):
        gaussian_kde_2d([[0, 1]])
