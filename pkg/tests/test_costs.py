import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from geomcp.costs import (
    CostKind,
    CostModel,
    choose_quantiles,
    default_quantile_count,
    empirical_cost,
    normal_meanvar_cost,
    precompute,
    quantile_levels,
    segment_cost,
    segment_costs,
)
from geomcp.errors import ConfigurationError, InputError

NORMAL = CostModel()
EMPIRICAL = CostModel(CostKind.EMPIRICAL)
LOG_2PI = math.log(2 * math.pi)

series_st = st.lists(st.floats(-100, 100, allow_nan=False), min_size=4, max_size=30)


def direct_normal(seg, floor=1e-8):
    seg = np.asarray(seg, dtype=float)
    ell = seg.size
    rss = float(np.sum((seg - seg.mean()) ** 2))
    v = max(rss / ell, floor)
    return ell * (LOG_2PI + math.log(v)) + rss / v


def direct_empirical(series, s, t, k):
    """Definition-level evaluation with hand-rolled 'lower' quantiles."""
    n = len(series)
    c = math.log(2 * n - 1)
    ordered = sorted(series)
    total = 0.0
    for j in range(1, k + 1):
        level = 1 / (1 + (2 * n - 1) * math.exp(-c * (2 * j - 1) / k))
        q = ordered[math.floor((n - 1) * level)]
        seg = series[s:t]
        a = sum(v < q for v in seg) + 0.5 * sum(v == q for v in seg)
        f = a / len(seg)
        for x in (f, 1 - f):
            if x > 0:
                total += len(seg) * x * math.log(x)
    return -2 * c / k * total


def test_prefix_sums():
    ctx = precompute([1.0, 2.0], NORMAL)
    np.testing.assert_array_equal(ctx.cumsum, [0, 1, 3])
    np.testing.assert_array_equal(ctx.cumsq, [0, 1, 5])


@pytest.mark.parametrize("n, k", [(148, 20), (3, 5)])
def test_default_quantile_count(n, k):
    assert default_quantile_count(n) == k
    assert precompute(np.arange(n, dtype=float), EMPIRICAL).quantiles.size == k


def test_quantile_levels():
    assert quantile_levels(10, 1)[0] == pytest.approx(0.5)
    lv = quantile_levels(100, 18)
    assert lv[0] == pytest.approx(0.006698, abs=1e-6)
    assert lv[8] == pytest.approx(0.427007, abs=1e-6)
    assert np.all(np.diff(lv) > 0)
    assert 1 - quantile_levels(1000, 30)[-1] < 0.01


def test_median_for_single_quantile():
    y = np.array([5.0, 1.0, 4.0, 2.0, 3.0])
    q, gamma = choose_quantiles(y, 1)
    assert q[0] == 3.0
    assert gamma == pytest.approx(2 * math.log(9))


def test_normal_golden():
    ctx = precompute([0.0, 1.0, -1.0, 2.0], NORMAL)
    assert normal_meanvar_cost(ctx, 0, 4) == pytest.approx(12.24408247089422, rel=1e-12)
    assert ctx.variance(0, 4) == pytest.approx(1.25)


def test_two_point_variance():
    ctx = precompute([3.0, 7.0], NORMAL)
    assert ctx.variance(0, 2) == pytest.approx(4.0)


def test_constant_segment_floored():
    ctx = precompute([5.0, 5.0, 5.0, 1.0], NORMAL)
    assert ctx.is_degenerate(0, 3)
    assert not ctx.is_degenerate(0, 4)
    expected = 3 * (LOG_2PI + math.log(1e-8))
    assert normal_meanvar_cost(ctx, 0, 3) == pytest.approx(expected, rel=1e-12)


def test_normal_short_segment_rejected():
    ctx = precompute([1.0, 2.0, 3.0], NORMAL)
    with pytest.raises(InputError):
        normal_meanvar_cost(ctx, 0, 1)
    with pytest.raises(InputError):
        segment_cost(ctx, 2, 4)


def test_empirical_golden():
    y = [1.0, 2, 3, 4, 5, 6, 7, 8]
    ctx = precompute(y, CostModel(CostKind.EMPIRICAL, quantile_count=5))
    assert empirical_cost(ctx, 0, 4) == pytest.approx(6.131474371288262, rel=1e-12)
    assert empirical_cost(ctx, 0, 4) == pytest.approx(direct_empirical(y, 0, 4, 5), rel=1e-12)


def test_empirical_zero_when_below_all_quantiles():
    y = np.concatenate(([-10.0, -10.0], np.arange(100.0)))
    ctx = precompute(y, CostModel(CostKind.EMPIRICAL, quantile_count=3))
    assert np.all(ctx.quantiles > -10)
    assert empirical_cost(ctx, 0, 2) == 0.0


def test_empirical_symmetric_bernoulli():
    y = np.array([1.0, 2, 3, 4, 5, 6, 7, 8])
    ctx = precompute(y, CostModel(CostKind.EMPIRICAL, quantile_count=1))
    # median (lower) is 4: segment (2, 3, 6, 7) has two values below, none equal
    assert ctx.quantiles[0] == 4.0
    seg_ctx = precompute(np.array([2.0, 3, 6, 7, 1, 4, 5, 8]), CostModel(CostKind.EMPIRICAL, quantile_count=1))
    assert seg_ctx.quantiles[0] == 4.0
    assert empirical_cost(seg_ctx, 0, 4) == pytest.approx(seg_ctx.gamma * 4 * math.log(2), rel=1e-12)


def test_empirical_half_weight_for_ties():
    y = np.array([1.0, 2, 2, 3])
    ctx = precompute(y, CostModel(CostKind.EMPIRICAL, quantile_count=1))
    assert ctx.quantiles[0] == 2.0
    # (1, 2): a = 1 + 0.5 = 1.5 of 2
    f = 0.75
    expected = -ctx.gamma * 2 * (f * math.log(f) + (1 - f) * math.log(1 - f))
    assert empirical_cost(ctx, 0, 2) == pytest.approx(expected, rel=1e-12)


def test_model_validation():
    with pytest.raises(ConfigurationError):
        CostModel(variance_floor=0.0)
    with pytest.raises(ConfigurationError):
        CostModel(CostKind.EMPIRICAL, quantile_count=0)
    with pytest.raises(InputError):
        precompute([1.0, np.inf])
    assert NORMAL.min_segment_length == 2 and EMPIRICAL.min_segment_length == 1


@given(series_st, st.data())
def test_normal_matches_direct(y, data):
    ctx = precompute(y, NORMAL)
    n = len(y)
    s = data.draw(st.integers(0, n - 2))
    t = data.draw(st.integers(s + 2, n))
    direct = direct_normal(y[s:t])
    # prefix sums lose digits when the variance is tiny relative to the level
    assume(ctx.variance(s, t) > 1e-6 or direct_normal(y[s:t]) < -100)
    assert normal_meanvar_cost(ctx, s, t) == pytest.approx(direct, rel=1e-8, abs=1e-6)


@given(series_st, st.data())
def test_normal_split_subadditive(y, data):
    ctx = precompute(y, NORMAL)
    n = len(y)
    s = data.draw(st.integers(0, n - 4))
    u = data.draw(st.integers(s + 2, n - 2))
    t = data.draw(st.integers(u + 2, n))
    whole = normal_meanvar_cost(ctx, s, t)
    parts = normal_meanvar_cost(ctx, s, u) + normal_meanvar_cost(ctx, u, t)
    assert whole >= parts - 1e-9 * max(1.0, abs(whole))


@given(series_st, st.floats(0.01, 100))
def test_normal_scale_equivariance(y, lam):
    y = np.asarray(y)
    assume(np.var(y) > 1e-3)
    base = normal_meanvar_cost(precompute(y, NORMAL), 0, y.size)
    scaled = normal_meanvar_cost(precompute(lam * y, NORMAL), 0, y.size)
    assert scaled == pytest.approx(base + 2 * y.size * math.log(lam), rel=1e-7, abs=1e-6)


@given(series_st, st.randoms(use_true_random=False))
def test_permutation_invariance(y, rnd):
    perm = list(y)
    rnd.shuffle(perm)
    a = precompute(y, NORMAL)
    b = precompute(perm, NORMAL)
    assert normal_meanvar_cost(a, 0, len(y)) == pytest.approx(normal_meanvar_cost(b, 0, len(y)), rel=1e-7, abs=1e-6)
    # empirical: quantiles depend on the whole series, which is a permutation too
    a = precompute(y, EMPIRICAL)
    b = precompute(perm, EMPIRICAL)
    assert empirical_cost(a, 0, len(y)) == pytest.approx(empirical_cost(b, 0, len(y)), rel=1e-12)


@given(st.lists(st.integers(-5, 5).map(float), min_size=2, max_size=25), st.data())
def test_empirical_nonnegative_and_zero_iff_pure(y, data):
    ctx = precompute(y, EMPIRICAL)
    n = len(y)
    s = data.draw(st.integers(0, n - 1))
    t = data.draw(st.integers(s + 1, n))
    cost = empirical_cost(ctx, s, t)
    assert cost >= 0
    counts = ctx.cum_counts[:, t] - ctx.cum_counts[:, s]
    pure = np.all((counts == 0) | (counts == t - s))
    assert (cost == 0) == pure
    assert cost == pytest.approx(direct_empirical(y, s, t, ctx.quantiles.size), rel=1e-10, abs=1e-12)


def test_vectorised_matches_scalar(rng):
    y = rng.standard_normal(40)
    for model in (NORMAL, EMPIRICAL):
        ctx = precompute(y, model)
        starts = np.arange(0, 30)
        vec = segment_costs(ctx, starts, 32)
        scalar = [segment_cost(ctx, int(s), 32) for s in starts]
        np.testing.assert_allclose(vec, scalar, rtol=1e-13)


def test_constant_segment_exact_at_large_level(rng):
    y = np.concatenate((rng.normal(1e4, 50.0, 30), np.full(6, 1e4 + 0.1), rng.normal(1e4, 50.0, 30)))
    ctx = precompute(y, NORMAL)
    assert ctx.variance(30, 36) == 0.0
    assert normal_meanvar_cost(ctx, 30, 36) == 6 * (LOG_2PI + math.log(1e-8))
