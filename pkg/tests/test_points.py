import numpy as np
import pytest
from scipy import stats

from selfstab.bounds import tail_sum_expectation
from selfstab.points import (
    SignedPointSet,
    TruncationSchedule,
    extend_window,
    freeze_prefix,
    make_rng,
    restrict,
    sample_half_plane,
    sample_nested,
)


def test_zero_area_window_is_empty():
    assert len(sample_half_plane(0, 1, 3.0, 3.0, seed=1)) == 0


def test_sample_is_sorted_and_inside_window():
    ps = sample_half_plane(0.2, 0.9, 0.5, 40.0, seed=11)
    assert np.all(np.diff(ps.x) > 0)
    assert np.all((ps.x > 0.2) & (ps.x < 0.9))
    assert np.all((ps.y >= 0.5) & (ps.y <= 40.0))
    assert set(np.unique(ps.s)) <= {-1, 1}


def test_determinism():
    assert sample_half_plane(0, 1, 0, 10, seed=7) == sample_half_plane(0, 1, 0, 10, seed=7)
    assert sample_half_plane(0, 1, 0, 10, seed=7) != sample_half_plane(0, 1, 0, 10, seed=8)


def test_streams_are_order_independent():
    a = make_rng(3, "x", 5).random(4)
    make_rng(3, "x", 4).random(10)
    assert np.array_equal(a, make_rng(3, "x", 5).random(4))


def test_count_mean_over_seeds():
    counts = np.array([len(sample_half_plane(0, 1, 0, 10, 2.0, seed=s)) for s in range(10_000)])
    assert abs(counts.mean() - 20) <= 3 * np.sqrt(20 / 10_000)


def test_invalid_window():
    with pytest.raises(ValueError):
        sample_half_plane(1, 0, 0, 1)
    with pytest.raises(ValueError):
        sample_half_plane(0, 1, 2, 1)
    with pytest.raises(ValueError):
        sample_half_plane(0, 1, 0, 1, intensity=0)


def test_extend_window_keeps_existing_points():
    ps = sample_half_plane(0, 1, 0, 4, seed=1)
    assert extend_window(ps, 4.0, seed=2) is ps
    big = extend_window(ps, 16.0, seed=2)
    assert np.all(np.diff(big.x) > 0)
    assert restrict(big, 4.0) == ps
    band = big.y > 4.0
    assert np.all(big.y[band] <= 16.0)
    with pytest.raises(ValueError):
        extend_window(ps, 2.0, seed=2)


def test_extend_band_counts():
    counts = []
    for s in range(4000):
        ps = sample_half_plane(0, 1, 0, 2, seed=s)
        counts.append(len(extend_window(ps, 6, seed=10_000 + s)) - len(ps))
    counts = np.array(counts)
    assert abs(counts.mean() - 8) <= 4 * np.sqrt(8 / 4000)


def test_tie_redraw():
    # force a collision with an existing x and check it is resolved
    from selfstab import points as pts

    ps = SignedPointSet([0.5], [1.0], [1], (0, 1, 0, 1))
    rng = np.random.default_rng(0)
    x = pts._redraw_ties(rng, np.array([0.5, 0.25, 0.25]), 0.0, 1.0, taken=ps.x)
    allx = np.concatenate([ps.x, x])
    assert np.unique(allx).size == allx.size


def test_restrict_examples():
    ps = SignedPointSet([0.1, 0.2, 0.3], [0.5, 2.0, 7.0], [1, -1, 1], (0, 1, 0, 10))
    assert restrict(ps, 10.0).y.tolist() == [0.5, 2.0, 7.0]
    assert len(restrict(ps, 0.0)) == 0
    assert restrict(ps, 2.0).y.tolist() == [0.5, 2.0]


def test_freeze_prefix():
    ps = sample_half_plane(0, 1, 0, 20, seed=4)
    head, tail = freeze_prefix(ps, 0.0)
    assert len(head) == 0 and tail == SignedPointSet(ps.x, ps.y, ps.s, (0, 1, 0, 20))
    head, tail = freeze_prefix(ps, np.nextafter(1.0, 0))
    assert len(tail) == 0 and len(head) == len(ps)
    head, tail = freeze_prefix(ps, 0.37)
    assert len(head) + len(tail) == len(ps)
    assert np.all(head.x <= 0.37) and np.all(tail.x > 0.37)
    with pytest.raises(ValueError):
        freeze_prefix(ps, 1.0)


def test_csv_roundtrip(tmp_path):
    ps = sample_half_plane(0, 1, 0.5, 5, seed=2)
    f = tmp_path / "ps.csv"
    ps.to_csv(f)
    assert SignedPointSet.from_csv(f) == ps
    assert "x,y,s" in f.read_text().splitlines()[1]


def test_full_plane_view():
    ps = SignedPointSet([0.1, 0.2], [3.0, 4.0], [-1, 1], (0, 1, 0, 5))
    x, y = ps.full_plane()
    assert y.tolist() == [-3.0, 4.0]


def test_schedule():
    s = TruncationSchedule.dyadic(0, 10)
    assert s.terminal == 1024 and len(s) == 11
    with pytest.raises(ValueError):
        TruncationSchedule((2, 2))
    with pytest.raises(ValueError):
        TruncationSchedule(())


def test_nested_sampling_shares_low_bands():
    short = sample_nested(0, 1, [1, 2, 4], seed=9)
    long = sample_nested(0, 1, [1, 2, 4, 8, 16], seed=9)
    assert restrict(long, 4) == short


def test_sign_balance():
    s = np.concatenate([sample_half_plane(0, 1, 0, 50, seed=k).s for k in range(200)]).astype(float)
    assert abs(s.mean()) <= 4 * s.std() / np.sqrt(s.size)


def test_tail_sum_statistic_matches_campbell():
    b, n, top = 1.2, 2.0, 500.0
    vals = []
    for k in range(3000):
        ps = sample_half_plane(0, 1, n, top, seed=k)
        vals.append(np.sum(ps.y[ps.y > n] ** (-2 / b)))
    vals = np.array(vals)
    expected = tail_sum_expectation(0, 1, 2.0, b, n) - tail_sum_expectation(0, 1, 2.0, b, top)
    assert abs(vals.mean() - expected) <= 3 * vals.std(ddof=1) / np.sqrt(vals.size)


def test_uniform_marginals():
    ps = sample_half_plane(0, 1, 0, 5000, seed=3)
    assert stats.kstest(ps.x, "uniform").pvalue > 0.001
    assert stats.kstest(ps.y / 5000, "uniform").pvalue > 0.001
