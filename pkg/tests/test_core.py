import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfstab.core import (
    AlphaFunction,
    PathFunction,
    ProcessConfig,
    ab_power,
    evaluate_path,
    parse_alpha,
    signed_power,
    sup_distance,
)


@pytest.mark.parametrize("r,s,expected", [
    (-4.0, 0.5, -2.0),
    (9.0, -0.5, 1.0 / 3.0),
    (-2.0, -1.25, -0.420448207626857271515562738117),  # mpmath, 30 digits
    (0.0, 1.5, 0.0),
])
def test_signed_power(r, s, expected):
    assert signed_power(r, s) == pytest.approx(expected, rel=1e-14, abs=0)


@pytest.mark.parametrize("s", [0.0, -1.0])
def test_signed_power_zero_base_nonpositive_exponent(s):
    with pytest.raises(ValueError):
        signed_power(0.0, s)


def test_ab_power_at_one_is_one():
    for a, b in [(0.5, 1.5), (0.8, 1.2), (1.0, 1.0)]:
        assert ab_power(1.0, a, b) == 1.0
        assert ab_power(1.0, a, b, order=2) == 1.0


def test_ab_power_values():
    # mpmath: max(4^-2, 4^-2/3) * (1 + ln 4)
    assert ab_power(4.0, 0.5, 1.5) == pytest.approx(0.947001544786874213, rel=1e-14)
    assert ab_power(4.0, 0.5, 1.5, order=2) == pytest.approx(0.896811925828726126, rel=1e-14)


def test_ab_power_rejects_nonpositive():
    with pytest.raises(ValueError):
        ab_power(0.0, 0.5, 1.5)
    with pytest.raises(ValueError):
        ab_power(1.0, 0.5, 1.5, order=3)


def test_tanh_family_bounds_and_M():
    al = AlphaFunction.tanh(1.2, 0.4)
    assert (al.a, al.b) == pytest.approx((0.8, 1.6))
    assert al.M == pytest.approx(0.4 / 0.8**2)
    z = np.linspace(-50, 50, 10001)
    v = al(z)
    assert np.all((v >= al.a) & (v <= al.b))
    # the derivative bound really dominates |alpha'| / alpha^2
    deriv = 0.4 / np.cosh(z) ** 2
    assert np.all(deriv / v**2 <= al.M)


def test_alpha_validation():
    with pytest.raises(ValueError):
        AlphaFunction.tanh(1.8, 0.4)
    with pytest.raises(ValueError):
        AlphaFunction.constant(2.0)
    with pytest.raises(ValueError):
        AlphaFunction.custom(lambda z: 1.0, 1.2, 1.0, 0.0)


def test_parse_alpha():
    assert parse_alpha("tanh:1.2,0.4").params == (1.2, 0.4)
    assert parse_alpha("constant:0.8")(3.0) == 0.8
    with pytest.raises(ValueError, match="constant, tanh"):
        parse_alpha("gamma:1")


def test_scalar_and_array_evaluation_agree():
    al = AlphaFunction.tanh(1.0, 0.3)
    z = np.array([-2.0, 0.1, 5.0])
    assert np.allclose(al(z), [al(float(v)) for v in z], rtol=1e-15, atol=0)


@pytest.mark.parametrize("alpha", [AlphaFunction.tanh(1.2, 0.4), AlphaFunction.tanh(1.0, 0.2),
                                   AlphaFunction.constant(0.8)])
def test_mean_value_estimate_fuzz(alpha):
    rng = np.random.default_rng(1)
    u, v = rng.normal(0, 3, (2, 100_000))
    y = np.exp(rng.uniform(np.log(0.01), np.log(100), 100_000))
    lhs = np.abs(y ** (-1 / alpha(v)) - y ** (-1 / alpha(u)))
    rhs = alpha.M * np.abs(v - u) * ab_power(y, alpha.a, alpha.b)
    assert np.all(lhs <= rhs)


@pytest.fixture
def step_path():
    return PathFunction(0.0, 1.0, 0.0, [0.5], [1.0])


def test_path_evaluation(step_path):
    assert step_path(0.5) == 1.0
    assert step_path.left_limit(0.5) == 0.0
    assert step_path(0.49) == 0.0
    assert evaluate_path(step_path, 0.5, left=True) == 0.0
    assert step_path(0.0) == 0.0
    with pytest.raises(ValueError):
        step_path(1.0)
    with pytest.raises(ValueError):
        step_path(-0.1)


def test_path_is_immutable(step_path):
    with pytest.raises(AttributeError):
        step_path.initial_value = 3.0
    with pytest.raises(ValueError):
        step_path.jump_values[0] = 2.0


def test_path_validation():
    with pytest.raises(ValueError):
        PathFunction(0, 1, 0, [0.5, 0.5], [1, 2])
    with pytest.raises(ValueError):
        PathFunction(0, 1, 0, [0.0], [1])


def test_jump_sizes_and_csv_roundtrip(tmp_path):
    p = PathFunction(0.0, 2.0, 0.1, [0.3, 1.1, 1.7], [0.4, -0.2, 1e-17])
    assert np.allclose(p.jump_sizes, [0.3, -0.6, 0.2 + 1e-17])
    f = tmp_path / "p.csv"
    p.to_csv(f)
    assert f.read_text().splitlines()[0] == "t,value"
    assert PathFunction.from_csv(f, t_end=2.0) == p


def test_sup_distance_examples():
    p = PathFunction(0.0, 1.0, 0.0)
    q = PathFunction(0.0, 1.0, 0.0, [0.5], [3.0])
    assert sup_distance(p, p) == 0.0
    assert sup_distance(p, q) == 3.0
    a = PathFunction(0.0, 1.0, 0.0, [0.3], [1.0])
    b = PathFunction(0.0, 1.0, 0.0, [0.6], [1.0])
    assert sup_distance(a, b) == 1.0
    with pytest.raises(ValueError):
        sup_distance(a, PathFunction(0.0, 2.0, 0.0))


def test_right_continuity_on_grid():
    rng = np.random.default_rng(5)
    times = np.sort(rng.uniform(0, 1, 50))
    p = PathFunction(0.0, 1.0, 0.0, times, rng.normal(size=50))
    for t in times:
        assert p(t) == p(np.nextafter(t, 1.0))


paths = st.lists(
    st.tuples(st.floats(0.01, 0.99), st.floats(-5, 5)), max_size=8, unique_by=lambda r: r[0],
).map(lambda rows: PathFunction(0.0, 1.0, 0.0, *zip(*sorted(rows))) if rows else PathFunction(0.0, 1.0, 0.0))


@settings(max_examples=200, deadline=None)
@given(paths, paths, paths)
def test_sup_distance_is_a_metric(p, q, r):
    assert sup_distance(p, q) == sup_distance(q, p)
    assert sup_distance(p, r) <= sup_distance(p, q) + sup_distance(q, r) + 1e-12
    grid = np.union1d(p.jump_times, q.jump_times)
    same = p.initial_value == q.initial_value and np.array_equal(p(grid), q(grid))
    assert (sup_distance(p, q) == 0) == same


def test_process_config_validation():
    ProcessConfig(0, 1, 0, 0, 0, 1)  # empty window allowed
    with pytest.raises(ValueError):
        ProcessConfig(1, 1)
    with pytest.raises(ValueError):
        ProcessConfig(0, 1, 0, 1.0, 2.0)
    with pytest.raises(ValueError):
        ProcessConfig(0, 1, 0, 1.0, -0.5)
    assert ProcessConfig(0, 2).length == 2
    assert math.isfinite(ProcessConfig().n)
