import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballavg.grid import (
    GridFunction,
    ScaleLadder,
    ball_footprint,
    ball_max,
    ball_mean,
    ball_min,
    forward_transform,
    inverse_transform,
    lp_norm,
    make_ladder,
)

sizes = st.sampled_from([16, 32, 64])


def test_rejects_bad_geometry():
    with pytest.raises(ValueError):
        GridFunction(np.zeros(24))
    with pytest.raises(ValueError):
        GridFunction(np.zeros(8))
    with pytest.raises(ValueError):
        GridFunction(np.zeros((16, 32)))
    with pytest.raises(ValueError):
        GridFunction(np.zeros((16,) * 4))
    with pytest.raises(ValueError):
        GridFunction(np.array([np.nan] + [0.0] * 15))


def test_values_are_frozen():
    f = GridFunction(np.zeros(16))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_transform_of_constant_and_cosine():
    F = forward_transform(GridFunction.constant(2.5, 32, 2))
    assert F.at(0, 0) == pytest.approx(2.5 * 32**2)
    mask = np.ones_like(F.coefficients, dtype=bool)
    mask[0, 0] = False
    assert np.abs(F.coefficients[mask]).max() < 1e-9

    f = GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), 64)
    F = forward_transform(f)
    assert F.at(1) == pytest.approx(32.0)
    assert F.at(-1) == pytest.approx(32.0)
    rest = np.delete(F.coefficients, [1, 63])
    assert np.abs(rest).max() < 1e-12


def test_round_trip(rng):
    f = GridFunction(rng.normal(size=64))
    g = inverse_transform(forward_transform(f))
    assert np.abs(g.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


@given(sizes, st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_parseval_and_hermitian(N, dim, seed):
    v = np.random.default_rng(seed).normal(size=(N,) * dim)
    f = GridFunction(v)
    F = forward_transform(f)
    lhs = lp_norm(f, 2) ** 2
    rhs = np.sum(np.abs(F.coefficients) ** 2) / N ** (2 * dim)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    flipped = np.conj(np.roll(np.flip(F.coefficients), 1, axis=tuple(range(dim))))
    assert np.allclose(F.coefficients, flipped, atol=1e-9)


@given(sizes, st.floats(-3, 3), st.integers(0, 2**31 - 1))
def test_linearity(N, c, seed):
    r = np.random.default_rng(seed)
    a, b = GridFunction(r.normal(size=N)), GridFunction(r.normal(size=N))
    lhs = forward_transform(a + b * c).coefficients
    rhs = forward_transform(a).coefficients + c * forward_transform(b).coefficients
    assert np.allclose(lhs, rhs, atol=1e-11)


def test_lp_norm_examples():
    assert lp_norm(GridFunction.constant(1.0, 32), 3.0) == 1.0
    f = GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), 256)
    assert abs(lp_norm(f, 2) - 1 / math.sqrt(2)) < 1e-6
    assert abs(lp_norm(f, math.inf) - 1.0) <= (1 / 256) ** 2
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


@given(st.integers(0, 2**31 - 1), st.floats(1.0, 4.0), st.floats(1.0, 4.0))
def test_lp_norm_monotone_in_p(seed, p1, p2):
    v = np.random.default_rng(seed).uniform(-1, 1, 64)
    lo, hi = sorted((p1, p2))
    assert lp_norm(v, lo) <= lp_norm(v, hi) * (1 + 1e-12)


def test_make_ladder_examples():
    assert list(make_ladder(64).scales) == [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    assert list(make_ladder(16).scales) == [1 / 4, 1 / 8]
    with pytest.raises(ValueError):
        make_ladder(8, k_min=3)
    with pytest.raises(ValueError):
        make_ladder(64, k_min=1)
    with pytest.raises(ValueError):
        ScaleLadder(3, 2)
    assert make_ladder(64).weight == pytest.approx(math.log(2))


def test_check_grid_guards():
    with pytest.raises(ValueError):
        ScaleLadder(2, 6).check_grid(64)
    with pytest.raises(ValueError):
        ScaleLadder(2, 4).check_grid(64, dilation=2.0)
    ScaleLadder(3, 5).check_grid(64, dilation=2.0)


def _brute_ball(v, r):
    N, out = v.shape[0], np.zeros_like(v)
    mean, mx, mn = np.zeros_like(v), np.zeros_like(v), np.zeros_like(v)
    for i in range(N):
        members = [v[j] for j in range(N) if min(abs(i - j), N - abs(i - j)) < r * N]
        mean[i], mx[i], mn[i] = np.mean(members), max(members), min(members)
    return mean, mx, mn


@pytest.mark.parametrize("r", [1 / 32, 3 / 64, 1 / 8, 0.25])
def test_discrete_ball_against_loops(rng, r):
    v = rng.normal(size=32)
    mean, mx, mn = _brute_ball(v, r)
    assert np.allclose(ball_mean(v, r), mean, atol=1e-14)
    assert np.array_equal(ball_max(v, r), mx)
    assert np.array_equal(ball_min(v, r), mn)


def test_open_ball_excludes_boundary():
    fp = ball_footprint(64, 1, 2 / 64)
    assert fp.sum() == 3
    fp2 = ball_footprint(64, 2, 2 / 64)
    assert fp2.sum() == 9
