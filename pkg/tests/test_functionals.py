import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballavg import functionals as fn
from ballavg.grid import LN2, GridFunction, ScaleLadder, lp_norm, make_ladder
from ballavg.kernels import ball_difference, build_filter_bank
from ballavg.synth import GeneratorSpec, generate, standard_corpus, weierstrass

P = fn.SpaceParams(0.9, 2.0, 2.0)


def _cos(N=256):
    return GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), N)


def test_params_validation():
    for bad in (
        dict(alpha=0.5, p=1.0, q=2.0),
        dict(alpha=0.5, p=2.0, q=1.0),
        dict(alpha=2.0, p=2.0, q=2.0),
        dict(alpha=0.5, p=2.0, q=2.0, r=3.0),
        dict(alpha=0.5, p=2.0, q=2.0, lam=1.0),
        dict(alpha=0.5, p=2.0, q=2.0, beta=0.5),
        dict(alpha=0.5, p=math.inf, q=2.0),
    ):
        with pytest.raises(ValueError):
            fn.SpaceParams(**bad)
    assert fn.SpaceParams(3.0, 2.0, 2.0, ell=2).alpha == 3.0
    assert fn.SpaceParams(0.5, 2.0, math.inf).q == math.inf


def test_cosine_eigenfunction():
    f = _cos()
    ladder = make_ladder(256)
    rep = fn.g_functional(f, fn.SpaceParams(1.0, 2.0, 2.0), ladder)
    # A(s) = 1 - sin(s)/s in one dimension
    A = lambda s: 1 - math.sin(s) / s  # noqa: E731
    scalar = math.sqrt(LN2 * sum(4.0**k * A(2 * math.pi * 2.0**-k) ** 2 for k in ladder.ks))
    assert np.abs(rep.field.values - np.abs(f.values) * scalar).max() < 1e-12
    # direct per-rung evaluation
    rows = [2.0**k * np.abs(ball_difference(f, t).values) for k, t in zip(ladder.ks, ladder.scales)]
    direct = np.sqrt(LN2 * np.sum(np.array(rows) ** 2, axis=0))
    assert np.allclose(rep.field.values, direct, atol=1e-14)
    assert rep.norm == pytest.approx(lp_norm(f, 2) * (1 + scalar))


@pytest.mark.parametrize("name", fn.FUNCTIONALS)
def test_constants(name):
    c = GridFunction.constant(1.7, 64)
    rep = fn.evaluate(name, c, P, make_ladder(64))
    assert rep.difference_term < 1e-13
    assert rep.norm == pytest.approx(1.7, abs=1e-12)


@pytest.mark.parametrize("name", fn.FUNCTIONALS)
@given(c=st.floats(-50, 50).filter(lambda v: abs(v) > 1e-3))
def test_homogeneity(name, c):
    f = generate(weierstrass(0.9, 64, seed=1))
    ladder = make_ladder(64)
    a = fn.evaluate(name, f, P, ladder).norm
    b = fn.evaluate(name, f * c, P, ladder).norm
    assert b == pytest.approx(abs(c) * a, rel=1e-12)


def _area_loop(v, ladder, alpha, q, beta):
    N = v.shape[0]
    rows = []
    for k, t in zip(ladder.ks, ladder.scales):
        D = 2.0 ** (k * alpha) * np.abs(ball_difference(GridFunction(v), t).values)
        out = np.zeros(N)
        for i in range(N):
            ys = [j for j in range(N) if min(abs(i - j), N - abs(i - j)) < beta * t * N]
            out[i] = np.mean([D[j] ** q for j in ys])
        rows.append(out)
    return (LN2 * np.sum(rows, axis=0)) ** (1 / q)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_area_against_double_loop(beta):
    f = generate(GeneratorSpec("bandlimited", 64, 1, {"modes": [((6,), 1.0, 0.2)]}))
    ladder = ScaleLadder(3, 5)
    rep = fn.area_functional(f, P, ladder, r=2.0, beta=beta)
    assert rep.functional == "area_tilde"
    assert np.allclose(rep.field.values, _area_loop(f.values, ladder, 0.9, 2.0, beta), atol=1e-13)


@given(st.integers(0, 2**31 - 1))
def test_area_monotone_in_r(seed):
    f = GridFunction(np.random.default_rng(seed).normal(size=64))
    params = fn.SpaceParams(0.7, 2.0, 3.0)
    ladder = make_ladder(64)
    fields = [fn.area_functional(f, params, ladder, r=r).field.values for r in (1.0, 2.0, 3.0)]
    assert np.all(fields[0] <= fields[1] * (1 + 1e-12))
    assert np.all(fields[1] <= fields[2] * (1 + 1e-12))


def test_area_guards():
    f = _cos(64)
    with pytest.raises(ValueError):
        fn.area_functional(f, P, make_ladder(64), r=2.0, beta=2.0)
    with pytest.raises(ValueError):
        fn.area_functional(f, P, make_ladder(64), r=3.0)
    with pytest.raises(ValueError):
        fn.area_functional(f, P, make_ladder(64), beta=0.5)


def test_gstar_concentration_limit():
    f = generate(weierstrass(0.9, 256, seed=2))
    ladder = make_ladder(256)
    lam, q = 50.0, 2.0
    rep = fn.gstar_functional(f, P, ladder, lam=lam)
    N = 256
    acc = np.zeros(N)
    for k, t in zip(ladder.ks, ladder.scales):
        d = np.minimum(np.arange(N), N - np.arange(N)) / N
        w = (t / (t + d)) ** lam
        mass = np.sum(w[w >= 1e-6]) / N / t
        D = 2.0 ** (k * 0.9) * np.abs(ball_difference(f, t).values)
        acc += mass * D**q
    oracle = (LN2 * acc) ** (1 / q)
    assert np.abs(rep.field.values / oracle - 1).max() < 0.05


def test_gstar_weight_mass_explicit():
    N, t, lam = 128, 1 / 16, 2.0
    d = np.minimum(np.arange(N), N - np.arange(N)) / N
    w = (t / (t + d)) ** lam
    assert fn.gstar_weight_mass(N, 1, t, lam) == pytest.approx(np.sum(w[w >= 1e-6]) / N / t, rel=1e-12)


def test_gstar_rejects_infinite_q():
    with pytest.raises(ValueError):
        fn.gstar_functional(_cos(64), fn.SpaceParams(0.9, 2.0, math.inf), make_ladder(64))


@given(st.integers(0, 2**31 - 1), st.sampled_from([1.5, 2.0, 3.0]), st.sampled_from([1.5, 2.0, 4.0]), st.integers(1, 2))
def test_s_dominated_by_gstar(seed, q, lam, dim):
    ladder = make_ladder(64)
    r = np.random.default_rng(seed)
    F = fn.TimeSpaceField(ladder, r.random((len(ladder),) + (64,) * dim) ** r.uniform(1, 8))
    S = fn.s_square(F, q)
    bound = fn.gstar_constant(dim, q, lam) * fn.gstar_square(F, q, lam)
    assert np.all(S <= bound * (1 + 1e-12))


def test_gstar_constant_values():
    assert fn.gstar_constant(1, 2.0, 2.0) == pytest.approx(math.sqrt(2.0))
    assert fn.gstar_constant(2, 1.0, 1.5) == pytest.approx(8.0 / math.pi)
    assert fn.gstar_constant(3, 3.0, 2.0) == pytest.approx((64 / (4 * math.pi / 3)) ** (1 / 3))


def test_time_space_field_checks():
    ladder = make_ladder(64)
    with pytest.raises(ValueError):
        fn.TimeSpaceField(ladder, np.zeros((2, 64)))
    with pytest.raises(ValueError):
        fn.TimeSpaceField(ladder, np.full((4, 64), np.inf))


@given(st.integers(0, 2**31 - 1), st.sampled_from([1.5, 2.0, 5.0]))
def test_sup_below_unit_weight_sum(seed, q):
    ladder = make_ladder(64)
    F = fn.TimeSpaceField(ladder, np.random.default_rng(seed).random((4, 64)))
    sup = fn.g_square(F, math.inf)
    unit = fn.g_square(F, q) / LN2 ** (1 / q)
    assert np.all(sup <= unit * (1 + 1e-12))


def test_fourier_single_mode():
    bank = build_filter_bank()
    m = 24
    f = GridFunction.from_function(lambda x: np.cos(2 * np.pi * m * x), 256)
    ladder = make_ladder(256)
    rep = fn.fourier_tl_norm(f, P, ladder, bank)
    phi = [float(bank.phi_hat(np.array([2 * np.pi * m * 2.0**-k]))[0]) for k in ladder.ks]
    scalar = math.sqrt(LN2 * sum(2.0 ** (2 * 0.9 * k) * p**2 for k, p in zip(ladder.ks, phi)))
    base = float(bank.Phi_hat(np.array([2 * np.pi * m]))[0]) / math.sqrt(2)
    assert rep.base_term == pytest.approx(base, abs=1e-12)
    assert rep.norm == pytest.approx(base + scalar / math.sqrt(2), rel=1e-10)
    assert sum(p > 0 for p in phi) <= 2


def test_two_banks_bracket():
    alt = build_filter_bank("alternate")
    for spec in standard_corpus(512):
        f = generate(spec)
        ladder = make_ladder(512)
        a = fn.fourier_tl_norm(f, P, ladder).norm
        b = fn.fourier_tl_norm(f, P, ladder, alt).norm
        assert 1 / 5 <= b / a <= 5


def test_difference_lipschitz_bound():
    # |f'| <= 2 pi * 3 * 0.2 for 0.2 cos(6 pi x)
    f = generate(GeneratorSpec("bandlimited", 256, 1, {"modes": [((3,), 0.2, 0.0)]}))
    L = 2 * np.pi * 3 * 0.2
    ladder = make_ladder(256)
    alpha, q = 0.5, 2.0
    rep = fn.difference_functional(f, fn.SpaceParams(alpha, 2.0, q), ladder)
    bound = L * (LN2 * sum(2.0 ** (k * (alpha - 1) * q) for k in ladder.ks)) ** (1 / q)
    assert rep.field.values.max() <= bound
    assert rep.flags == ()


def test_difference_saturation_flag():
    f = generate(weierstrass(1.5, 1024, seed=0))
    params = fn.SpaceParams(1.5, 2.0, 2.0)
    values = []
    for k_max in (6, 7, 8, 9):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rep = fn.difference_functional(f, params, ScaleLadder(2, k_max))
        assert "saturation" in rep.flags and caught
        values.append(rep.difference_term)
    assert all(b > 1.2 * a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("alpha,q", [(0.7, 2.0), (0.9, math.inf)])
def test_weierstrass_resolution_stability(alpha, q):
    # alpha0 = 0.9 lies in F^0.9_{p,inf} and F^0.7_{p,2}, not in F^0.9_{p,2}
    params = fn.SpaceParams(alpha, 2.0, q)
    norms, ratios = [], []
    for N in (512, 1024, 2048):
        f = generate(weierstrass(0.9, N, seed=0))
        ladder = make_ladder(N)
        g = fn.g_functional(f, params, ladder).norm
        d = fn.difference_functional(f, params, ladder).norm
        norms.append(g)
        ratios.append(d / g)
    assert np.isfinite(norms).all()
    assert abs(norms[-1] / norms[0] - 1) < 0.10
    assert max(ratios) / min(ratios) < 1.25


def test_weierstrass_at_critical_index_grows():
    # same smoothness and q = 2: every mode adds the same amount, so the norm keeps growing
    norms = [fn.g_functional(generate(weierstrass(0.9, N, seed=0)), P, make_ladder(N)).norm for N in (512, 2048)]
    assert norms[1] > 1.1 * norms[0]


def test_tail_check():
    assert fn.tail_check(GridFunction.constant(2.0, 64)) == 0.0
    assert fn.tail_check(GridFunction.constant(0.0, 64)) == 0.0
    spike = np.zeros(64)
    spike[10] = 3.0
    r = fn.tail_check(GridFunction(spike))
    assert 0 < r < 1


@given(st.integers(0, 2**31 - 1))
def test_tail_ratio_at_most_one(seed):
    v = np.random.default_rng(seed).random(128) ** 3
    assert fn.tail_check(GridFunction(v)) <= 1.0


def test_report_text():
    rep = fn.g_functional(_cos(64), fn.SpaceParams(0.9, 2.0, math.inf), make_ladder(64))
    lines = dict(line.split("=", 1) for line in rep.to_text().splitlines())
    assert lines["functional"] == "g"
    assert lines["q"] == "inf"
    assert float(lines["norm"]) == rep.norm
    assert lines["k_max"] == "5"


def test_evaluate_unknown():
    with pytest.raises(ValueError):
        fn.evaluate("besov", _cos(64), P, make_ladder(64))
