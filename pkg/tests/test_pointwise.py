import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballavg import pointwise as pw
from ballavg.functionals import SpaceParams, fourier_tl_norm
from ballavg.grid import GridFunction, ScaleLadder, ball_mean, lp_norm, make_ladder
from ballavg.io import parse_gf1
from ballavg.kernels import a_function
from ballavg.synth import GeneratorSpec, generate, standard_corpus, weierstrass


def _torus(i, j, N):
    return min(abs(i - j), N - abs(i - j))


def _maximal_by_enumeration(v, ladder):
    """Max over windows {x}, the torus, and every ladder-radius ball that contains x."""
    N = v.shape[0]
    a = np.abs(v)
    out = np.maximum(a, a.mean())
    for t in ladder.scales:
        r = t * N
        for c in range(N):
            members = [j for j in range(N) if _torus(c, j, N) < r]
            avg = a[members].mean()
            for x in members:
                out[x] = max(out[x], avg)
    return out


def test_maximal_constant():
    mf = pw.hl_maximal(GridFunction.constant(-2.5, 64), make_ladder(64))
    assert np.allclose(mf.Mf.values, 2.5)


def test_maximal_spike_enumeration():
    v = np.zeros(64)
    v[20] = 5.0
    ladder = make_ladder(64)
    mf = pw.hl_maximal(GridFunction(v), ladder).Mf.values
    assert mf[20] == 5.0
    assert np.allclose(mf, _maximal_by_enumeration(v, ladder), atol=1e-15)
    d = np.array([_torus(i, 20, 64) for i in range(64)])
    order = np.argsort(d, kind="stable")
    assert np.all(np.diff(mf[order]) <= 1e-15)


@given(st.integers(0, 2**31 - 1))
def test_maximal_enumeration_random(seed):
    v = np.random.default_rng(seed).normal(size=32)
    ladder = make_ladder(32)
    assert np.allclose(pw.hl_maximal(GridFunction(v), ladder).Mf.values, _maximal_by_enumeration(v, ladder), atol=1e-14)


@given(st.integers(0, 2**31 - 1), st.floats(-5, 5))
def test_maximal_properties(seed, c):
    r = np.random.default_rng(seed)
    v = r.normal(size=(32, 32))
    ladder = make_ladder(32)
    M = pw.hl_maximal(GridFunction(v), ladder).Mf.values
    assert np.all(M >= np.abs(v))
    for t in ladder.scales:
        assert np.all(M >= ball_mean(np.abs(v), t) * (1 - 1e-12))
    Mc = pw.hl_maximal(GridFunction(c * v), ladder).Mf.values
    assert np.allclose(Mc, abs(c) * M, atol=1e-12)
    bigger = np.abs(v) + r.random(v.shape)
    assert np.all(pw.hl_maximal(GridFunction(bigger), ladder).Mf.values >= M * (1 - 1e-12))


def test_maximal_bounded_on_corpus():
    for spec in standard_corpus(512):
        f = generate(spec)
        mf = pw.hl_maximal(f, make_ladder(512)).Mf
        assert lp_norm(mf, 2) < 5 * lp_norm(f, 2)


def _cos(N=256):
    return GridFunction.from_function(lambda x: np.cos(2 * np.pi * x), N)


@pytest.mark.parametrize("variant", list(pw.Variant))
def test_constant_gives_zero_gradient(variant):
    c = GridFunction.constant(4.0, 128)
    cand = pw.extract_gradient(c, 0.9, make_ladder(128, k_min=3), variant)
    assert np.abs(cand.g.values).max() < 1e-12
    assert cand.violations == 0


def test_sup_point_cosine():
    f = _cos()
    ladder = make_ladder(256)
    cand = pw.extract_gradient(f, 1.0, ladder)
    scalar = max(2.0**k * (1 - math.sin(2 * math.pi * 2.0**-k) / (2 * math.pi * 2.0**-k)) for k in ladder.ks)
    assert np.abs(cand.g.values - np.abs(f.values) * scalar).max() < 1e-12
    assert scalar == pytest.approx(max(2.0**k * a_function(1, 2 * math.pi * 2.0**-k) for k in ladder.ks))


def test_sup_nbhd_matches_brute_force(rng):
    N = 64
    f = GridFunction(rng.normal(size=N))
    ladder = ScaleLadder(3, 5)
    c = 1.5
    cand = pw.extract_gradient(f, 0.8, ladder, pw.Variant.SUP_NBHD, c=c)
    from ballavg.kernels import ball_difference

    expected = np.zeros(N)
    for k, t in zip(ladder.ks, ladder.scales):
        D = t**-0.8 * np.abs(ball_difference(f, t).values)
        for y in range(N):
            near = [D[x] for x in range(N) if _torus(x, y, N) < c * t * N]
            expected[y] = max(expected[y], max(near))
    assert np.allclose(cand.g.values, expected, atol=1e-13)


variants = st.sampled_from(
    [
        (pw.Variant.SUP_POINT, {}),
        (pw.Variant.SUP_NBHD, {"c": 2.0, "C": 1.0}),
        (pw.Variant.BALL_SUP, {"c": 1.0, "C": 2.0}),
        (pw.Variant.BALL_AVG, {"c": 0.5}),
        (pw.Variant.BALL_RAVG, {"r": 3.0}),
        (pw.Variant.POINT_CTR, {"r": 2.0}),
        (pw.Variant.POINT_CTR, {"r": math.inf, "const": 2.0}),
    ]
)


@given(st.integers(0, 2**31 - 1), variants, st.floats(0.1, 1.9))
def test_canonical_gradients_certify(seed, choice, alpha):
    variant, kw = choice
    f = GridFunction(np.random.default_rng(seed).normal(size=64))
    cand = pw.extract_gradient(f, alpha, ScaleLadder(3, 5), variant, **kw)
    assert cand.violations == 0
    assert cand.max_ratio <= 1 + 1e-12
    assert np.all(cand.g.values >= 0)


def test_extraction_guards():
    f = _cos(64)
    with pytest.raises(ValueError):
        pw.extract_gradient(f, 2.5, make_ladder(64))
    with pytest.raises(ValueError):
        pw.extract_gradient(f, 0.5, make_ladder(64), c=0.0)
    with pytest.raises(ValueError):
        pw.extract_gradient(f, 0.5, make_ladder(64), pw.Variant.SUP_POINT, C=2.0)


def test_imported_gradients_are_checked():
    f = generate(weierstrass(0.9, 128, seed=0))
    ladder = make_ladder(128, k_min=3)
    cand = pw.extract_gradient(f, 0.9, ladder, pw.Variant.BALL_AVG)
    ok = pw.import_gradient(f, cand.g, 0.9, ladder, pw.Variant.BALL_AVG)
    assert ok.violations == 0
    bad = pw.import_gradient(f, cand.g * 0.5, 0.9, ladder, pw.Variant.BALL_AVG)
    assert bad.violations > 0 and bad.max_ratio > 1
    with pytest.raises(ValueError):
        pw.import_gradient(f, cand.g * -1.0 - 1.0, 0.9, ladder)


def test_nbhd_implies_dilated_ball_average():
    f = generate(GeneratorSpec("bandlimited", 128, 1, {"kmax": 10, "decay": 2.0, "seed": 4}))
    ladder = make_ladder(128, k_min=3)
    cand = pw.extract_gradient(f, 0.9, ladder, pw.Variant.SUP_NBHD, c=1.0)
    rep = pw.verify_implications(f, cand, ladder)
    grown = [e for e in rep.entries if e.name.startswith("grow:")]
    assert grown and all(not e.skipped for e in grown)
    assert any(e.statement.lhs == "sup" and e.statement.rhs == "avg" and e.statement.c == 2.0 for e in grown)
    assert rep.total_violations == 0


@given(st.integers(0, 2**31 - 1))
def test_holder_chain(seed):
    f = GridFunction(np.random.default_rng(seed).normal(size=128))
    ladder = make_ladder(128, k_min=3)
    cand = pw.extract_gradient(f, 0.9, ladder, pw.Variant.BALL_RAVG, r=2.0)
    rep = pw.verify_implications(f, cand, ladder)
    names = {e.name for e in rep.entries}
    assert {"ravg1->avg", "ravg2->qmaximal2", "ravg1->maximal"} <= names
    assert rep.total_violations == 0


def test_q_average_majorant():
    f = generate(weierstrass(0.4, 128, seed=3))
    ladder = make_ladder(128, k_min=3)
    st_ = pw.Statement("point", "qavg", c=1.0, q=3.0)
    cand = pw.extract_gradient(f, 0.4, ladder, pw.Variant.SUP_NBHD)
    g = cand.g.values
    lhs = pw._rhs(g, ladder, st_)
    M = pw.hl_maximal(GridFunction(g**3), ladder).Mf.values ** (1 / 3)
    assert np.all(lhs <= M * (1 + 1e-12))


def test_dilation_shrink_rule():
    f = generate(weierstrass(0.9, 128, seed=1))
    ladder = make_ladder(128, k_min=4)
    cand = pw.extract_gradient(f, 0.9, ladder, pw.Variant.SUP_NBHD, c=3.0)
    rep = pw.verify_implications(f, cand, ladder)
    assert any(e.name.startswith("shrink:") for e in rep.entries)
    assert rep.total_violations == 0
    assert "violations=0" in rep.to_text()


def test_weierstrass_sup_gradient_bracket():
    ratios = []
    params = SpaceParams(0.9, 2.0, math.inf)
    for N in (512, 1024):
        f = generate(weierstrass(0.9, N, seed=0))
        ladder = make_ladder(N)
        g = pw.extract_gradient(f, 0.9, ladder).g
        ratios.append((lp_norm(f, 2) + lp_norm(g, 2)) / fourier_tl_norm(f, params, ladder).norm)
    assert all(np.isfinite(ratios))
    assert abs(ratios[1] / ratios[0] - 1) < 0.25


# --- Hajlasz ---------------------------------------------------------------------


def test_hajlasz_constant():
    rep = pw.hajlasz_verify(GridFunction.constant(1.0, 64), GridFunction.constant(0.0, 64), 0.5)
    assert rep.violations == 0 and rep.pairs == 64 * 63


def test_hajlasz_lipschitz():
    f = generate(GeneratorSpec("bandlimited", 128, 1, {"modes": [((2,), 0.5, 0.3), ((5,), 0.1, 1.0)]}))
    L = 2 * math.pi * (2 * 0.5 + 5 * 0.1)
    rep = pw.hajlasz_verify(f, GridFunction.constant(L / 2, 128), 1.0)
    assert rep.violations == 0


def test_hajlasz_2d_lipschitz():
    f = generate(GeneratorSpec("bandlimited", 16, 2, {"modes": [((1, 1), 1.0, 0.0)]}))
    L = 2 * math.pi * math.sqrt(2)
    assert pw.hajlasz_verify(f, GridFunction.constant(L / 2, 16, 2), 1.0).violations == 0


def test_hajlasz_certificate():
    f = generate(weierstrass(0.9, 256, seed=0))
    g = pw.hajlasz_certificate(f, 0.9)
    rep = pw.hajlasz_verify(f, g, 0.9)
    assert rep.violations == 0
    assert np.isfinite(lp_norm(g, 2))
    smaller = pw.hajlasz_verify(f, g * 0.9, 0.9)
    assert smaller.violations > 0


def test_hajlasz_limits():
    with pytest.raises(ValueError):
        pw.hajlasz_verify(GridFunction.constant(0.0, 1024), GridFunction.constant(0.0, 1024), 0.5)
    with pytest.raises(ValueError):
        pw.hajlasz_verify(GridFunction.constant(0.0, 64), GridFunction.constant(0.0, 64), 1.5)


def test_candidate_serialization():
    f = _cos(64)
    cand = pw.extract_gradient(f, 0.7, make_ladder(64, k_min=3), pw.Variant.BALL_SUP, c=1.0, C=2.0)
    g, meta = parse_gf1(cand.to_text())
    assert np.array_equal(g.values, cand.g.values)
    assert meta["variant"] == "BALL_SUP" and float(meta["C"]) == 2.0 and float(meta["alpha"]) == 0.7
