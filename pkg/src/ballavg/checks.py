"""Invariant suites run by ``ballavg check``.

Each suite returns a :class:`SuiteResult` with the measured quantities; a
suite fails only when one of its invariants is violated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import kernels as K
from .functionals import TimeSpaceField, g_square, gstar_square, gstar_constant, s_square, tail_check
from .grid import GridFunction, lp_norm, make_ladder
from .pointwise import Variant, extract_gradient, hajlasz_certificate, hajlasz_verify, verify_implications
from .synth import GeneratorSpec, analytic_ball_average, generate, weierstrass


@dataclass
class SuiteResult:
    name: str
    passed: bool
    measured: Dict[str, float] = field(default_factory=dict)

    def line(self) -> str:
        parts = " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.measured.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name:<15} {parts}"


def _bandlimited(N: int, dim: int = 1, seed: int = 0) -> GridFunction:
    kmax = min(12, N // 4 - 1)
    return generate(GeneratorSpec("bandlimited", N, dim, {"kmax": kmax, "decay": 1.0, "seed": seed}))


def closed_form_reference(n: int, s: np.ndarray) -> np.ndarray:
    """``sin s / s`` (n = 1) or ``3 (sin s - s cos s) / s^3`` (n = 3), with value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    safe = np.where(s == 0, 1.0, s)
    if n == 1:
        out = np.sin(safe) / safe
    else:
        out = 3.0 * (np.sin(safe) - safe * np.cos(safe)) / safe**3
    return np.where(s == 0, 1.0, out)


def suite_multipliers(trials: int = 1, seed: int = 0) -> SuiteResult:
    s = np.linspace(0.0, 100.0, 20001)
    e1 = np.max(np.abs(K.ball_multiplier_quadrature(1, s) - closed_form_reference(1, s)))
    e3 = np.max(np.abs(K.ball_multiplier_quadrature(3, s) - closed_form_reference(3, s)))
    ea = max(np.max(np.abs(K.a_function(n, s) - (1.0 - K.ball_multiplier(n, s)))) for n in (1, 2, 3))
    bound = max(np.max(np.abs(K.ball_multiplier(n, s))) for n in (1, 2, 3))
    sg = np.arange(1, 401) / 100.0
    ratios = [np.asarray(K.a_function(n, sg)) / sg**2 for n in (1, 2, 3)]
    c1, c2 = min(r.min() for r in ratios), max(r.max() for r in ratios)
    ok = e1 <= 1e-10 and e3 <= 1e-10 and ea <= 1e-12 and bound <= 1 + 1e-12 and c1 > 0 and math.isfinite(c2)
    return SuiteResult("multipliers", ok, {"quad_n1": e1, "quad_n3": e3, "A_vs_1-I": ea, "c1": c1, "c2": c2})


def suite_oracle(trials: int = 1, seed: int = 0) -> SuiteResult:
    specs = [
        weierstrass(1.5, 256, seed=seed),
        weierstrass(0.4, 256, seed=seed + 1),
        GeneratorSpec("bandlimited", 256, 1, {"kmax": 20, "seed": seed}),
        GeneratorSpec("bandlimited", 64, 2, {"kmax": 8, "seed": seed}),
        GeneratorSpec("bandlimited", 32, 3, {"kmax": 4, "seed": seed}),
    ]
    worst = 0.0
    for spec in specs:
        f = generate(spec)
        for t in make_ladder(spec.N).scales:
            worst = max(worst, float(np.abs(analytic_ball_average(spec, t).values - K.apply_ball_average(f, t).values).max()))
    return SuiteResult("oracle", worst <= 1e-10, {"analytic_vs_spectral": worst})


def suite_calderon(trials: int = 1, seed: int = 0) -> SuiteResult:
    """Partition identity, and ``f - B_t f`` rebuilt from filter pieces against the analytic oracle."""
    bank = K.build_filter_bank()
    spec = GeneratorSpec("bandlimited", 256, 1, {"kmax": 40, "decay": 0.5, "seed": seed})
    f = generate(spec)
    worst = 0.0
    for t in make_ladder(256).scales:
        d = K.ball_difference(f, t)
        rebuilt = K.apply_filter(K.apply_filter(d, bank, "base"), bank, "base").values
        for k in K.calderon_rungs(f.N, f.dim):
            rebuilt = rebuilt + K.apply_filter(K.apply_filter(d, bank, k), bank, k).values
        oracle = f.values - analytic_ball_average(spec, t).values
        worst = max(worst, float(np.abs(rebuilt - oracle).max()))
    ok = bank.partition_error <= 1e-10 and worst <= 1e-10
    return SuiteResult("calderon", ok, {"partition": bank.partition_error, "rebuild": worst, "c0": bank.c0})


def suite_reconstruction(trials: int = 1, seed: int = 0) -> SuiteResult:
    """Filter output equals the ``eta`` multiplier applied to ``f - B_t f`` at every rung."""
    worst = 0.0
    for kind in ("standard", "alternate"):
        bank = K.build_filter_bank(kind)
        for dim, N in ((1, 256), (2, 64)):
            f = _bandlimited(N, dim, seed)
            ladder = make_ladder(N)
            scale = float(np.abs(f.values).max())
            for k, t in zip(ladder.ks, ladder.scales):
                lhs = K.apply_filter(f, bank, int(k)).values
                rhs = K.apply_reconstruction(K.ball_difference(f, t), bank, t).values
                worst = max(worst, float(np.abs(lhs - rhs).max()) / scale)
    return SuiteResult("reconstruction", worst <= 1e-8, {"reconstruction": worst})


def suite_squarefn(trials: int = 100, seed: int = 0, lam: float = 2.0) -> SuiteResult:
    """Pointwise ``S <= (2^(lam n)/v_n)^(1/q) G*`` on random fields, plus the measured G*/G constant."""
    rng = np.random.default_rng(seed)
    violations, worst, ratios = 0, 0.0, []
    for i in range(trials):
        dim = 1 + (i % 2)
        q = (1.5, 2.0, 3.0)[i % 3]
        ladder = make_ladder(64)
        shape = (len(ladder),) + (64,) * dim
        F = TimeSpaceField(ladder, rng.random(shape) ** rng.uniform(1.0, 6.0))
        S = s_square(F, q)
        bound = gstar_constant(dim, q, lam) * gstar_square(F, q, lam)
        violations += int(np.sum(S > bound * (1 + 1e-12)))
        worst = max(worst, float((S / bound).max()))
        ratios.append(lp_norm(gstar_square(F, q, lam), 2 * q) / lp_norm(g_square(F, q), 2 * q))
    return SuiteResult(
        "squarefn", violations == 0, {"violations": violations, "worst_ratio": worst, "gstar_over_g_max": max(ratios)}
    )


def suite_chains(trials: int = 1, seed: int = 0) -> SuiteResult:
    N = 128
    ladder = make_ladder(N, k_min=3)
    f = generate(weierstrass(0.9, N, seed=seed))
    total, defining, count = 0, 0, 0
    for variant, kw in (
        (Variant.SUP_POINT, {}),
        (Variant.SUP_NBHD, {"c": 1.0}),
        (Variant.SUP_NBHD, {"c": 2.0}),
        (Variant.BALL_SUP, {}),
        (Variant.BALL_AVG, {}),
        (Variant.BALL_RAVG, {"r": 2.0}),
        (Variant.POINT_CTR, {"r": 3.0}),
        (Variant.POINT_CTR, {"r": math.inf}),
    ):
        cand = extract_gradient(f, 0.9, ladder, variant, **kw)
        defining += cand.violations
        rep = verify_implications(f, cand, ladder)
        total += rep.total_violations
        count += sum(1 for e in rep.entries if not e.skipped)
    return SuiteResult("chains", total == 0 and defining == 0, {"statements": count, "violations": total})


def suite_hajlasz(trials: int = 1, seed: int = 0) -> SuiteResult:
    f = generate(weierstrass(0.9, 256, seed=seed))
    g = hajlasz_certificate(f, 0.9)
    rep = hajlasz_verify(f, g, 0.9)
    return SuiteResult("hajlasz", rep.violations == 0, {"pairs": rep.pairs, "max_ratio": rep.max_ratio})


def suite_maximal(trials: int = 20, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = GridFunction(rng.random(128) ** 4)
        worst = max(worst, tail_check(f))
    return SuiteResult("maximal", worst <= 1.0, {"tail_ratio": worst})


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "multipliers": suite_multipliers,
    "oracle": suite_oracle,
    "calderon": suite_calderon,
    "reconstruction": suite_reconstruction,
    "squarefn": suite_squarefn,
    "chains": suite_chains,
    "hajlasz": suite_hajlasz,
    "maximal": suite_maximal,
}


def run_suites(names: List[str], trials=None, seed: int = 0) -> List[SuiteResult]:
    out = []
    for name in names:
        fn = SUITES[name]
        out.append(fn(seed=seed) if trials is None else fn(trials=trials, seed=seed))
    return out
