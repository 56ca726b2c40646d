"""Ball-average norm functionals and the square functions behind them.

Every functional is assembled from a :class:`TimeSpaceField` ``F(x, t_k)`` on
a dyadic ladder; ``int_0^1 (.) dt/t`` becomes ``ln 2 * sum_k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from .grid import (
    LN2,
    GridFunction,
    ScaleLadder,
    ball_mean,
    lp_norm,
    torus_distance,
)
from .kernels import FilterBank, apply_filter, ball_difference, build_filter_bank

GSTAR_TRUNCATION = 1e-6

# unit-ball volumes
BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


@dataclass(frozen=True)
class SpaceParams:
    """Smoothness ``alpha``, integrability ``p`` and secondary exponent ``q``."""

    alpha: float
    p: float
    q: float
    r: Optional[float] = None
    lam: Optional[float] = None
    beta: Optional[float] = None
    ell: int = 1

    def __post_init__(self):
        if not (1 < self.p < math.inf):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if not (self.q > 1):
            raise ValueError(f"q must lie in (1, inf], got {self.q}")
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if not (0 < self.alpha < 2 * self.ell):
            raise ValueError(f"alpha must lie in (0, {2 * self.ell}), got {self.alpha}")
        if self.r is not None and not (1 <= self.r <= self.q):
            raise ValueError(f"r must lie in [1, q], got {self.r}")
        if self.lam is not None and not self.lam > 1:
            raise ValueError(f"lambda must exceed 1, got {self.lam}")
        if self.beta is not None and not self.beta >= 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")

    def replace(self, **kw) -> "SpaceParams":
        d = dict(self.__dict__)
        d.update(kw)
        return SpaceParams(**d)


@dataclass(frozen=True)
class TimeSpaceField:
    """Values ``F(x, t_k)``; ``values[i]`` is the grid array for rung ``ladder.ks[i]``."""

    ladder: ScaleLadder
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape[0] != len(self.ladder):
            raise ValueError("one grid array per rung is required")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.ndim - 1

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def rungs(self):
        return zip(self.ladder.ks, self.ladder.scales, self.values)


@dataclass(frozen=True)
class NormReport:
    functional: str
    params: SpaceParams
    field: GridFunction
    norm: float
    base_term: float
    difference_term: float
    ladder: ScaleLadder
    N: int
    flags: Tuple[str, ...] = ()
    extra: Dict = field(default_factory=dict)

    def to_text(self) -> str:
        q = "inf" if math.isinf(self.params.q) else repr(self.params.q)
        lines = [
            f"functional={self.functional}",
            f"alpha={self.params.alpha!r}",
            f"p={self.params.p!r}",
            f"q={q}",
        ]
        for key in ("r", "lam", "beta"):
            value = getattr(self.params, key)
            if value is not None:
                lines.append(f"{key}={value!r}")
        lines += [
            f"ell={self.params.ell}",
            f"N={self.N}",
            f"dim={self.field.dim}",
            f"k_min={self.ladder.k_min}",
            f"k_max={self.ladder.k_max}",
            f"norm={self.norm!r}",
            f"base_term={self.base_term!r}",
            f"difference_term={self.difference_term!r}",
        ]
        for key in sorted(self.extra):
            lines.append(f"{key}={self.extra[key]!r}")
        if self.flags:
            lines.append("flags=" + ",".join(self.flags))
        return "\n".join(lines) + "\n"


# --- square functions on TimeSpaceFields -------------------------------------


def g_square(F: TimeSpaceField, q: float) -> np.ndarray:
    """``(ln2 sum_k |F(x, t_k)|^q)^(1/q)``; the max over rungs when ``q = inf``."""
    a = np.abs(F.values)
    if math.isinf(q):
        return a.max(axis=0)
    return (LN2 * np.sum(a**q, axis=0)) ** (1.0 / q)


def area_square(F: TimeSpaceField, q: float, r: Optional[float] = None, beta: float = 1.0) -> np.ndarray:
    """Lusin-type square function with an inner ``r``-average over ``B(x, beta t_k)``."""
    r = q if r is None else r
    if math.isinf(r):
        raise ValueError("the inner average needs a finite r")
    F.ladder.check_grid(F.N, dilation=beta)
    inner = []
    for _, t, v in F.rungs():
        inner.append(ball_mean(np.abs(v) ** r, beta * t) ** (1.0 / r))
    inner = np.array(inner)
    if math.isinf(q):
        return inner.max(axis=0)
    return (LN2 * np.sum(inner**q, axis=0)) ** (1.0 / q)


@lru_cache(maxsize=64)
def _gstar_kernel_hat(N: int, dim: int, t: float, lam: float) -> np.ndarray:
    d = torus_distance(N, dim)
    w = (t / (t + d)) ** (lam * dim)
    w = np.where(w >= GSTAR_TRUNCATION, w, 0.0)
    w = w * (1.0 / N) ** dim / t**dim
    return np.fft.fftn(w)


def gstar_weight_mass(N: int, dim: int, t: float, lam: float) -> float:
    """``sum_y w_t(x, y) dx^n / t^n`` for the truncated weight."""
    return float(_gstar_kernel_hat(N, dim, t, lam).flat[0].real)


def gstar_square(F: TimeSpaceField, q: float, lam: float) -> np.ndarray:
    """``g*_lambda`` square function with weight ``(t/(t + d(x, y)))^(lambda n)``."""
    if math.isinf(q):
        raise ValueError("the g*_lambda functional needs q in (1, inf)")
    if not lam > 1:
        raise ValueError(f"lambda must exceed 1, got {lam}")
    total = np.zeros(F.values.shape[1:])
    for _, t, v in F.rungs():
        kh = _gstar_kernel_hat(F.N, F.dim, float(t), float(lam))
        conv = np.fft.ifftn(np.fft.fftn(np.abs(v) ** q) * kh).real
        total += np.clip(conv, 0.0, None)
    return (LN2 * total) ** (1.0 / q)


def s_square(F: TimeSpaceField, q: float, beta: float = 1.0) -> np.ndarray:
    """``S_beta(F)``: the area square function with ``r = q``."""
    return area_square(F, q, q, beta)


def gstar_constant(dim: int, q: float, lam: float) -> float:
    """``(2^(lam n) / v_n)^(1/q)``, the pointwise ``S <= C G*`` constant."""
    return (2.0 ** (lam * dim) / BALL_VOLUME[dim]) ** (1.0 / q)


# --- functionals on f ---------------------------------------------------------


def difference_field(f: GridFunction, alpha: float, ladder: ScaleLadder) -> TimeSpaceField:
    """``F(x, t_k) = t_k^-alpha |f - B_{t_k} f|(x)``."""
    ladder.check_grid(f.N)
    rows = [2.0 ** (k * alpha) * np.abs(ball_difference(f, t).values) for k, t in zip(ladder.ks, ladder.scales)]
    return TimeSpaceField(ladder, np.array(rows))


def _report(name, f, params, ladder, field, base, flags=(), extra=None) -> NormReport:
    diff = lp_norm(field, params.p)
    return NormReport(
        name, params, GridFunction(field), base + diff, base, diff, ladder, f.N, tuple(flags), extra or {}
    )


def g_functional(f: GridFunction, params: SpaceParams, ladder: ScaleLadder) -> NormReport:
    """``||f||_p + ||(int t^-aq |f - B_t f|^q dt/t)^(1/q)||_p``."""
    if not params.alpha < 2:
        raise ValueError("the ball-average functional needs alpha in (0, 2)")
    F = difference_field(f, params.alpha, ladder)
    return _report("g", f, params, ladder, g_square(F, params.q), lp_norm(f, params.p))


def area_functional(
    f: GridFunction, params: SpaceParams, ladder: ScaleLadder, r: Optional[float] = None, beta: float = 1.0
) -> NormReport:
    """Lusin-area form with inner ``r``-average over ``B(x, beta t)``; ``r = q`` is the tilde norm."""
    r = params.q if r is None else r
    if math.isinf(r) or not (1 <= r <= params.q):
        raise ValueError(f"r must lie in [1, q] and be finite, got {r}")
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    if not params.alpha < 2:
        raise ValueError("the ball-average functional needs alpha in (0, 2)")
    ladder.check_grid(f.N, dilation=beta)
    F = difference_field(f, params.alpha, ladder)
    name = "area_tilde" if r == params.q else "area"
    return _report(
        name, f, params.replace(r=r, beta=beta), ladder, area_square(F, params.q, r, beta), lp_norm(f, params.p)
    )


def gstar_functional(f: GridFunction, params: SpaceParams, ladder: ScaleLadder, lam: float = 2.0) -> NormReport:
    """``g*_lambda`` form with the smooth weight ``(t/(t + |x - y|))^(lambda n)``."""
    if math.isinf(params.q):
        raise ValueError("the g*_lambda functional requires q in (1, inf)")
    if not params.alpha < 2:
        raise ValueError("the ball-average functional needs alpha in (0, 2)")
    F = difference_field(f, params.alpha, ladder)
    extra = {"weight_mass": [gstar_weight_mass(f.N, f.dim, float(t), lam) for t in ladder.scales]}
    return _report("gstar", f, params.replace(lam=lam), ladder, gstar_square(F, params.q, lam), lp_norm(f, params.p), extra=extra)


def fourier_tl_norm(
    f: GridFunction, params: SpaceParams, ladder: ScaleLadder, bank: Optional[FilterBank] = None
) -> NormReport:
    """Reference norm ``||Phi * f||_p + ||(ln2 sum_k 2^(k a q) |phi_{t_k} * f|^q)^(1/q)||_p``."""
    bank = bank or build_filter_bank()
    ladder.check_grid(f.N)
    rows = [2.0 ** (k * params.alpha) * np.abs(apply_filter(f, bank, int(k)).values) for k in ladder.ks]
    F = TimeSpaceField(ladder, np.array(rows))
    base = lp_norm(apply_filter(f, bank, "base"), params.p)
    return _report("fourier", f, params, ladder, g_square(F, params.q), base, extra={"bank": bank.name})


def _difference_rungs(f: GridFunction, ladder: ScaleLadder, q: float):
    """Per rung: ``avg_{y in B(x,t)} |f(x) - f(y)|^q`` (or the max when ``q = inf``)."""
    from .grid import ball_offsets

    v = f.values
    axes = tuple(range(f.dim))
    out = []
    for t in ladder.scales:
        offsets = ball_offsets(f.N, f.dim, float(t))
        acc = np.zeros_like(v)
        for o in offsets:
            d = np.abs(v - np.roll(v, tuple(-o), axis=axes))
            acc = np.maximum(acc, d) if math.isinf(q) else acc + d**q
        out.append(acc if math.isinf(q) else acc / len(offsets))
    return out


def difference_functional(f: GridFunction, params: SpaceParams, ladder: ScaleLadder) -> NormReport:
    """First-difference comparator ``int t^-aq avg_{B(x,t)} |f(x) - f(y)|^q dt/t``.

    Only an equivalent norm for ``alpha < 1``; larger ``alpha`` is accepted
    with a ``saturation`` flag because the sum then grows with the ladder.
    """
    ladder.check_grid(f.N)
    flags = []
    if params.alpha >= 1:
        flags.append("saturation")
        warnings.warn("first differences saturate at order 1; the value grows with k_max", stacklevel=2)
    rungs = _difference_rungs(f, ladder, params.q)
    if math.isinf(params.q):
        field = np.max([2.0 ** (k * params.alpha) * r for k, r in zip(ladder.ks, rungs)], axis=0)
    else:
        field = (LN2 * sum(2.0 ** (k * params.alpha * params.q) * r for k, r in zip(ladder.ks, rungs))) ** (
            1.0 / params.q
        )
    return _report("difference", f, params, ladder, field, lp_norm(f, params.p), flags)


def tail_check(
    f: GridFunction, params: Optional[SpaceParams] = None, ladder: Optional[ScaleLadder] = None, t: float = 0.25
) -> float:
    """Largest ratio ``|f - B_t f| / (2 M f)`` at the coarsest admissible scale.

    ``B_t`` here is the discrete ball mean, which is one of the maximal
    operator's windows, so the ratio is at most one on every grid.
    """
    from .pointwise import hl_maximal
    from .grid import make_ladder

    ladder = ladder or make_ladder(f.N)
    Mf = hl_maximal(f, ladder, radii=(t,)).Mf.values
    num = np.abs(f.values - ball_mean(f.values, t))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(Mf > 0, num / (2.0 * Mf), 0.0)
    return float(ratio.max())


FUNCTIONALS = ("g", "area", "area_tilde", "gstar", "fourier", "difference")


def evaluate(name: str, f: GridFunction, params: SpaceParams, ladder: ScaleLadder, **kw) -> NormReport:
    """Dispatch by functional tag."""
    if name == "g":
        return g_functional(f, params, ladder)
    if name == "area":
        return area_functional(f, params, ladder, r=kw.get("r", params.r or 1.0), beta=kw.get("beta", params.beta or 1.0))
    if name == "area_tilde":
        return area_functional(f, params, ladder, r=params.q, beta=kw.get("beta", params.beta or 1.0))
    if name == "gstar":
        return gstar_functional(f, params, ladder, lam=kw.get("lam", params.lam or 2.0))
    if name == "fourier":
        return fourier_tl_norm(f, params, ladder, kw.get("bank"))
    if name == "difference":
        return difference_functional(f, params, ladder)
    raise ValueError(f"unknown functional {name!r}; choose from {FUNCTIONALS}")
