"""Pointwise (Hajlasz-type) gradients built from ball averages.

A pointwise statement reads ``lhs_k(x) <= const * t_k^alpha * rhs_k(x)`` at
every node and rung, where ``lhs`` is built from ``D_k = |f - B_{C t_k} f|``
and ``rhs`` from a candidate gradient ``g``:

========  ======================================================
lhs       ``point``: D_k(x); ``sup``: max of D_k over B(x, t_k);
          ``ravg``: r-mean of D_k over B(x, t_k)
rhs       ``point``: g(x); ``nbhd``: g(y) for all y in B(x, c t_k);
          ``avg``/``qavg``: (q-)mean of g over B(x, c t_k);
          ``maximal``/``qmaximal``: [M(g^q)(x)]^(1/q)
========  ======================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .grid import GridFunction, ScaleLadder, ball_max, ball_mean, ball_min, torus_distance
from .kernels import ball_difference

# Power-mean and max/mean comparisons are exact in real arithmetic; summation
# order can still flip the last bit, so comparisons carry this relative slack.
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class MaximalField:
    Mf: GridFunction
    radii: Tuple[float, ...]


def hl_maximal(f: GridFunction, ladder: ScaleLadder, radii: Iterable[float] = ()) -> MaximalField:
    """Uncentred discrete maximal function.

    Windows are every discrete ball whose radius is a ladder scale (or one of
    ``radii``) and which contains the node, plus the node itself and the
    whole torus.
    """
    a = np.abs(f.values)
    rs = sorted({float(t) for t in ladder.scales} | {float(r) for r in radii})
    M = np.maximum(a, a.mean())
    for r in rs:
        # best ball of radius r containing x = max of centred means over B(x, r)
        M = np.maximum(M, ball_max(ball_mean(a, r), r))
    return MaximalField(GridFunction(M), tuple(rs))


class Variant(str, Enum):
    SUP_POINT = "SUP_POINT"
    SUP_NBHD = "SUP_NBHD"
    BALL_SUP = "BALL_SUP"
    BALL_AVG = "BALL_AVG"
    BALL_RAVG = "BALL_RAVG"
    POINT_CTR = "POINT_CTR"
    HAJLASZ = "HAJLASZ"


@dataclass(frozen=True)
class Statement:
    lhs: str
    rhs: str
    c: float = 1.0
    C: float = 1.0
    const: float = 1.0
    r: float = 1.0
    q: float = 1.0

    def describe(self) -> str:
        left = {"point": "D(x)", "sup": "sup_B(x,t) D", "ravg": f"mean^{self.r:g}_B(x,t) D"}[self.lhs]
        right = {
            "point": "g(x)",
            "nbhd": f"g(y), y in B(x,{self.c:g}t)",
            "avg": f"mean_B(x,{self.c:g}t) g",
            "qavg": f"mean^{self.q:g}_B(x,{self.c:g}t) g",
            "maximal": "M g(x)",
            "qmaximal": f"M(g^{self.q:g})^(1/{self.q:g})(x)",
        }[self.rhs]
        return f"{left} <= {self.const:g} t^a {right}  [D = |f - B_({self.C:g}t) f|]"


def statement_for(variant: Variant, c: float = 1.0, C: float = 1.0, const: float = 1.0, r: float = 1.0) -> Statement:
    v = Variant(variant)
    if v is Variant.SUP_POINT:
        return Statement("point", "point", c, C, const)
    if v is Variant.SUP_NBHD:
        return Statement("point", "nbhd", c, C, const)
    if v is Variant.BALL_SUP:
        return Statement("sup", "avg", c, C, const)
    if v is Variant.BALL_AVG:
        return Statement("ravg", "avg", c, C, const, r=1.0)
    if v is Variant.BALL_RAVG:
        return Statement("ravg", "avg", c, C, const, r=r)
    if v is Variant.POINT_CTR:
        return Statement("sup", "point", c, C, const) if math.isinf(r) else Statement("ravg", "point", c, C, const, r=r)
    raise ValueError("the Hajlasz variant is not a ball-average statement")


def _check_admissible(f: GridFunction, ladder: ScaleLadder, st: Statement):
    ladder.check_grid(f.N, dilation=max(st.C, 1.0))
    if st.rhs in ("nbhd", "avg", "qavg"):
        ladder.check_grid(f.N, dilation=max(st.c, 1.0))


def _lhs(f: GridFunction, ladder: ScaleLadder, st: Statement) -> np.ndarray:
    rows = []
    for t in ladder.scales:
        D = np.abs(ball_difference(f, st.C * t).values)
        if st.lhs == "point":
            rows.append(D)
        elif st.lhs == "sup":
            rows.append(ball_max(D, t))
        elif st.lhs == "ravg":
            rows.append(ball_mean(D**st.r, t) ** (1.0 / st.r))
        else:
            raise ValueError(f"unknown lhs {st.lhs!r}")
    return np.array(rows)


def _rhs(g: np.ndarray, ladder: ScaleLadder, st: Statement, maximal: Optional[np.ndarray] = None) -> np.ndarray:
    rows = []
    for t in ladder.scales:
        R = st.c * t
        if st.rhs == "point":
            rows.append(g)
        elif st.rhs == "nbhd":
            rows.append(ball_min(g, R))
        elif st.rhs == "avg":
            rows.append(ball_mean(g, R))
        elif st.rhs == "qavg":
            rows.append(ball_mean(g**st.q, R) ** (1.0 / st.q))
        elif st.rhs in ("maximal", "qmaximal"):
            rows.append(maximal)
        else:
            raise ValueError(f"unknown rhs {st.rhs!r}")
    return np.array(rows)


def _count(lhs: np.ndarray, bound: np.ndarray) -> Tuple[int, float]:
    viol = lhs > bound * (1.0 + ROUNDING_SLACK)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(bound > 0, lhs / bound, np.where(lhs > 0, np.inf, 0.0))
    return int(viol.sum()), float(ratio.max()) if ratio.size else 0.0


@dataclass(frozen=True)
class GradientCandidate:
    g: GridFunction
    variant: Variant
    statement: Optional[Statement]
    alpha: float
    violations: int
    checks: int
    max_ratio: float

    def to_text(self) -> str:
        """GF1 block with a ``# key=value`` header describing the certificate."""
        from .io import format_gf1

        header = {"variant": self.variant.value, "alpha": self.alpha, "violations": self.violations}
        if self.statement is not None:
            st = self.statement
            header.update(lhs=st.lhs, rhs=st.rhs, c=st.c, C=st.C, const=st.const, r=st.r, q=st.q)
        return format_gf1(self.g, header)


def _statement_check(f, g, alpha, ladder, st) -> Tuple[int, int, float]:
    lhs = _lhs(f, ladder, st)
    maximal = None
    if st.rhs == "maximal":
        maximal = hl_maximal(GridFunction(g), ladder, radii=st.c * ladder.scales).Mf.values
    elif st.rhs == "qmaximal":
        maximal = hl_maximal(GridFunction(g**st.q), ladder, radii=st.c * ladder.scales).Mf.values ** (1.0 / st.q)
    rhs = _rhs(g, ladder, st, maximal)
    bound = st.const * (ladder.scales ** alpha).reshape((-1,) + (1,) * g.ndim) * rhs
    v, worst = _count(lhs, bound)
    return v, lhs.size, worst


def extract_gradient(
    f: GridFunction,
    alpha: float,
    ladder: ScaleLadder,
    variant=Variant.SUP_POINT,
    c: float = 1.0,
    C: float = 1.0,
    const: float = 1.0,
    r: float = 1.0,
) -> GradientCandidate:
    """Smallest canonical ``g`` for which ``variant``'s inequality holds on the ladder."""
    if not (0 < alpha < 2):
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if min(c, C, const) <= 0:
        raise ValueError("constants must be positive")
    variant = Variant(variant)
    if variant is Variant.HAJLASZ:
        g = hajlasz_certificate(f, alpha)
        rep = hajlasz_verify(f, g, alpha)
        return GradientCandidate(g, variant, None, alpha, rep.violations, rep.pairs, rep.max_ratio)
    st = statement_for(variant, c, C, const, r)
    _check_admissible(f, ladder, st)
    scaled = _lhs(f, ladder, st) * (ladder.scales ** -alpha).reshape((-1,) + (1,) * f.dim) / const
    if st.rhs == "point":
        g = scaled.max(axis=0)
    else:
        # g(y) >= t^-a lhs(x) for every x with d(x, y) < c t
        g = np.max([ball_max(row, c * t) for row, t in zip(scaled, ladder.scales)], axis=0)
    v, n, worst = _statement_check(f, g, alpha, ladder, st)
    return GradientCandidate(GridFunction(g), variant, st, alpha, v, n, worst)


def import_gradient(
    f: GridFunction, g: GridFunction, alpha: float, ladder: ScaleLadder, variant=Variant.SUP_POINT, **constants
) -> GradientCandidate:
    """Wrap an externally supplied ``g`` after checking its defining inequality."""
    if np.any(g.values < 0):
        raise ValueError("a gradient candidate must be non-negative")
    variant = Variant(variant)
    if variant is Variant.HAJLASZ:
        rep = hajlasz_verify(f, g, alpha)
        return GradientCandidate(g, variant, None, alpha, rep.violations, rep.pairs, rep.max_ratio)
    st = statement_for(variant, **constants)
    _check_admissible(f, ladder, st)
    v, n, worst = _statement_check(f, g.values, alpha, ladder, st)
    return GradientCandidate(g, variant, st, alpha, v, n, worst)


# --- implication chains -------------------------------------------------------


@dataclass(frozen=True)
class ImplicationCheck:
    name: str
    statement: Statement
    violations: int
    checks: int
    max_ratio: float
    skipped: bool = False


@dataclass
class ImplicationReport:
    source: Statement
    entries: List[ImplicationCheck] = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(e.violations for e in self.entries)

    def to_text(self) -> str:
        lines = [f"source: {self.source.describe()}"]
        for e in self.entries:
            if e.skipped:
                lines.append(f"{e.name:<28} skipped (dilated scale inadmissible)")
                continue
            lines.append(
                f"{e.name:<28} violations={e.violations:<6d} checks={e.checks:<8d} "
                f"max_ratio={e.max_ratio:.6g}  {e.statement.describe()}"
            )
        return "\n".join(lines) + "\n"


def _weaker_lhs(st: Statement) -> List[Tuple[str, float]]:
    # mean <= r-mean <= sup, and D(x) <= sup since x lies in its own ball
    if st.lhs == "sup":
        return [("sup", 1.0), ("ravg", 2.0), ("ravg", 1.0), ("point", 1.0)]
    if st.lhs == "ravg":
        return [("ravg", r) for r in sorted({st.r, 1.0}, reverse=True)]
    return [("point", 1.0)]


def _stronger_rhs(st: Statement, q: float) -> List[Tuple[str, float]]:
    # inf_B g <= g(x) and inf_B g <= mean_B g <= q-mean_B g <= [M(g^q)]^(1/q)
    if st.rhs == "nbhd":
        return [("nbhd", 1.0), ("point", 1.0), ("avg", 1.0), ("qavg", q), ("maximal", 1.0), ("qmaximal", q)]
    if st.rhs == "point":
        return [("point", 1.0), ("maximal", 1.0)]
    if st.rhs == "avg":
        return [("avg", 1.0), ("qavg", q), ("maximal", 1.0), ("qmaximal", q)]
    if st.rhs == "qavg":
        return [("qavg", st.q), ("qmaximal", st.q)]
    return [(st.rhs, st.q)]


def _tag(st: Statement) -> str:
    left = f"ravg{st.r:g}" if st.lhs == "ravg" else st.lhs
    right = f"{st.rhs}{st.q:g}" if st.rhs in ("qavg", "qmaximal") else st.rhs
    return f"{left}->{right}"


def count_ratio(N: int, dim: int, ladder: ScaleLadder, small: float, big: float) -> float:
    """max_k #B(big t_k) / #B(small t_k) for discrete balls."""
    from .grid import ball_footprint

    return max(
        ball_footprint(N, dim, big * t).sum() / ball_footprint(N, dim, small * t).sum() for t in ladder.scales
    )


def implied_statements(st: Statement, N: int, dim: int, ladder: ScaleLadder, q: float = 2.0):
    """Statements that follow from ``st`` for the same ``g`` by the proofs' elementary steps."""
    out = []

    def add(prefix, base):
        for lhs, r in _weaker_lhs(base):
            for rhs, qq in _stronger_rhs(base, q):
                new = replace(base, lhs=lhs, r=r if lhs == "ravg" else 1.0, rhs=rhs, q=qq if "q" in rhs else 1.0)
                if new != st:
                    out.append((prefix + _tag(new), new))

    add("", st)
    if st.lhs == "point" and st.rhs == "nbhd":
        # y in B(x, t): B(y, c t) lies in B(x, (1 + c) t), so
        # inf_{B(y, ct)} g <= (#big / #small) mean_{B(x, (1+c) t)} g
        ratio = count_ratio(N, dim, ladder, st.c, 1.0 + st.c)
        add("grow:", replace(st, lhs="sup", rhs="avg", c=1.0 + st.c, const=st.const * ratio))
        if st.c > 1:
            # y in B(x, t), z in B(x, (c-1) t) gives d(y, z) < c t
            add("shrink:", replace(st, lhs="sup", c=st.c - 1.0))
    return out


def verify_implications(f: GridFunction, cand: GradientCandidate, ladder: ScaleLadder, q: float = 2.0) -> ImplicationReport:
    """Check every statement implied by ``cand`` at every node and rung."""
    if cand.statement is None:
        raise ValueError("Hajlasz candidates are checked with hajlasz_verify")
    report = ImplicationReport(cand.statement)
    v, n, worst = _statement_check(f, cand.g.values, cand.alpha, ladder, cand.statement)
    report.entries.append(ImplicationCheck("defining", cand.statement, v, n, worst))
    for name, st in implied_statements(cand.statement, f.N, f.dim, ladder, q):
        try:
            _check_admissible(f, ladder, st)
        except ValueError:
            report.entries.append(ImplicationCheck(name, st, 0, 0, 0.0, skipped=True))
            continue
        v, n, worst = _statement_check(f, cand.g.values, cand.alpha, ladder, st)
        report.entries.append(ImplicationCheck(name, st, v, n, worst))
    return report


# --- Hajlasz gradients ----------------------------------------------------------


@dataclass(frozen=True)
class HajlaszReport:
    violations: int
    pairs: int
    max_ratio: float


def _pair_offsets(N: int, dim: int) -> np.ndarray:
    o = np.arange(-(N // 2) + 1, N // 2 + 1)
    grids = np.meshgrid(*([o] * dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    return offs[np.any(offs != 0, axis=1)]


def _hajlasz_limits(f: GridFunction):
    if (f.dim == 1 and f.N > 512) or (f.dim > 1 and f.N > 64):
        raise ValueError("all-pairs check limited to N <= 512 in 1D and N <= 64 per axis otherwise")


def hajlasz_certificate(f: GridFunction, alpha: float) -> GridFunction:
    """``g(x) = sup_y |f(x) - f(y)| / (2 d(x, y)^alpha)``, a certificate by construction."""
    _hajlasz_limits(f)
    v = f.values
    axes = tuple(range(f.dim))
    g = np.zeros_like(v)
    for o in _pair_offsets(f.N, f.dim):
        d = math.sqrt(float(np.sum(np.minimum(np.abs(o), f.N - np.abs(o)) ** 2))) / f.N
        g = np.maximum(g, np.abs(v - np.roll(v, tuple(-o), axis=axes)) / d**alpha)
    return GridFunction(0.5 * g)


def hajlasz_verify(f: GridFunction, g: GridFunction, alpha: float) -> HajlaszReport:
    """Brute-force check of ``|f(x) - f(y)| <= d(x, y)^alpha (g(x) + g(y))`` over all pairs."""
    if not (0 < alpha <= 1):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    _hajlasz_limits(f)
    v, gv = f.values, g.values
    axes = tuple(range(f.dim))
    violations, worst, pairs = 0, 0.0, 0
    for o in _pair_offsets(f.N, f.dim):
        d = math.sqrt(float(np.sum(np.minimum(np.abs(o), f.N - np.abs(o)) ** 2))) / f.N
        ratio = np.abs(v - np.roll(v, tuple(-o), axis=axes)) / d**alpha
        gsum = gv + np.roll(gv, tuple(-o), axis=axes)
        violations += int(np.sum(ratio > gsum))
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(gsum > 0, ratio / gsum, np.where(ratio > 0, np.inf, 0.0))
        worst = max(worst, float(r.max()))
        pairs += v.size
    return HajlaszReport(violations, pairs, worst)


def pair_distance_matrix(N: int, dim: int = 1) -> np.ndarray:
    """Torus distances from the origin node (FFT order); handy for oracles."""
    return torus_distance(N, dim)
