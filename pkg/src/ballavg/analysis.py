"""Smoothness-exponent fits and equivalence-ratio studies."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .functionals import SpaceParams, _difference_rungs, evaluate
from .grid import GridFunction, ScaleLadder, lp_norm, make_ladder
from .kernels import ball_difference, build_filter_bank, higher_difference
from .synth import GeneratorSpec, generate

STATISTICS = ("ball", "higher", "difference")
MIN_RUNGS = 4


@dataclass(frozen=True)
class SlopeFit:
    statistic: str
    ks: np.ndarray
    scales: np.ndarray
    values: np.ndarray
    alpha: float
    intercept: float
    residual: float
    flat: bool = False

    def to_text(self) -> str:
        lines = [
            f"statistic={self.statistic}",
            f"flat={self.flat}",
            f"alpha={self.alpha!r}",
            f"residual={self.residual!r}",
            "k  t  value",
        ]
        lines += [f"{int(k)} {float(t)!r} {float(v)!r}" for k, t, v in zip(self.ks, self.scales, self.values)]
        return "\n".join(lines) + "\n"


def _reduce(a: np.ndarray, p: float, mask) -> float:
    if mask is not None:
        a = a[mask]
    return float(np.abs(a).max()) if math.isinf(p) else lp_norm(a, p)


def scale_statistic(
    f: GridFunction, ladder: ScaleLadder, statistic: str = "ball", ell: int = 2, p: float = math.inf, mask=None
) -> np.ndarray:
    """Per-rung size of the chosen difference; sup over nodes unless ``p`` is finite."""
    if statistic == "ball":
        rows = [ball_difference(f, t).values for t in ladder.scales]
    elif statistic == "higher":
        rows = [higher_difference(f, t, ell).values for t in ladder.scales]
    elif statistic == "difference":
        ladder.check_grid(f.N)
        rows = _difference_rungs(f, ladder, 1.0)
    else:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    return np.array([_reduce(r, p, mask) for r in rows])


def estimate_alpha(
    f: GridFunction,
    ladder: ScaleLadder,
    statistic: str = "ball",
    ell: int = 2,
    p: float = math.inf,
    mask=None,
) -> SlopeFit:
    """Least-squares slope of ``log2 stat(t_k)`` against ``-k`` over every rung."""
    if len(ladder) < MIN_RUNGS:
        raise ValueError(f"slope fits need at least {MIN_RUNGS} rungs, got {len(ladder)}")
    vals = scale_statistic(f, ladder, statistic, ell, p, mask)
    ks = ladder.ks
    scale = float(np.abs(f.values).max())
    if scale == 0.0 or vals.max() <= 1e-12 * scale:
        return SlopeFit(statistic, ks, ladder.scales, vals, math.nan, math.nan, 0.0, flat=True)
    if np.any(vals <= 0):
        raise ValueError("statistic vanishes on some rungs but not all; no power law to fit")
    y = np.log2(vals)
    slope, intercept = np.polyfit(-ks.astype(float), y, 1)
    resid = y - (slope * -ks + intercept)
    return SlopeFit(statistic, ks, ladder.scales, vals, float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


# --- equivalence studies -------------------------------------------------------

REFERENCE = "fourier"


def applicable_functionals(params: SpaceParams) -> Tuple[str, ...]:
    names = ["g", "area"]
    if not math.isinf(params.q):
        names += ["area_tilde", "gstar"]
    else:
        names.append("sup_point")
    if params.alpha < 1:
        names.append("difference")
    return tuple(names)


def sup_point_norm(f: GridFunction, params: SpaceParams, ladder: ScaleLadder) -> float:
    """``||f||_p + ||g||_p`` for the canonical SUP_POINT gradient."""
    from .pointwise import Variant, extract_gradient

    g = extract_gradient(f, params.alpha, ladder, Variant.SUP_POINT).g
    return lp_norm(f, params.p) + lp_norm(g, params.p)


@dataclass
class EquivalenceReport:
    corpus: List[GeneratorSpec]
    params: SpaceParams
    resolutions: List[int]
    functionals: Tuple[str, ...]
    norms: Dict[Tuple[str, str, int], float] = field(default_factory=dict)
    excluded: List[str] = field(default_factory=list)

    @property
    def members(self) -> List[str]:
        return [s.label() for s in self.corpus if s.label() not in self.excluded]

    def ratio(self, member: str, a: str, b: str, N: int) -> float:
        return self.norms[(member, a, N)] / self.norms[(member, b, N)]

    def ratio_matrix(self, member: str, N: int) -> np.ndarray:
        names = self.functionals + (REFERENCE,)
        return np.array([[self.ratio(member, a, b, N) for b in names] for a in names])

    def bracket(self, name: str) -> Tuple[float, float]:
        """Min and max of ``name / reference`` over members and resolutions."""
        r = [self.ratio(m, name, REFERENCE, N) for m in self.members for N in self.resolutions]
        return (min(r), max(r)) if r else (math.nan, math.nan)

    def drift(self, name: str) -> float:
        """max over members of ``|ratio(N_last) / ratio(N_first) - 1|``."""
        if len(self.resolutions) < 2 or not self.members:
            return 0.0
        N1, N2 = self.resolutions[0], self.resolutions[-1]
        return max(
            abs(self.ratio(m, name, REFERENCE, N2) / self.ratio(m, name, REFERENCE, N1) - 1.0) for m in self.members
        )

    def all_finite(self) -> bool:
        vals = [self.ratio(m, a, REFERENCE, N) for m in self.members for a in self.functionals for N in self.resolutions]
        return all(math.isfinite(v) and v > 0 for v in vals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["member", "functional", "N", "norm", "ratio_to_fourier"])
        for spec in self.corpus:
            m = spec.label()
            for name in self.functionals + (REFERENCE,):
                for N in self.resolutions:
                    norm = self.norms[(m, name, N)]
                    ratio = "" if m in self.excluded else repr(self.ratio(m, name, REFERENCE, N))
                    w.writerow([m, name, N, repr(norm), ratio])
        return buf.getvalue()

    def to_table(self) -> str:
        cols = [f"N={N}" for N in self.resolutions]
        lines = [f"{'member':<16}{'functional':<18}" + "".join(f"{c:>12}" for c in cols)]
        for m in self.members:
            for name in self.functionals:
                row = "".join(f"{self.ratio(m, name, REFERENCE, N):>12.5f}" for N in self.resolutions)
                lines.append(f"{m:<16}{name:<18}{row}")
        lines.append("")
        lines.append(f"{'functional':<18}{'min':>10}{'max':>10}{'drift':>10}")
        for name in self.functionals:
            lo, hi = self.bracket(name)
            lines.append(f"{name:<18}{lo:>10.4f}{hi:>10.4f}{self.drift(name):>10.4f}")
        for m in self.excluded:
            lines.append(f"excluded (constant): {m}")
        return "\n".join(lines) + "\n"


def _is_constant(f: GridFunction) -> bool:
    v = f.values
    return float(np.ptp(v)) <= 1e-12 * max(1.0, float(np.abs(v).max()))


def equivalence_study(
    corpus: Sequence[GeneratorSpec],
    params: SpaceParams,
    resolutions: Sequence[int],
    functionals: Optional[Sequence[str]] = None,
    k_min: int = 2,
    extra_banks: Sequence[str] = (),
) -> EquivalenceReport:
    """Evaluate every functional on every member and resolution, against ``fourier``."""
    if not corpus:
        raise ValueError("the corpus is empty")
    names = tuple(functionals) if functionals is not None else applicable_functionals(params)
    names = names + tuple(f"fourier_{b}" for b in extra_banks)
    report = EquivalenceReport(list(corpus), params, list(resolutions), names)
    banks = {b: build_filter_bank(b) for b in extra_banks}
    for spec in corpus:
        m = spec.label()
        for N in resolutions:
            f = generate(spec.at_resolution(N))
            if _is_constant(f) and m not in report.excluded:
                report.excluded.append(m)
            ladder = make_ladder(N, k_min)
            for name in names + (REFERENCE,):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    if name == "sup_point":
                        report.norms[(m, name, N)] = sup_point_norm(f, params, ladder)
                        continue
                    if name.startswith("fourier_"):
                        rep = evaluate("fourier", f, params, ladder, bank=banks[name[len("fourier_"):]])
                    else:
                        rep = evaluate(name, f, params, ladder)
                report.norms[(m, name, N)] = rep.norm
    return report
