"""Test functions with known smoothness and closed-form ball averages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .grid import GridFunction, coordinates, frequency_magnitude
from .kernels import ball_multiplier, ball_multiplier_quadrature

KINDS = ("weierstrass", "bandlimited", "poly_patch", "cusp", "gaussian")

Mode = Tuple[Tuple[int, ...], float, float]  # (wave vector, amplitude, phase)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a sampled test function.

    ``params`` by kind:

    * weierstrass: ``alpha0``, ``K`` (None -> largest with 2^K <= N/4), ``seed``
    * bandlimited: ``modes`` (list of ``(k, amp, phase)``) or ``kmax``, ``decay``, ``seed``
    * poly_patch: ``degree``, ``window`` (half width of the exact patch), ``center``
    * cusp: ``alpha0``, ``center``; mollified at width ``4 dx``
    * gaussian: ``width``, ``center``
    """

    kind: str
    N: int
    dim: int = 1
    params: Dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; choose from {KINDS}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        check = _CHECKS.get(self.kind)
        if check:
            check(self)

    def get(self, key, default=None):
        return self.params.get(key, default)

    def at_resolution(self, N: int) -> "GeneratorSpec":
        return GeneratorSpec(self.kind, N, self.dim, dict(self.params), self.name)

    def label(self) -> str:
        return self.name or self.kind

    def to_text(self) -> str:
        lines = [f"kind={self.kind}", f"N={self.N}", f"dim={self.dim}"]
        if self.name:
            lines.append(f"name={self.name}")
        for key in sorted(self.params):
            value = self.params[key]
            if key == "modes":
                value = ";".join(
                    ",".join(str(c) for c in k) + f":{a!r}:{ph!r}" for k, a, ph in value
                )
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


def _weierstrass_terms(spec: GeneratorSpec) -> int:
    K = spec.get("K")
    if K is None:
        K = int(math.log2(spec.N)) - 2
    return int(K)


def _check_weierstrass(spec: GeneratorSpec):
    a = spec.get("alpha0")
    if a is None or not (0 < a < 2):
        raise ValueError(f"weierstrass requires alpha0 in (0, 2), got {a}")
    K = _weierstrass_terms(spec)
    if K < 1 or 2**K > spec.N // 4:
        raise ValueError(f"weierstrass highest mode 2^{K} must not exceed N/4 = {spec.N // 4}")


def _check_bandlimited(spec: GeneratorSpec):
    limit = spec.N // 4
    if "modes" in spec.params:
        for k, _, _ in spec.params["modes"]:
            if len(k) != spec.dim:
                raise ValueError(f"mode {k} does not match dim={spec.dim}")
            if max(abs(c) for c in k) > limit:
                raise ValueError(f"mode {k} exceeds N/4 = {limit}")
    else:
        kmax = spec.get("kmax", 8)
        if kmax >= limit or kmax < 1:
            raise ValueError(f"kmax must be in [1, N/4), got {kmax}")


def _check_cusp(spec: GeneratorSpec):
    a = spec.get("alpha0")
    if a is None or not (0 < a < 2):
        raise ValueError(f"cusp requires alpha0 in (0, 2), got {a}")


def _check_poly(spec: GeneratorSpec):
    degree = spec.get("degree", 2)
    if degree < 0 or int(degree) != degree:
        raise ValueError(f"degree must be a non-negative integer, got {degree}")
    w = spec.get("window", 0.25)
    if not (0 < w and w + 0.15 < 0.5):
        raise ValueError(f"window half width must lie in (0, 0.35), got {w}")


_CHECKS = {
    "weierstrass": _check_weierstrass,
    "bandlimited": _check_bandlimited,
    "cusp": _check_cusp,
    "poly_patch": _check_poly,
}


def weierstrass(alpha0: float, N: int, K=None, seed: int = 0, dim: int = 1) -> GeneratorSpec:
    return GeneratorSpec(
        "weierstrass", N, dim, {"alpha0": alpha0, "K": K, "seed": seed}, f"weierstrass-{alpha0}"
    )


def single_mode(k: int, N: int, phase: float = 0.0, amp: float = 1.0, dim: int = 1) -> GeneratorSpec:
    vec = (k,) + (0,) * (dim - 1)
    return GeneratorSpec("bandlimited", N, dim, {"modes": [(vec, amp, phase)]}, f"mode-{k}")


def modes(spec: GeneratorSpec) -> List[Mode]:
    """Explicit cosine modes ``amp * cos(2 pi k.x + phase)`` of a trigonometric spec."""
    if spec.kind == "weierstrass":
        K = _weierstrass_terms(spec)
        rng = np.random.default_rng(spec.get("seed", 0))
        phases = rng.uniform(0.0, 2.0 * np.pi, K)
        a = spec.get("alpha0")
        e1 = lambda j: (2**j,) + (0,) * (spec.dim - 1)  # noqa: E731
        return [(e1(j), 2.0 ** (-j * a), float(phases[j - 1])) for j in range(1, K + 1)]
    if spec.kind == "bandlimited":
        if "modes" in spec.params:
            return [(tuple(k), float(a), float(ph)) for k, a, ph in spec.params["modes"]]
        rng = np.random.default_rng(spec.get("seed", 0))
        kmax, decay = spec.get("kmax", 8), spec.get("decay", 2.0)
        out = []
        for k in range(1, kmax + 1):
            direction = rng.integers(-kmax, kmax + 1, size=spec.dim - 1) if spec.dim > 1 else []
            vec = (k,) + tuple(int(np.clip(d, -kmax, kmax)) for d in direction)
            out.append((vec, float(rng.normal() * k ** (-decay)), float(rng.uniform(0, 2 * np.pi))))
        return out
    if spec.kind == "poly_patch" and spec.get("degree", 2) == 0:
        return []
    raise ValueError(f"{spec.kind} has no finite mode expansion")


def _offset(spec: GeneratorSpec) -> float:
    return 1.0 if spec.kind == "poly_patch" and spec.get("degree", 2) == 0 else 0.0


def _sum_modes(spec: GeneratorSpec, scale) -> np.ndarray:
    x = coordinates(spec.N, spec.dim)
    out = np.full((spec.N,) * spec.dim, _offset(spec))
    for k, a, ph in modes(spec):
        phase = 2.0 * np.pi * sum(kc * xc for kc, xc in zip(k, x)) + ph
        out = out + a * scale(k) * np.cos(phase)
    return out


def _plateau(r: np.ndarray, w: float, width: float = 0.1) -> np.ndarray:
    """C-infinity cutoff: 1 for r <= w, 0 for r >= w + width."""
    u = (r - w) / width
    a = np.where(u < 1, np.exp(-1.0 / np.clip(1 - u, 1e-300, None)), 0.0)
    b = np.where(u > 0, np.exp(-1.0 / np.clip(u, 1e-300, None)), 0.0)
    return a / (a + b)


def _torus_offset(x: np.ndarray, c: float) -> np.ndarray:
    return (x - c + 0.5) % 1.0 - 0.5


def generate(spec: GeneratorSpec) -> GridFunction:
    """Sample the function described by ``spec`` at the grid nodes."""
    if spec.kind in ("weierstrass", "bandlimited"):
        return GridFunction(_sum_modes(spec, lambda k: 1.0))
    x = coordinates(spec.N, spec.dim)
    c = spec.get("center", 0.5)
    r = np.sqrt(sum(_torus_offset(xc, c) ** 2 for xc in x))
    if spec.kind == "poly_patch":
        d, w = int(spec.get("degree", 2)), spec.get("window", 0.25)
        if d == 0:
            return GridFunction(np.ones((spec.N,) * spec.dim))
        chi = np.ones_like(r)
        for xc in x:
            chi = chi * _plateau(np.abs(_torus_offset(xc, c)), w)
        poly = _torus_offset(x[0], c) ** d
        return GridFunction(chi * poly + (1.0 - chi) * w**d)
    if spec.kind == "gaussian":
        width = spec.get("width", 0.05)
        return GridFunction(np.exp(-0.5 * (r / width) ** 2))
    # cusp: |x - x0|^alpha0 mollified by a Gaussian of width 4 dx, cut at N/4
    sigma = 4.0 / spec.N
    kmag = frequency_magnitude(spec.N, spec.dim)
    mult = np.exp(-0.5 * (2.0 * np.pi * sigma * kmag) ** 2) * (kmag < spec.N / 4)
    raw = r ** spec.get("alpha0")
    return GridFunction(np.fft.ifftn(np.fft.fftn(raw) * mult).real)


def analytic_ball_average(spec: GeneratorSpec, t: float) -> GridFunction:
    """``B_t f`` by scaling each cosine mode by ``I(2 pi t |k|)`` (no FFT)."""
    profile = ball_multiplier_quadrature if spec.dim == 2 else ball_multiplier

    def scale(k):
        s = 2.0 * np.pi * t * math.sqrt(sum(c * c for c in k))
        return float(np.asarray(profile(spec.dim, np.array([s])))[0])

    return GridFunction(_sum_modes(spec, scale))


def sup_bound(spec: GeneratorSpec) -> float:
    """Declared bound on ``sup |f|`` for trigonometric specs."""
    return _offset(spec) + sum(abs(a) for _, a, _ in modes(spec))


def standard_corpus(N: int) -> List[GeneratorSpec]:
    """Six smooth-to-rough 1D members used by the equivalence studies."""
    return [
        weierstrass(1.5, N, seed=1),
        weierstrass(1.2, N, seed=2),
        GeneratorSpec("bandlimited", N, 1, {"kmax": min(12, N // 4 - 1), "decay": 1.5, "seed": 3}, "bandlimited"),
        GeneratorSpec("gaussian", N, 1, {"width": 0.05, "center": 0.4}, "gaussian"),
        GeneratorSpec("cusp", N, 1, {"alpha0": 1.5, "center": 0.3}, "cusp-1.5"),
        GeneratorSpec("poly_patch", N, 1, {"degree": 2, "window": 0.2, "center": 0.5}, "poly-2"),
    ]


def _parse_value(key: str, raw: str):
    if key == "modes":
        out = []
        for item in filter(None, raw.split(";")):
            k, a, ph = item.split(":")
            out.append((tuple(int(c) for c in k.split(",")), float(a), float(ph)))
        return out
    if raw == "None":
        return None
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def spec_from_text(text: str) -> GeneratorSpec:
    """Inverse of :meth:`GeneratorSpec.to_text`."""
    from .io import parse_kv

    kv = parse_kv(text)
    try:
        kind, N = kv.pop("kind"), int(kv.pop("N"))
    except KeyError as e:
        raise ValueError(f"generator block is missing {e.args[0]!r}") from None
    dim = int(kv.pop("dim", 1))
    name = kv.pop("name", "")
    params = {k: _parse_value(k, v) for k, v in kv.items()}
    return GeneratorSpec(kind, N, dim, params, name)


def read_manifest(text: str) -> List[GeneratorSpec]:
    """Blank-line separated generator blocks; ``#`` lines are comments."""
    blocks, current = [], []
    for line in text.splitlines():
        if line.strip().startswith("#"):
            continue
        if line.strip():
            current.append(line)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return [spec_from_text(b) for b in blocks]


def write_manifest(specs: List[GeneratorSpec]) -> str:
    return "\n".join(s.to_text() for s in specs)
