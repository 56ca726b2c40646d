"""Sampled functions on the periodic unit torus, FFT plumbing and scale ladders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

LN2 = math.log(2.0)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridFunction:
    """Samples of a real function on the uniform grid of ``[0, 1)^dim``.

    ``values`` has shape ``(N,) * dim``; flattening in C order gives the
    lexicographic sample order used by the GF1 text format.
    """

    values: np.ndarray
    dim: int = field(init=False)
    N: int = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {values.ndim}")
        N = values.shape[0]
        if any(s != N for s in values.shape):
            raise ValueError(f"grid must be square, got shape {values.shape}")
        if not _is_power_of_two(N) or N < 16:
            raise ValueError(f"samples per axis must be a power of two >= 16, got {N}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dim", values.ndim)
        object.__setattr__(self, "N", N)

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @classmethod
    def from_function(cls, func, N: int, dim: int = 1) -> "GridFunction":
        """Evaluate ``func(*coords)`` at the grid nodes."""
        return cls(func(*coordinates(N, dim)))

    @classmethod
    def constant(cls, c: float, N: int, dim: int = 1) -> "GridFunction":
        return cls(np.full((N,) * dim, float(c)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(np.reshape(values, self.values.shape))

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.values + other.values)
        return GridFunction(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.values - other.values)
        return GridFunction(self.values - other)

    def __mul__(self, c):
        return GridFunction(self.values * c)

    __rmul__ = __mul__

    def __abs__(self):
        return GridFunction(np.abs(self.values))


@dataclass(frozen=True)
class SpectralField:
    """DFT coefficients in numpy's FFT index order (no 1/N^n on the forward side)."""

    coefficients: np.ndarray
    dim: int
    N: int

    def at(self, *k: int) -> complex:
        """Coefficient at integer frequency ``k`` (negative indices wrap)."""
        return complex(self.coefficients[tuple(ki % self.N for ki in k)])


def coordinates(N: int, dim: int = 1) -> tuple:
    x = np.arange(N) / N
    if dim == 1:
        return (x,)
    return tuple(np.meshgrid(*([x] * dim), indexing="ij"))


@lru_cache(maxsize=32)
def frequency_magnitude(N: int, dim: int) -> np.ndarray:
    """Euclidean norm of the integer frequency index, in FFT order."""
    k = np.fft.fftfreq(N, d=1.0 / N)
    if dim == 1:
        mag = np.abs(k)
    else:
        grids = np.meshgrid(*([k] * dim), indexing="ij")
        mag = np.sqrt(sum(g**2 for g in grids))
    mag.setflags(write=False)
    return mag


def forward_transform(f: GridFunction) -> SpectralField:
    return SpectralField(np.fft.fftn(f.values), f.dim, f.N)


def inverse_transform(F: SpectralField, real: bool = True):
    values = np.fft.ifftn(F.coefficients)
    if real:
        return GridFunction(values.real)
    return values


def apply_multiplier(f: GridFunction, multiplier: np.ndarray) -> GridFunction:
    """Multiply the spectrum of ``f`` by a real array in FFT order."""
    coeffs = np.fft.fftn(f.values) * multiplier
    return GridFunction(np.fft.ifftn(coeffs).real)


def lp_norm(f: Union[GridFunction, np.ndarray], p: float, dim: Optional[int] = None) -> float:
    """Riemann-sum L^p norm on the probability torus; ``p = inf`` is the max."""
    if isinstance(f, GridFunction):
        values, dim = f.values, f.dim
    else:
        values = np.asarray(f)
        dim = values.ndim if dim is None else dim
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    # scaling by the max keeps large p from overflowing
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((a / top) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class ScaleLadder:
    """Dyadic scales ``t_k = 2^-k`` for ``k_min <= k <= k_max``."""

    k_min: int
    k_max: int

    def __post_init__(self):
        if not (0 <= self.k_min <= self.k_max):
            raise ValueError(f"need 0 <= k_min <= k_max, got {self.k_min}, {self.k_max}")

    weight = LN2

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def scales(self) -> np.ndarray:
        return 2.0 ** (-self.ks.astype(float))

    def __len__(self):
        return self.k_max - self.k_min + 1

    def check_grid(self, N: int, dilation: float = 1.0):
        """Raise unless every rung is resolvable on an ``N`` grid and ``dilation * t <= 1/4``."""
        if 2.0**-self.k_max < 2.0 / N:
            raise ValueError(
                f"finest scale 2^-{self.k_max} is below 2*dx = {2.0 / N} for N={N}"
            )
        if dilation * 2.0**-self.k_min > 0.25:
            raise ValueError(
                f"scale {dilation} * 2^-{self.k_min} exceeds 1/4 of the period"
            )


def make_ladder(N: int, k_min: int = 2, k_max: Optional[int] = None) -> ScaleLadder:
    """Ladder from ``k_min`` down to the finest resolvable scale ``2 dx``."""
    if not _is_power_of_two(N):
        raise ValueError(f"N must be a power of two, got {N}")
    top = int(round(math.log2(N))) - 1
    if k_max is None:
        k_max = top
    if k_min < 2:
        raise ValueError("k_min must be >= 2 so that scales stay below 1/4")
    if k_max > top or k_min > k_max:
        raise ValueError(f"no valid rung between k_min={k_min} and k_max={k_max} for N={N}")
    return ScaleLadder(k_min, k_max)


# --- discrete balls -------------------------------------------------------
# A node y lies in B(x, r) iff the torus distance d(x, y) < r (open ball).


@lru_cache(maxsize=256)
def ball_footprint(N: int, dim: int, radius: float) -> np.ndarray:
    """Boolean stencil of the open discrete ball of ``radius`` (torus units)."""
    r_cells = radius * N
    if r_cells <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if r_cells > N / 2:
        raise ValueError(f"radius {radius} exceeds half the period")
    m = max(int(math.ceil(r_cells)) - 1, 0)
    o = np.arange(-m, m + 1)
    grids = np.meshgrid(*([o] * dim), indexing="ij")
    fp = sum(g**2 for g in grids) < r_cells**2
    fp.setflags(write=False)
    return fp


def ball_offsets(N: int, dim: int, radius: float) -> np.ndarray:
    """Integer offsets (rows) of the open discrete ball, centre included."""
    fp = ball_footprint(N, dim, radius)
    m = fp.shape[0] // 2
    return np.argwhere(fp) - m


def torus_distance(N: int, dim: int) -> np.ndarray:
    """Distance from the origin node to every node, in FFT (wrapped) order."""
    return frequency_magnitude(N, dim) / N


def ball_mean(values: np.ndarray, radius: float) -> np.ndarray:
    """Average over the open discrete ball around every node (direct summation)."""
    from scipy import ndimage

    N, dim = values.shape[0], values.ndim
    fp = ball_footprint(N, dim, radius)
    total = ndimage.correlate(values, fp.astype(float), mode="grid-wrap")
    return total / fp.sum()


def ball_max(values: np.ndarray, radius: float) -> np.ndarray:
    from scipy import ndimage

    fp = ball_footprint(values.shape[0], values.ndim, radius)
    return ndimage.maximum_filter(values, footprint=fp, mode="grid-wrap")


def ball_min(values: np.ndarray, radius: float) -> np.ndarray:
    from scipy import ndimage

    fp = ball_footprint(values.shape[0], values.ndim, radius)
    return ndimage.minimum_filter(values, footprint=fp, mode="grid-wrap")
