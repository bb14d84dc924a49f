"""Uniform grids, sampled functions, reflections, and cube families.

Everything downstream works on tensor-product grids in dimension 1 or 2.
The last axis is the distinguished one: half domains split there, and the
splitting hyperplane must land on a node layer so that restriction and the
even/odd reflections are loss-free.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

NODE_TOL = 1e-9


class Domain(enum.Enum):
    FULL = "Full"
    UPPER_HALF = "UpperHalf"
    LOWER_HALF = "LowerHalf"


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid with spacing ``h`` shared by all axes.

    ``lo`` and ``hi`` are inclusive node bounds per axis; (hi - lo)/h must be
    an integer.  For half domains the boundary 0 is a node of the last axis.
    """

    domain: Domain
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    h: float

    def __post_init__(self):
        if not isinstance(self.lo, tuple):
            object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        if not isinstance(self.hi, tuple):
            object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise GridError("lo/hi dimension mismatch")
        if len(self.lo) not in (1, 2):
            raise GridError("only dim 1 and 2 are supported")
        if self.h <= 0:
            raise GridError("h must be positive")
        for a, b in zip(self.lo, self.hi):
            if b <= a:
                raise GridError("hi must exceed lo on every axis")
            n = (b - a) / self.h
            if abs(n - round(n)) > NODE_TOL * max(1.0, n):
                raise GridError(f"span ({a}, {b}) is not an integer multiple of h={self.h}")
        zlo, zhi = self.lo[-1], self.hi[-1]
        if self.domain is Domain.UPPER_HALF and abs(zlo) > NODE_TOL:
            raise GridError("UpperHalf grid must start at 0 on the last axis")
        if self.domain is Domain.LOWER_HALF and abs(zhi) > NODE_TOL:
            raise GridError("LowerHalf grid must end at 0 on the last axis")
        if self.domain is Domain.FULL and zlo < -NODE_TOL < NODE_TOL < zhi:
            k = -zlo / self.h
            if abs(k - round(k)) > NODE_TOL * max(1.0, abs(k)):
                raise GridError("a Full grid straddling 0 must have a node layer at 0")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(round((b - a) / self.h)) + 1 for a, b in zip(self.lo, self.hi))

    def axis(self, i: int) -> np.ndarray:
        n = self.shape[i]
        return self.lo[i] + self.h * np.arange(n)

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis(i) for i in range(self.dim))

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def index_of(self, i: int, value: float) -> int:
        """Index of the node equal to ``value`` on axis ``i`` (must exist)."""
        k = (value - self.lo[i]) / self.h
        ki = int(round(k))
        if abs(k - ki) > 1e-6 or not 0 <= ki < self.shape[i]:
            raise GridError(f"{value} is not a node of axis {i}")
        return ki


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise GridError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.grid.dim


def make_grid(domain: Domain, lo, hi, h: float) -> Grid:
    lo = (lo,) if np.isscalar(lo) else tuple(lo)
    hi = (hi,) if np.isscalar(hi) else tuple(hi)
    return Grid(domain, lo, hi, float(h))


def sample(spec, grid: Grid, name: str | None = None) -> SampledFunction:
    """Sample a closed-form descriptor on a grid.

    ``spec`` is anything with ``evaluate(coords, h) -> ndarray`` where
    ``coords`` is the meshgrid list; the catalog module provides descriptors.
    """
    vals = spec.evaluate(grid.meshgrid(), grid.h)
    return SampledFunction(grid, np.asarray(vals, dtype=vals.dtype), name or getattr(spec, "name", ""))


def _half_slices(grid: Grid, half: Domain):
    iz = grid.index_of(grid.dim - 1, 0.0)
    if half is Domain.UPPER_HALF:
        return iz, slice(iz, None)
    if half is Domain.LOWER_HALF:
        return iz, slice(0, iz + 1)
    raise GridError("restrict target must be a half domain")


def restrict(f: SampledFunction, half: Domain) -> SampledFunction:
    """Restrict a full-domain function to a half domain (boundary node kept)."""
    g = f.grid
    if g.domain is not Domain.FULL:
        raise GridError("restrict expects a Full-domain function")
    _, sl = _half_slices(g, half)
    if half is Domain.UPPER_HALF:
        sub = Grid(half, g.lo[:-1] + (0.0,), g.hi, g.h)
    else:
        sub = Grid(half, g.lo, g.hi[:-1] + (0.0,), g.h)
    idx = (slice(None),) * (g.dim - 1) + (sl,)
    return SampledFunction(sub, f.values[idx], f.name)


def _extend(f: SampledFunction, sign: int, zero_lower: bool = False) -> SampledFunction:
    g = f.grid
    if g.domain is not Domain.UPPER_HALF:
        raise GridError("extension expects an UpperHalf function")
    full = Grid(Domain.FULL, g.lo[:-1] + (-g.hi[-1],), g.hi, g.h)
    n = g.shape[-1]
    out_shape = g.shape[:-1] + (2 * n - 1,)
    out = np.zeros(out_shape, dtype=f.values.dtype)
    idx_up = (slice(None),) * (g.dim - 1) + (slice(n - 1, None),)
    idx_dn = (slice(None),) * (g.dim - 1) + (slice(0, n - 1),)
    flipped = np.flip(f.values, axis=g.dim - 1)
    take_tail = (slice(None),) * (g.dim - 1) + (slice(0, n - 1),)
    out[idx_up] = f.values
    if not zero_lower:
        out[idx_dn] = sign * flipped[take_tail]
    if sign < 0 and not zero_lower:
        # odd extension stores 0 on the interface node layer
        idx0 = (slice(None),) * (g.dim - 1) + (n - 1,)
        out[idx0] = 0.0
    return SampledFunction(full, out, f.name)


def even_extension(f: SampledFunction) -> SampledFunction:
    return _extend(f, +1)


def odd_extension(f: SampledFunction) -> SampledFunction:
    return _extend(f, -1)


def zero_extension(f: SampledFunction) -> SampledFunction:
    return _extend(f, +1, zero_lower=True)


def reflect(f: SampledFunction) -> SampledFunction:
    """Mirror a LowerHalf function onto the UpperHalf (last axis flipped)."""
    g = f.grid
    if g.domain is not Domain.LOWER_HALF:
        raise GridError("reflect expects a LowerHalf function")
    up = Grid(Domain.UPPER_HALF, g.lo[:-1] + (0.0,), g.hi[:-1] + (-g.lo[-1],), g.h)
    return SampledFunction(up, np.flip(f.values, axis=g.dim - 1), f.name)


@dataclass(frozen=True)
class CubeSpec:
    center: tuple[float, ...]
    side: float

    def bounds(self) -> tuple[tuple[float, float], ...]:
        r = self.side / 2
        return tuple((c - r, c + r) for c in self.center)


@dataclass(frozen=True)
class CubeFamily:
    """Dyadic-scale cube family over a window box.

    ``scales`` are cube sides, stored largest first; centers sit on a lattice
    of step ``step_factor * side`` inside the window.
    """

    scales: tuple[float, ...]
    window_lo: tuple[float, ...]
    window_hi: tuple[float, ...]
    step_factor: float = 0.5

    def __post_init__(self):
        if not self.scales:
            raise GridError("empty scale list")
        object.__setattr__(self, "scales", tuple(sorted(set(float(s) for s in self.scales), reverse=True)))
        if any(s <= 0 for s in self.scales):
            raise GridError("scales must be positive")
        if self.step_factor <= 0:
            raise GridError("step factor must be positive")
        object.__setattr__(self, "window_lo", tuple(float(v) for v in self.window_lo))
        object.__setattr__(self, "window_hi", tuple(float(v) for v in self.window_hi))


def dyadic_scales(k_max: int, top: float = 1.0) -> tuple[float, ...]:
    """Sides top, top/2, ..., top/2^k_max."""
    return tuple(top * 0.5**k for k in range(k_max + 1))


def _axis_centers(lo: float, hi: float, side: float, step: float) -> np.ndarray:
    span = hi - lo
    if span < side - NODE_TOL:
        return np.empty(0)
    count = int(math.floor((span - side) / step + NODE_TOL)) + 1
    return lo + side / 2 + step * np.arange(count)


def dyadic_cubes(family: CubeFamily, domain: Domain = Domain.FULL) -> list[CubeSpec]:
    """Enumerate cubes scale by scale, centers lexicographic; cubes that would
    leave the domain (for half domains) are dropped."""
    dim = len(family.window_lo)
    out: list[CubeSpec] = []
    for s in family.scales:
        step = family.step_factor * s
        per_axis = []
        for i in range(dim):
            lo, hi = family.window_lo[i], family.window_hi[i]
            if i == dim - 1 and domain is Domain.UPPER_HALF:
                lo = max(lo, 0.0)
            if i == dim - 1 and domain is Domain.LOWER_HALF:
                hi = min(hi, 0.0)
            per_axis.append(_axis_centers(lo, hi, s, step))
        if any(c.size == 0 for c in per_axis):
            continue
        if dim == 1:
            for c in per_axis[0]:
                out.append(CubeSpec((float(c),), s))
        else:
            for c0 in per_axis[0]:
                for c1 in per_axis[1]:
                    out.append(CubeSpec((float(c0), float(c1)), s))
    return out
