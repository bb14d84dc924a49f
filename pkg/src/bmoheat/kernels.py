"""Closed-form heat kernels for the eight operators and their quadrature action.

The 1-D building block is the Gaussian

    g_t(u) = (4 pi t)^(-1/2) exp(-u^2 / 4t),

and every kernel is a short signed sum of Gaussians in the last coordinate
(direct term u = x_n - y_n, image term u = x_n + y_n), times full-space
Gaussian factors in the remaining coordinates:

==================  =============================================
operator            last-axis factor
==================  =============================================
Delta               g_t(x - y)
DeltaDPlus/Minus    g_t(x - y) - g_t(x + y)        (half domain)
DeltaNPlus/Minus    g_t(x - y) + g_t(x + y)        (half domain)
DeltaD              (g_t(x - y) - g_t(x + y)) H(xy)
DeltaN              (g_t(x - y) + g_t(x + y)) H(xy)
DeltaDN             (g_t(x - y) + (2H(x) - 1) g_t(x + y)) H(xy)
==================  =============================================

with the Heaviside convention H(0) = 1.  The masked operators act
independently on each half line; quadrature treats the interface node as
belonging to the upper half and uses piecewise trapezoid weights so that
probability is conserved at every node.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .grids import Domain, Grid, SampledFunction

SQRT_4PI = math.sqrt(4.0 * math.pi)


class OpTag(enum.Enum):
    Delta = "Delta"
    DeltaDPlus = "DeltaDPlus"
    DeltaNPlus = "DeltaNPlus"
    DeltaDMinus = "DeltaDMinus"
    DeltaNMinus = "DeltaNMinus"
    DeltaD = "DeltaD"
    DeltaN = "DeltaN"
    DeltaDN = "DeltaDN"


_HALF_UPPER = {OpTag.DeltaDPlus, OpTag.DeltaNPlus}
_HALF_LOWER = {OpTag.DeltaDMinus, OpTag.DeltaNMinus}
_GLUED = {OpTag.DeltaD, OpTag.DeltaN, OpTag.DeltaDN}
CONSERVATIVE = (OpTag.Delta, OpTag.DeltaN, OpTag.DeltaNPlus, OpTag.DeltaNMinus)


@dataclass(frozen=True)
class OperatorKind:
    tag: OpTag
    dim: int = 1

    def __post_init__(self):
        if isinstance(self.tag, str):
            object.__setattr__(self, "tag", OpTag(self.tag))
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")

    @property
    def domain(self) -> Domain:
        if self.tag in _HALF_UPPER:
            return Domain.UPPER_HALF
        if self.tag in _HALF_LOWER:
            return Domain.LOWER_HALF
        return Domain.FULL

    @property
    def conservative(self) -> bool:
        return self.tag in CONSERVATIVE

    def __str__(self):
        return f"{self.tag.value}(dim={self.dim})"


@dataclass(frozen=True)
class QuadratureConfig:
    epsilon: float = 1e-12
    depth: int = 0
    rule: str = "trapezoid"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.rule not in ("trapezoid", "midpoint"):
            raise ValueError("rule must be trapezoid or midpoint")


class CoverageError(ValueError):
    """Grid too narrow for the requested time; carries the achieved bound."""

    def __init__(self, needed: float, achieved_tail: float):
        self.needed = needed
        self.achieved_tail = achieved_tail
        super().__init__(
            f"grid margin {needed:.3g} short of the kernel truncation radius; "
            f"achieved tail-mass bound {achieved_tail:.3g}"
        )


def truncation_radius(t: float, epsilon: float) -> float:
    return 2.0 * math.sqrt(t) * math.sqrt(math.log(1.0 / epsilon))


def _gauss(u: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-(u * u) / (4.0 * t)) / (SQRT_4PI * math.sqrt(t))


def _heaviside(u: np.ndarray) -> np.ndarray:
    return np.where(u >= 0.0, 1.0, 0.0)


def _boundary_factor(tag: OpTag, t: float, xn, yn):
    """Last-axis kernel factor, vectorized over xn/yn arrays (literal formulas)."""
    xn = np.asarray(xn, dtype=float)
    yn = np.asarray(yn, dtype=float)
    direct = _gauss(xn - yn, t)
    if tag is OpTag.Delta:
        return direct
    image = _gauss(xn + yn, t)
    if tag in (OpTag.DeltaDPlus, OpTag.DeltaDMinus):
        return direct - image
    if tag in (OpTag.DeltaNPlus, OpTag.DeltaNMinus):
        return direct + image
    mask = _heaviside(xn * yn)
    if tag is OpTag.DeltaD:
        return (direct - image) * mask
    if tag is OpTag.DeltaN:
        return (direct + image) * mask
    if tag is OpTag.DeltaDN:
        sgn = 2.0 * _heaviside(xn) - 1.0
        return (direct + sgn * image) * mask
    raise ValueError(tag)


def _check_point(op: OperatorKind, p) -> tuple[float, ...]:
    p = (float(p),) if np.isscalar(p) else tuple(float(v) for v in p)
    if len(p) != op.dim:
        raise ValueError(f"point {p} has wrong dimension for {op}")
    if op.domain is Domain.UPPER_HALF and p[-1] < 0:
        raise ValueError(f"point {p} outside the upper half domain")
    if op.domain is Domain.LOWER_HALF and p[-1] > 0:
        raise ValueError(f"point {p} outside the lower half domain")
    return p


def eval_heat_kernel(op: OperatorKind, t: float, x, y) -> float:
    """Pointwise kernel value p_t(x, y) from the closed forms above."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = _check_point(op, x)
    y = _check_point(op, y)
    val = float(_boundary_factor(op.tag, t, x[-1], y[-1]))
    for xi, yi in zip(x[:-1], y[:-1]):
        val *= float(_gauss(np.asarray(xi - yi), t))
    return val


def kernel_values(op: OperatorKind, t: float, x: float, z) -> np.ndarray:
    """Row p_t(x, z) on the line, vectorized over the z array."""
    if op.dim != 1:
        raise NotImplementedError("kernel rows are one dimensional")
    if t <= 0:
        raise ValueError("t must be positive")
    z = np.asarray(z, dtype=float)
    return _boundary_factor(op.tag, t, np.full_like(z, float(x)), z)


def qt_kernel_values(op: OperatorKind, t: float, x: float, z) -> np.ndarray:
    """Row of the tLe^{-tL} kernel on the line: each image Gaussian
    g_t(u) picks up the factor (1/2 - u^2/4t)."""
    if op.dim != 1:
        raise NotImplementedError("kernel rows are one dimensional")
    z = np.asarray(z, dtype=float)
    xv = np.full_like(z, float(x))

    def dterm(u):
        return _gauss(u, t) * (0.5 - (u * u) / (4.0 * t))

    tag = op.tag
    direct = dterm(xv - z)
    if tag is OpTag.Delta:
        return direct
    image = dterm(xv + z)
    if tag in (OpTag.DeltaDPlus, OpTag.DeltaDMinus):
        return direct - image
    if tag in (OpTag.DeltaNPlus, OpTag.DeltaNMinus):
        return direct + image
    mask = _heaviside(xv * z)
    if tag is OpTag.DeltaD:
        return (direct - image) * mask
    if tag is OpTag.DeltaN:
        return (direct + image) * mask
    sgn = 2.0 * _heaviside(xv) - 1.0
    return (direct + sgn * image) * mask


def _glued_side_factor(tag: OpTag, t: float, xn: np.ndarray, yn: np.ndarray, side: int) -> np.ndarray:
    """Kernel factor for glued operators with y restricted to one half.

    ``side`` +1 means the upper-half block (y >= 0), -1 the lower.  The mask
    becomes a condition on x alone; the interface column y = 0 takes its
    one-sided limit from the block it belongs to.
    """
    direct = _gauss(xn[:, None] - yn[None, :], t)
    image = _gauss(xn[:, None] + yn[None, :], t)
    if side > 0:
        xmask = (xn >= 0.0).astype(float)[:, None]
    else:
        xmask = (xn < 0.0).astype(float)[:, None]
    if tag is OpTag.DeltaN:
        return (direct + image) * xmask
    if tag is OpTag.DeltaD:
        return (direct - image) * xmask
    if tag is OpTag.DeltaDN:
        sgn = 1.0 if side > 0 else -1.0
        return (direct + sgn * image) * xmask
    raise ValueError(tag)


def _axis_weights(nodes: np.ndarray, h: float, rule: str) -> np.ndarray:
    w = np.full(nodes.shape, h)
    if rule == "trapezoid" and nodes.size > 1:
        w[0] = w[-1] = h / 2
    return w


def _last_axis_blocks(op: OperatorKind, grid: Grid, rule: str):
    """(nodes, weights, side) blocks for last-axis quadrature.

    Glued operators integrate per half with the interface node carried by
    both blocks at half weight; plain operators get one block.
    """
    z = grid.axis(grid.dim - 1)
    h = grid.h
    if op.tag in _GLUED:
        iz = grid.index_of(grid.dim - 1, 0.0)
        upper, lower = z[iz:], z[: iz + 1]
        return [
            (upper, _axis_weights(upper, h, rule), +1, slice(iz, None)),
            (lower, _axis_weights(lower, h, rule), -1, slice(0, iz + 1)),
        ]
    return [(z, _axis_weights(z, h, rule), 0, slice(None))]


def _spacing_warning(t: float, h: float):
    if h > math.sqrt(t) / 4.0:
        warnings.warn(
            f"grid spacing h={h:.3g} coarser than sqrt(t)/4={math.sqrt(t)/4:.3g}; "
            "kernel may be under-resolved",
            RuntimeWarning,
            stacklevel=3,
        )


def _coverage_check(op: OperatorKind, t: float, grid: Grid, out_lo, out_hi, eps: float):
    """Outer grid edges must sit at least one truncation radius beyond the
    output box.  Physical boundaries at 0 carry no tail and are exempt."""
    R = truncation_radius(t, eps)
    worst = 0.0
    for i in range(grid.dim):
        is_last = i == grid.dim - 1
        lo_is_boundary = is_last and grid.domain is Domain.UPPER_HALF
        hi_is_boundary = is_last and grid.domain is Domain.LOWER_HALF
        if not lo_is_boundary:
            worst = max(worst, R - (out_lo[i] - grid.lo[i]))
        if not hi_is_boundary:
            worst = max(worst, R - (grid.hi[i] - out_hi[i]))
    if worst > 1e-9:
        margin = R - worst
        achieved = erfc(max(margin, 0.0) / (2.0 * math.sqrt(t)))
        raise CoverageError(worst, float(achieved))


def _band(nodes: np.ndarray, center_lo: float, center_hi: float, R: float) -> slice:
    i0 = int(np.searchsorted(nodes, center_lo - R))
    i1 = int(np.searchsorted(nodes, center_hi + R, side="right"))
    return slice(max(i0, 0), min(i1, nodes.size))


def _sub_grid(grid: Grid, window) -> Grid:
    if window is None:
        return grid
    lo = []
    hi = []
    for i, (a, b) in enumerate(window):
        ia, ib = grid.index_of(i, a), grid.index_of(i, b)
        if ib <= ia:
            raise ValueError("empty window")
        lo.append(grid.lo[i] + ia * grid.h)
        hi.append(grid.lo[i] + ib * grid.h)
    return Grid(grid.domain, tuple(lo), tuple(hi), grid.h)


def apply_semigroup(
    op: OperatorKind,
    t: float,
    f: SampledFunction,
    q: QuadratureConfig = QuadratureConfig(),
    window=None,
    chunk: int = 512,
) -> SampledFunction:
    """Quadrature action of e^{-tL} on a sampled function.

    Parameters
    ----------
    window : optional list of (lo, hi) per axis restricting the output nodes
        (both must be grid nodes); the returned function lives on that
        sub-grid.  Truncation radius and coverage checks follow the
        configured epsilon.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    grid = f.grid
    if grid.dim != op.dim:
        raise ValueError("operator/function dimension mismatch")
    if op.domain is not grid.domain:
        raise ValueError(f"{op} expects a {op.domain.value} grid")
    _spacing_warning(t, grid.h)
    out_grid = _sub_grid(grid, window)
    _coverage_check(op, t, grid, out_grid.lo, out_grid.hi, q.epsilon)

    R = truncation_radius(t, q.epsilon)
    rule = q.rule
    vals = f.values.astype(complex) if np.iscomplexobj(f.values) else f.values.astype(float)

    if grid.dim == 2:
        # product structure: full Gaussian along axis 0, boundary factor last
        x0_out = out_grid.axis(0)
        y0 = grid.axis(0)
        b0 = _band(y0, x0_out[0], x0_out[-1], R)
        w0 = _axis_weights(y0, grid.h, rule)[b0]
        K0 = _gauss(x0_out[:, None] - y0[None, b0], t) * w0[None, :]
        tmp = K0 @ vals[b0, :]
        out = _apply_last_axis(op, t, tmp, grid, out_grid, R, rule, chunk)
        return SampledFunction(out_grid, out, f.name)

    out = _apply_last_axis(op, t, vals[None, :], grid, out_grid, R, rule, chunk)[0]
    return SampledFunction(out_grid, out, f.name)


def _apply_last_axis(op, t, data, grid, out_grid, R, rule, chunk):
    """Apply the last-axis kernel factor to ``data`` (..., n_last)."""
    xs = out_grid.axis(out_grid.dim - 1)
    n_out = xs.size
    lead = data.shape[0]
    out = np.zeros((lead, n_out), dtype=data.dtype)
    blocks = _last_axis_blocks(op, grid, rule)
    for i0 in range(0, n_out, chunk):
        sl = slice(i0, min(i0 + chunk, n_out))
        x_chunk = xs[sl]
        for nodes, weights, side, nsl in blocks:
            b = _band(nodes, x_chunk[0], x_chunk[-1], R)
            if b.start >= b.stop:
                continue
            yb = nodes[b]
            wb = weights[b]
            if side == 0:
                K = _boundary_factor(op.tag, t, x_chunk[:, None], yb[None, :])
            else:
                K = _glued_side_factor(op.tag, t, x_chunk, yb, side)
            seg = data[:, nsl][:, b]
            out[:, sl] += seg @ (K * wb[None, :]).T
    return out


def _mass_intervals(tag: OpTag, x: float):
    """Signed Gaussian terms (sign, center, lo, hi) whose y-integrals add up
    to the last-axis kernel mass at x."""
    inf = math.inf
    if tag is OpTag.Delta:
        return [(+1.0, x, -inf, inf)]
    if tag in _HALF_UPPER:
        s = +1.0 if tag is OpTag.DeltaNPlus else -1.0
        return [(+1.0, x, 0.0, inf), (s, -x, 0.0, inf)]
    if tag in _HALF_LOWER:
        s = +1.0 if tag is OpTag.DeltaNMinus else -1.0
        return [(+1.0, x, -inf, 0.0), (s, -x, -inf, 0.0)]
    upper = x >= 0.0
    lo, hi = (0.0, inf) if upper else (-inf, 0.0)
    if tag is OpTag.DeltaN:
        s = +1.0
    elif tag is OpTag.DeltaD:
        s = -1.0
    else:
        s = +1.0 if upper else -1.0
    return [(+1.0, x, lo, hi), (s, -x, lo, hi)]


def kernel_mass(op: OperatorKind, t: float, x, grid: Grid | None = None,
                q: QuadratureConfig = QuadratureConfig()) -> float:
    """Quadrature of p_t(x, .) over the domain plus analytic erf tails.

    With no grid supplied the mass is the exact analytic value (the grid
    contribution degenerates to pure tails over the whole line).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = _check_point(op, x)
    mass = 1.0
    for xi in x[:-1]:
        mass *= _axis_mass(OpTag.Delta, t, xi, grid, q)
    mass *= _axis_mass(op.tag, t, x[-1], grid, q)
    return mass


def _axis_mass(tag: OpTag, t: float, x: float, grid: Grid | None, q: QuadratureConfig) -> float:
    terms = _mass_intervals(tag, x)
    if grid is None:
        total = 0.0
        for s, c, lo, hi in terms:
            total += s * _gauss_interval(c, lo, hi, t)
        return total
    z = grid.axis(grid.dim - 1)
    h = grid.h
    total = 0.0
    for s, c, lo, hi in terms:
        a = max(lo, z[0])
        b = min(hi, z[-1])
        sel = (z >= a - 1e-12) & (z <= b + 1e-12)
        yn = z[sel]
        if yn.size >= 2:
            w = _axis_weights(yn, h, q.rule)
            total += s * float(np.sum(w * _gauss(yn - c, t)))
            total += s * _gauss_interval(c, lo, yn[0], t)
            total += s * _gauss_interval(c, yn[-1], hi, t)
        else:
            total += s * _gauss_interval(c, lo, hi, t)
    return total


def _gauss_interval(center: float, lo: float, hi: float, t: float) -> float:
    """Exact integral of g_t(y - center) over [lo, hi]."""
    if hi <= lo:
        return 0.0
    sq = 2.0 * math.sqrt(t)

    def cdf(v):
        if v == math.inf:
            return 1.0
        if v == -math.inf:
            return 0.0
        return 0.5 * erfc(-(v - center) / sq)

    return cdf(hi) - cdf(lo)


def gaussian_bound_ratio(op: OperatorKind, t: float, pairs) -> float:
    """max over pairs of |p_t(x,y)| / (t^{-n/2} e^{-|x-y|^2/4t})."""
    worst = 0.0
    for x, y in pairs:
        xp = _check_point(op, x)
        yp = _check_point(op, y)
        d2 = sum((a - b) ** 2 for a, b in zip(xp, yp))
        denom = t ** (-op.dim / 2.0) * math.exp(-d2 / (4.0 * t))
        worst = max(worst, abs(eval_heat_kernel(op, t, x, y)) / denom)
    return worst


def qt_apply(op: OperatorKind, t: float, f: SampledFunction,
             q: QuadratureConfig = QuadratureConfig(), window=None) -> SampledFunction:
    """Action of tLe^{-tL} through the closed-form time derivative of the
    kernel (dim 1).  Serves as the heat-route reference for multiplier
    synthesis; the kernel of tLe^{-tL} is sum_i s_i g_t(u_i) (1/2 - u_i^2/4t)
    term by term over the image Gaussians."""
    if op.dim != 1:
        raise NotImplementedError("qt_apply is implemented on the line")
    grid = f.grid
    if op.domain is not grid.domain:
        raise ValueError(f"{op} expects a {op.domain.value} grid")
    _spacing_warning(t, grid.h)
    out_grid = _sub_grid(grid, window)
    _coverage_check(op, t, grid, out_grid.lo, out_grid.hi, q.epsilon)
    R = truncation_radius(t, q.epsilon) + 4.0 * math.sqrt(t)

    xs = out_grid.axis(0)
    out = np.zeros(xs.size, dtype=complex if np.iscomplexobj(f.values) else float)
    for nodes, weights, side, nsl in _last_axis_blocks(op, grid, q.rule):
        b = _band(nodes, xs[0], xs[-1], R)
        if b.start >= b.stop:
            continue
        yb = nodes[b]
        wb = weights[b]
        out += (_qt_row(op.tag, t, xs, yb, side) * wb[None, :]) @ f.values[nsl][b]
    return SampledFunction(out_grid, out, f.name)


def _qt_row(tag: OpTag, t: float, xs: np.ndarray, yb: np.ndarray, side: int) -> np.ndarray:
    def dterm(u):
        return _gauss(u, t) * (0.5 - (u * u) / (4.0 * t))

    direct = dterm(xs[:, None] - yb[None, :])
    if tag is OpTag.Delta:
        return direct
    image = dterm(xs[:, None] + yb[None, :])
    if tag in (OpTag.DeltaDPlus, OpTag.DeltaDMinus):
        return direct - image
    if tag in (OpTag.DeltaNPlus, OpTag.DeltaNMinus):
        return direct + image
    if side > 0:
        xmask = (xs >= 0.0).astype(float)[:, None]
        sgn = {OpTag.DeltaN: 1.0, OpTag.DeltaD: -1.0, OpTag.DeltaDN: 1.0}[tag]
    else:
        xmask = (xs < 0.0).astype(float)[:, None]
        sgn = {OpTag.DeltaN: 1.0, OpTag.DeltaD: -1.0, OpTag.DeltaDN: -1.0}[tag]
    return (direct + sgn * image) * xmask
