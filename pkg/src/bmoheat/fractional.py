"""Negative fractional powers L^{-alpha/2} on the line.

Three routes to the same object: the closed-form image-sum kernels, the
log-substituted time integral of the heat kernel (with analytic Gamma-tail
corrections), and singular-cell quadrature for applying the kernels to
sampled data.  On each grid cell the power kernel |y - x|^{alpha-1} is
integrated exactly against a piecewise-linear interpolant of the data, so
the singularity never meets a quadrature node.

The module also carries the smoothing difference kernel of
(I - e^{-tL}) L^{-alpha/2} and the slowly divergent example function whose
fractional power has bounded adapted oscillation but unbounded classical
oscillation near the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma_fn
from scipy.special import gammainc

from .catalog import get_function
from .grids import CubeFamily, Domain, SampledFunction, dyadic_scales, make_grid
from .kernels import (
    OperatorKind,
    OpTag,
    QuadratureConfig,
    kernel_values,
    truncation_radius,
)

_GLUED = (OpTag.DeltaD, OpTag.DeltaN, OpTag.DeltaDN)


def gamma_alpha_closed(alpha: float) -> float:
    """Normalizer with k_Delta(x, y) = |x-y|^{alpha-1} / gamma_alpha.

    Substituting s = |x-y|^2/(4t) in the time integral gives
    2^alpha sqrt(pi) Gamma(alpha/2) / Gamma((1-alpha)/2).
    """
    return 2.0 ** alpha * math.sqrt(math.pi) * _gamma_fn(alpha / 2.0) / _gamma_fn((1.0 - alpha) / 2.0)


@dataclass(frozen=True)
class FracParams:
    alpha: float
    gamma_alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1) on the line")
        if self.gamma_alpha <= 0.0:
            raise ValueError("gamma_alpha must be positive")


def frac_params(alpha: float) -> FracParams:
    return FracParams(alpha=alpha, gamma_alpha=gamma_alpha_closed(alpha))


def _image_terms(tag: OpTag, x: float, y: float):
    """Signed separations [(coef, |u|)] entering the kernel at (x, y).

    Empty when the Heaviside mask of a glued operator kills the pair.
    """
    d = abs(x - y)
    s = abs(x + y)
    if tag is OpTag.Delta:
        return [(1.0, d)]
    if tag in (OpTag.DeltaDPlus, OpTag.DeltaDMinus):
        return [(1.0, d), (-1.0, s)]
    if tag in (OpTag.DeltaNPlus, OpTag.DeltaNMinus):
        return [(1.0, d), (1.0, s)]
    if x * y < 0.0:
        return []
    if tag is OpTag.DeltaD:
        return [(1.0, d), (-1.0, s)]
    if tag is OpTag.DeltaN:
        return [(1.0, d), (1.0, s)]
    if tag is OpTag.DeltaDN:
        return [(1.0, d), (1.0 if x >= 0.0 else -1.0, s)]
    raise ValueError(tag)


def frac_kernel(op: OperatorKind, p: FracParams, x: float, y: float) -> float:
    """Closed-form kernel of L^{-alpha/2} at a point pair on the line."""
    if op.dim != 1:
        raise NotImplementedError("fractional kernels are one dimensional")
    terms = _image_terms(op.tag, x, y)
    out = 0.0
    for c, d in terms:
        if d == 0.0:
            raise ValueError("fractional kernel is singular at coincident points")
        out += c * d ** (p.alpha - 1.0)
    return out / p.gamma_alpha


def _power_time_integral(alpha: float, d: float, u_lo: float, u_hi: float, n: int) -> float:
    """(1/Gamma(alpha/2)) int t^{alpha/2-1} g_t(d) dt by log-time trapezoid
    plus exact incomplete-Gamma corrections for both tails."""
    a_tail = (1.0 - alpha) / 2.0
    s = d * d / 4.0
    pref = s ** ((alpha - 1.0) / 2.0) / math.sqrt(4.0 * math.pi) \
        * _gamma_fn(a_tail) / _gamma_fn(alpha / 2.0)
    u = np.linspace(u_lo, u_hi, n)
    t = np.exp(u)
    integrand = t ** (alpha / 2.0) / np.sqrt(4.0 * math.pi * t) * np.exp(-s / t) \
        / _gamma_fn(alpha / 2.0)
    mid = float(np.trapezoid(integrand, u))
    right = pref * float(gammainc(a_tail, s * math.exp(-u_hi)))
    left = pref * (1.0 - float(gammainc(a_tail, s * math.exp(-u_lo))))
    return mid + left + right


def frac_kernel_time_integral(op: OperatorKind, alpha: float, x: float, y: float,
                              u_lo: float = -40.0, u_hi: float = 40.0,
                              n: int = 4000) -> float:
    """Kernel of L^{-alpha/2} by the time-integral definition; no closed-form
    normalizer enters, so this is the reference the normalizer is fitted to."""
    if op.dim != 1:
        raise NotImplementedError("fractional kernels are one dimensional")
    out = 0.0
    for c, d in _image_terms(op.tag, x, y):
        if d == 0.0:
            raise ValueError("fractional kernel is singular at coincident points")
        out += c * _power_time_integral(alpha, d, u_lo, u_hi, n)
    return out


def fit_gamma(alpha: float, x: float = 1.0, y: float = 2.0, **kw) -> float:
    """Normalizer obtained by matching the closed form to the time integral
    at a reference pair for the glued Neumann operator."""
    ref = frac_kernel_time_integral(OperatorKind(OpTag.DeltaN), alpha, x, y, **kw)
    ideal = abs(x - y) ** (alpha - 1.0) + abs(x + y) ** (alpha - 1.0)
    return ideal / ref


def singular_weights(targets, nodes, alpha: float) -> np.ndarray:
    """Quadrature matrix W with (W @ data)[i] = int data_lin(y) |y - x_i|^{alpha-1} dy.

    ``nodes`` is any increasing array (uniform or graded).  Near the target
    the power kernel is integrated in closed form against the linear
    interpolant of the data, which keeps the weights finite when a target
    sits on or between nodes.  Cells far from the target switch to a
    midpoint Taylor expansion of the kernel: the closed-form incomplete
    powers cancel catastrophically there (the difference shrinks like
    cell/distance), and the expansion is accurate to (cell/distance)^4.
    """
    x = np.asarray(targets, dtype=float).reshape(-1)
    yn = np.asarray(nodes, dtype=float)
    if yn.ndim != 1 or yn.size < 2 or np.any(np.diff(yn) <= 0):
        raise ValueError("nodes must be a strictly increasing 1-d array")
    a = yn[None, :-1] - x[:, None]
    b = yn[None, 1:] - x[:, None]
    dy = np.diff(yn)[None, :]
    mid = 0.5 * (a + b)
    far = (a * b > 0.0) & (np.abs(mid) >= 10.0 * dy)

    with np.errstate(divide="ignore", invalid="ignore"):
        p0 = (np.sign(b) * np.abs(b) ** alpha - np.sign(a) * np.abs(a) ** alpha) / alpha
        p1 = (np.abs(b) ** (alpha + 1.0) - np.abs(a) ** (alpha + 1.0)) / (alpha + 1.0)
        w_lo = (b * p0 - p1) / dy
        w_hi = (p1 - a * p0) / dy

        am = np.abs(np.where(far, mid, 1.0))
        sg = np.sign(mid)
        k0 = am ** (alpha - 1.0)
        k1 = (alpha - 1.0) * sg * am ** (alpha - 2.0)
        k2 = (alpha - 1.0) * (alpha - 2.0) * am ** (alpha - 3.0)
        k3 = (alpha - 1.0) * (alpha - 2.0) * (alpha - 3.0) * sg * am ** (alpha - 4.0)
        even = 0.5 * dy * k0 + dy ** 3 / 48.0 * k2
        odd = dy ** 2 / 12.0 * k1 + dy ** 4 / 480.0 * k3
        w_lo = np.where(far, even - odd, w_lo)
        w_hi = np.where(far, even + odd, w_hi)

    w = np.zeros((x.size, yn.size))
    w[:, :-1] += w_lo
    w[:, 1:] += w_hi
    return w


def riesz_potential(f: SampledFunction, p: FracParams,
                    q: QuadratureConfig | None = None, chunk: int = 512) -> SampledFunction:
    """Unnormalized fractional integral int f(y)|x - y|^{alpha-1} dy on f's grid.

    The kernel of Delta^{-alpha/2} is this integral divided by gamma_alpha.
    """
    if f.grid.dim != 1:
        raise NotImplementedError("riesz_potential is one dimensional")
    nodes = f.grid.axis(0)
    out = np.empty_like(nodes)
    for i0 in range(0, nodes.size, chunk):
        block = nodes[i0:i0 + chunk]
        out[i0:i0 + chunk] = singular_weights(block, nodes, p.alpha) @ f.values
    return SampledFunction(f.grid, out, name=f.name and f"riesz[{f.name}]")


def apply_frac_power(op: OperatorKind, p: FracParams, f: SampledFunction,
                     q: QuadratureConfig | None = None, chunk: int = 512) -> SampledFunction:
    """L^{-alpha/2} f on f's grid by singular-cell quadrature with the image
    terms and Heaviside masks of the chosen operator."""
    if op.dim != 1 or f.grid.dim != 1:
        raise NotImplementedError("apply_frac_power is one dimensional")
    if op.domain is not f.grid.domain:
        raise ValueError(f"function domain {f.grid.domain} does not match {op}")
    xs = f.grid.axis(0)
    vals = f.values
    out = np.zeros_like(vals, dtype=float)
    tag = op.tag

    def accumulate(t_idx, nodes, data, img_sign):
        tgt = xs[t_idx]
        for i0 in range(0, tgt.size, chunk):
            blk = slice(i0, i0 + chunk)
            w = singular_weights(tgt[blk], nodes, p.alpha)
            if img_sign != 0.0:
                w = w + img_sign * singular_weights(-tgt[blk], nodes, p.alpha)
            out[t_idx[0] + i0:t_idx[0] + i0 + tgt[blk].size] = w @ data

    if tag is OpTag.Delta:
        accumulate(np.arange(xs.size), xs, vals, 0.0)
    elif tag in (OpTag.DeltaDPlus, OpTag.DeltaDMinus, OpTag.DeltaNPlus, OpTag.DeltaNMinus):
        sgn = 1.0 if tag in (OpTag.DeltaNPlus, OpTag.DeltaNMinus) else -1.0
        accumulate(np.arange(xs.size), xs, vals, sgn)
    else:
        iz = f.grid.index_of(0, 0.0)
        up_sign = -1.0 if tag is OpTag.DeltaD else 1.0
        lo_sign = 1.0 if tag is OpTag.DeltaN else -1.0
        accumulate(np.arange(iz, xs.size), xs[iz:], vals[iz:], up_sign)
        accumulate(np.arange(0, iz), xs[:iz + 1], vals[:iz + 1], lo_sign)
    return SampledFunction(f.grid, out / p.gamma_alpha,
                           name=f.name and f"frac[{f.name}]")


def _merge_bands(centers, radius: float, h: float, lo=None, hi=None) -> np.ndarray:
    """Union of uniform node bands around each center, sorted, deduplicated,
    optionally clipped to [lo, hi]."""
    pieces = []
    for c in centers:
        a, b = c - radius, c + radius
        if lo is not None:
            a = max(a, lo)
        if hi is not None:
            b = min(b, hi)
        if b > a:
            pieces.append(np.arange(a, b + h / 2, h))
    z = np.sort(np.concatenate(pieces))
    keep = np.concatenate(([True], np.diff(z) > 1e-6 * h))
    return z[keep]


def difference_kernel(op: OperatorKind, p: FracParams, t: float,
                      x: float, y: float, eps: float = 1e-12,
                      refine: int = 16) -> float:
    """Kernel of (I - e^{-tL}) L^{-alpha/2} at (x, y).

    The smoothed part int p_t(x,z) k_alpha(z,y) dz is quadratured with the
    power factor integrated exactly per cell (targets y and -y) and the heat
    row as data, on node bands covering both the Gaussian support around x
    and the singular point y.
    """
    if op.dim != 1:
        raise NotImplementedError("difference_kernel is one dimensional")
    if x == y:
        raise ValueError("difference kernel is singular at coincident points")
    tag = op.tag
    if tag in _GLUED and x * y < 0.0:
        return 0.0
    direct = frac_kernel(op, p, x, y)

    R = truncation_radius(t, eps)
    h = math.sqrt(t) / refine
    lo = hi = None
    if op.domain is Domain.UPPER_HALF or (tag in _GLUED and (x > 0.0 or (x == 0.0 and y >= 0.0))):
        lo = 0.0
    elif op.domain is Domain.LOWER_HALF or (tag in _GLUED and x < 0.0):
        hi = 0.0
    z = _merge_bands((x, y), R, h, lo, hi)
    data = kernel_values(op, t, x, z)

    w = singular_weights([y], z, p.alpha)[0]
    img = 0.0
    if tag is not OpTag.Delta:
        sgn = {OpTag.DeltaDPlus: -1.0, OpTag.DeltaDMinus: -1.0,
               OpTag.DeltaNPlus: 1.0, OpTag.DeltaNMinus: 1.0,
               OpTag.DeltaD: -1.0, OpTag.DeltaN: 1.0}.get(tag)
        if sgn is None:
            sgn = 1.0 if y >= 0.0 else -1.0
        img = sgn * float(singular_weights([-y], z, p.alpha)[0] @ data)
    smoothed = (float(w @ data) + img) / p.gamma_alpha
    return direct - smoothed


def difference_decay_table(op: OperatorKind, p: FracParams, t: float,
                      ratios=(2.0, 4.0, 8.0, 16.0, 32.0),
                      x0: float | None = None) -> list[dict]:
    """|K_{alpha,t}| / (t d^{alpha-3}) at separations d = nu sqrt(t).

    For half or glued operators the base point sits one sqrt(t) inside the
    upper half so every pair stays on one side.
    """
    rows = []
    base = x0 if x0 is not None else (0.0 if op.tag is OpTag.Delta else math.sqrt(t))
    for nu in ratios:
        d = nu * math.sqrt(t)
        val = difference_kernel(op, p, t, base, base + d)
        rows.append({"ratio": nu, "separation": d,
                     "kernel": val, "bound_ratio": abs(val) / (t * d ** (p.alpha - 3.0))})
    return rows


# ---------------------------------------------------------------------------
# the slowly divergent example


def counterexample_f(alpha: float):
    """Descriptor of f(x) = -1/(x^alpha log x) on (0, 1/2]."""
    return get_function("counterexample", alpha=alpha)


def counterexample_lp_mass(alpha: float) -> float:
    """Closed form of int |f|^{1/alpha}: substituting u = log(1/y) leaves
    int_{log 2}^inf u^{-1/alpha} du = alpha/(1-alpha) (log 2)^{1 - 1/alpha}.

    Note the constant sometimes quoted for this example,
    (1-alpha)/alpha (log 2)^{1/alpha - 1}, is the reciprocal.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return alpha / (1.0 - alpha) * math.log(2.0) ** (1.0 - 1.0 / alpha)


def counterexample_lp_mass_quadrature(alpha: float, u_cut: float = 60.0) -> float:
    """Same integral by quadrature on a truncated range plus the exact
    power-law tail beyond the cut."""
    trunk, _ = quad(lambda u: u ** (-1.0 / alpha), math.log(2.0), u_cut)
    tail = u_cut ** (1.0 - 1.0 / alpha) / (1.0 / alpha - 1.0)
    return trunk + tail


def graded_nodes(octaves: int = 44, per_octave: int = 16) -> np.ndarray:
    """Log-spaced support nodes filling (0, 1/2], densest near the origin."""
    blocks = [2.0 ** -(j + 1) * 2.0 ** (np.arange(per_octave) / per_octave)
              for j in range(octaves, 0, -1)]
    blocks.append(np.array([0.5]))
    return np.concatenate(blocks)


def counterexample_g(p: FracParams, targets, nodes: np.ndarray | None = None) -> np.ndarray:
    """Delta_N^{-alpha/2} f at positive targets: the direct plus mirrored
    power integral of f over its graded support nodes."""
    if nodes is None:
        nodes = graded_nodes()
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if np.any(targets <= 0.0):
        raise ValueError("targets must be positive; the power vanishes on x <= 0")
    fvals = counterexample_f(p.alpha).evaluate((nodes,), 0.0)
    w = singular_weights(targets, nodes, p.alpha) \
        + singular_weights(-targets, nodes, p.alpha)
    return (w @ fvals) / p.gamma_alpha


def counterexample_report(alpha: float, ks, q: QuadratureConfig | None = None,
                          family: CubeFamily | None = None,
                          grid_h: float = 1.0 / 256.0, grid_span: float = 13.0,
                          jobs: int = 1) -> dict:
    """Cube averages and oscillations of g = Delta_N^{-alpha/2} f on the
    shrinking cubes Q_k = [-1/k, 1/k], against the log log k lower bounds,
    plus the adapted seminorm of g over a standard family.
    """
    from .bmo import bmo_l

    ks = sorted(int(k) for k in ks)
    if ks and ks[0] < 5:
        raise ValueError("the shrinking-cube bounds require k >= 5")
    p = frac_params(alpha)
    nodes = graded_nodes()
    targets = np.unique(np.concatenate([nodes, [1.0 / k for k in ks]]))
    g = counterexample_g(p, targets, nodes)

    loglog2 = math.log(math.log(2.0))
    rows = []
    for k in ks:
        sel = targets <= 1.0 / k + 1e-15
        xs, gs = targets[sel], g[sel]
        trunk = float(np.trapezoid(gs, xs)) + xs[0] * gs[0]
        m = 0.5 * k * trunk
        osc_trunk = float(np.trapezoid(np.abs(gs - m), xs)) + xs[0] * abs(gs[0] - m)
        osc = 0.5 * k * osc_trunk + 0.5 * abs(m)
        blog = math.log(math.log(float(k))) - loglog2
        rows.append({"k": k, "m_Qk": m, "oscillation": osc,
                     "lower_bound_half": blog / (2.0 * p.gamma_alpha),
                     "lower_bound_quarter": blog / (4.0 * p.gamma_alpha)})

    grid = make_grid(Domain.FULL, (-grid_span,), (grid_span,), grid_h)
    xs = grid.axis(0)
    gv = np.zeros_like(xs)
    pos = xs > 0.0
    gv[pos] = counterexample_g(p, xs[pos], nodes)
    gf = SampledFunction(grid, gv, name="frac_counterexample")
    fam = family or CubeFamily(scales=dyadic_scales(5),
                               window_lo=(-2.0,), window_hi=(2.0,))
    est = bmo_l(gf, OperatorKind(OpTag.DeltaN), fam, q or QuadratureConfig(), jobs=jobs)

    mass_quad = counterexample_lp_mass_quadrature(alpha)
    mass_closed = counterexample_lp_mass(alpha)
    oscs = [r["oscillation"] for r in rows]
    means = [r["m_Qk"] for r in rows]
    return {
        "alpha": alpha,
        "gamma_alpha": p.gamma_alpha,
        "rows": rows,
        "means_exceed_half_bound": bool(all(r["m_Qk"] >= r["lower_bound_half"] for r in rows)),
        "oscillations_exceed_quarter_bound": bool(
            all(r["oscillation"] >= r["lower_bound_quarter"] for r in rows)),
        "oscillation_increasing": bool(all(b > a for a, b in zip(oscs, oscs[1:]))),
        "mean_increasing": bool(all(b > a for a, b in zip(means, means[1:]))),
        "adapted_seminorm": est.report("frac_counterexample", "DeltaN"),
        "adapted_divergent": est.divergent,
        "lp_mass_quadrature": mass_quad,
        "lp_mass_closed_form": mass_closed,
        "lp_mass_reciprocal_constant": 1.0 / mass_closed,
        "seminorm_to_lp_ratio": est.value / mass_quad ** alpha,
    }
