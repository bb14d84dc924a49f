"""Mean-oscillation seminorm estimators over finite cube families.

The classical estimator replaces f on each cube Q by its quadrature average;
the operator-adapted one replaces it by e^{-tL}f at t = side^2.  A finite
family cannot certify an infinite seminorm, so divergence is operationalized
as monotone growth of the per-scale maxima across the smallest dyadic scales.
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grids import (
    CubeFamily,
    CubeSpec,
    Domain,
    SampledFunction,
    dyadic_cubes,
    even_extension,
    odd_extension,
    reflect,
    zero_extension,
)
from .kernels import OperatorKind, OpTag, QuadratureConfig, apply_semigroup

DIVERGENCE_MARGIN = 0.2
DIVERGENCE_SCALES = 4

_HALF_OF = {
    (OpTag.DeltaN, +1): OpTag.DeltaNPlus,
    (OpTag.DeltaN, -1): OpTag.DeltaNMinus,
    (OpTag.DeltaD, +1): OpTag.DeltaDPlus,
    (OpTag.DeltaD, -1): OpTag.DeltaDMinus,
    (OpTag.DeltaDN, +1): OpTag.DeltaNPlus,
    (OpTag.DeltaDN, -1): OpTag.DeltaDMinus,
}


class HalfVariant(enum.Enum):
    RESTRICTION = "r"
    ZERO = "z"
    EVEN = "e"
    ODD = "o"


@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    argmax_cube: CubeSpec | None
    family: CubeFamily
    per_scale: tuple[tuple[float, float], ...]
    divergent: bool
    n_cubes: int = 0

    def report(self, function: str, operator: str) -> dict:
        return {
            "function": function,
            "operator": operator,
            "value": self.value,
            "argmax_cube": None if self.argmax_cube is None else {
                "center": list(self.argmax_cube.center),
                "side": self.argmax_cube.side,
            },
            "per_scale": [[s, m] for s, m in self.per_scale],
            "divergent": self.divergent,
        }


def _cube_selector(grid, cube: CubeSpec):
    """Index slices and tensor quadrature weights for the nodes inside a cube."""
    slices = []
    weights = []
    for i, (lo, hi) in enumerate(cube.bounds()):
        ax = grid.axis(i)
        i0 = int(np.searchsorted(ax, lo - 1e-12))
        i1 = int(np.searchsorted(ax, hi + 1e-12, side="right")) - 1
        if i1 - i0 < 1:
            raise ValueError(f"cube {cube} covers fewer than 2 nodes on axis {i}")
        w = np.full(i1 - i0 + 1, grid.h)
        w[0] = w[-1] = grid.h / 2
        slices.append(slice(i0, i1 + 1))
        weights.append(w)
    if grid.dim == 1:
        return tuple(slices), weights[0]
    return tuple(slices), weights[0][:, None] * weights[1][None, :]


def _weighted_oscillation(block: np.ndarray, ref, w: np.ndarray) -> float:
    tot = float(np.sum(w))
    if ref is None:
        ref = np.sum(w * block) / tot
    return float(np.sum(w * np.abs(block - ref)) / tot)


def mean_oscillation(f: SampledFunction, cube: CubeSpec) -> float:
    """(1/|Q|) int_Q |f - f_Q| with f_Q the quadrature average."""
    sl, w = _cube_selector(f.grid, cube)
    return _weighted_oscillation(f.values[sl], None, w)


def _divergent(per_scale, margin: float, k: int) -> bool:
    if len(per_scale) < k:
        return False
    tail = [m for _, m in per_scale[-k:]]
    return all(b - a >= margin for a, b in zip(tail, tail[1:]))


def _scan(cubes, scale_osc, family, margin, k) -> SeminormEstimate:
    """Reduce (cube, oscillation) pairs into the estimate structure."""
    per_scale = []
    best = (-np.inf, None)
    count = 0
    for s in family.scales:
        m = -np.inf
        for cube, osc in zip(cubes, scale_osc):
            if cube.side != s:
                continue
            count += 1
            if osc > m:
                m = osc
            if osc > best[0]:
                best = (osc, cube)
        if m > -np.inf:
            per_scale.append((s, m))
    value = best[0] if best[1] is not None else 0.0
    return SeminormEstimate(
        value=float(value),
        argmax_cube=best[1],
        family=family,
        per_scale=tuple(per_scale),
        divergent=_divergent(per_scale, margin, k),
        n_cubes=count,
    )


def classical_bmo(f: SampledFunction, family: CubeFamily,
                  margin: float = DIVERGENCE_MARGIN, k: int = DIVERGENCE_SCALES) -> SeminormEstimate:
    cubes = dyadic_cubes(family, f.grid.domain)
    if not cubes:
        raise ValueError("cube family is empty on this domain")
    osc = [mean_oscillation(f, c) for c in cubes]
    return _scan(cubes, osc, family, margin, k)


def _family_window(family: CubeFamily, grid) -> list[tuple[float, float]]:
    win = []
    for i in range(grid.dim):
        lo = max(family.window_lo[i], grid.lo[i])
        hi = min(family.window_hi[i], grid.hi[i])
        win.append((lo, hi))
    return win


def bmo_l(f: SampledFunction, op: OperatorKind, family: CubeFamily,
          q: QuadratureConfig = QuadratureConfig(),
          margin: float = DIVERGENCE_MARGIN, k: int = DIVERGENCE_SCALES,
          jobs: int = 1) -> SeminormEstimate:
    """Operator-adapted seminorm: max over cubes of the oscillation of f
    against e^{-tL}f at t = side^2.

    The function grid must cover the family window padded by the kernel
    truncation radius at the largest scale; apply_semigroup raises with the
    missing margin otherwise.
    """
    cubes = dyadic_cubes(family, f.grid.domain)
    if not cubes:
        raise ValueError("cube family is empty on this domain")
    window = _family_window(family, f.grid)

    def smooth(scale: float):
        return apply_semigroup(op, scale * scale, f, q, window=window)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            smoothed = dict(zip(family.scales, pool.map(smooth, family.scales)))
    else:
        smoothed = {s: smooth(s) for s in family.scales}

    fwin = _restrict_to_window(f, smoothed[family.scales[0]].grid)
    osc = []
    for cube in cubes:
        g = smoothed[cube.side]
        sl, w = _cube_selector(g.grid, cube)
        osc.append(_weighted_oscillation(fwin.values[sl] - g.values[sl], 0.0, w))
    return _scan(cubes, osc, family, margin, k)


def _restrict_to_window(f: SampledFunction, wgrid) -> SampledFunction:
    sl = []
    for i in range(f.grid.dim):
        i0 = f.grid.index_of(i, wgrid.lo[i])
        i1 = f.grid.index_of(i, wgrid.hi[i])
        sl.append(slice(i0, i1 + 1))
    return SampledFunction(wgrid, f.values[tuple(sl)], f.name)


def halfspace_bmo(f: SampledFunction, variant: HalfVariant, family: CubeFamily,
                  margin: float = DIVERGENCE_MARGIN, k: int = DIVERGENCE_SCALES) -> SeminormEstimate:
    """Classical oscillation seminorm of a half-domain function under one of
    the four half-space readings (restriction / zero / even / odd)."""
    if f.grid.domain is Domain.LOWER_HALF:
        f = reflect(f)
    if f.grid.domain is not Domain.UPPER_HALF:
        raise ValueError("halfspace_bmo expects a half-domain function")
    if variant is HalfVariant.RESTRICTION:
        cubes = dyadic_cubes(family, Domain.UPPER_HALF)
        if not cubes:
            raise ValueError("no cubes inside the half domain")
        osc = [mean_oscillation(f, c) for c in cubes]
        return _scan(cubes, osc, family, margin, k)
    ext = {HalfVariant.ZERO: zero_extension,
           HalfVariant.EVEN: even_extension,
           HalfVariant.ODD: odd_extension}[variant]
    return classical_bmo(ext(f), family, margin, k)


def split_bmo_l(f: SampledFunction, op: OperatorKind, family: CubeFamily,
                q: QuadratureConfig = QuadratureConfig(),
                margin: float = DIVERGENCE_MARGIN, k: int = DIVERGENCE_SCALES):
    """Glued-operator seminorm computed piecewise: half-space operators on the
    cubes inside each half, the glued kernel on interface-crossing cubes.

    Returns (estimate, parts) where parts maps 'upper'/'lower'/'cross' to the
    max oscillation contributed by each piece.  The estimate must agree with
    the direct bmo_l to quadrature rounding.
    """
    if op.tag not in (OpTag.DeltaN, OpTag.DeltaD, OpTag.DeltaDN):
        raise ValueError("split computation applies to the glued operators")
    from .grids import restrict as _restrict

    cubes = dyadic_cubes(family, f.grid.domain)
    # the interface node layer carries the upper-side trace, so cubes that
    # touch it from below must use the glued kernel, not the lower half-space
    # operator; upper cubes may touch the interface
    upper = [c for c in cubes if c.bounds()[-1][0] >= -1e-12]
    lower = [c for c in cubes if c.bounds()[-1][1] <= -1e-12]
    taken = set(id(c) for c in upper) | set(id(c) for c in lower)
    cross = [c for c in cubes if id(c) not in taken]

    f_up = _restrict(f, Domain.UPPER_HALF)
    f_dn = _restrict(f, Domain.LOWER_HALF)
    op_up = OperatorKind(_HALF_OF[(op.tag, +1)], op.dim)
    op_dn = OperatorKind(_HALF_OF[(op.tag, -1)], op.dim)

    window = _family_window(family, f.grid)
    osc_all = []
    parts = {"upper": 0.0, "lower": 0.0, "cross": 0.0}

    def eval_cubes(fn, oper, cube_list, part):
        if not cube_list:
            return
        scales = sorted({c.side for c in cube_list}, reverse=True)
        win = window.copy()
        if oper.domain is Domain.UPPER_HALF:
            win[-1] = (max(win[-1][0], 0.0), win[-1][1])
        elif oper.domain is Domain.LOWER_HALF:
            win[-1] = (win[-1][0], min(win[-1][1], 0.0))
        for s in scales:
            g = apply_semigroup(oper, s * s, fn, q, window=win)
            fw = _restrict_to_window(fn, g.grid)
            for cube in cube_list:
                if cube.side != s:
                    continue
                sl, w = _cube_selector(g.grid, cube)
                o = _weighted_oscillation(fw.values[sl] - g.values[sl], 0.0, w)
                osc_all.append((cube, o))
                parts[part] = max(parts[part], o)

    eval_cubes(f_up, op_up, upper, "upper")
    eval_cubes(f_dn, op_dn, lower, "lower")
    eval_cubes(f, op, cross, "cross")

    order = {id(c): i for i, c in enumerate(cubes)}
    osc_all.sort(key=lambda t: order[id(t[0])])
    est = _scan([c for c, _ in osc_all], [o for _, o in osc_all], family, margin, k)
    return est, parts


CLASSICAL = "classical"


def inclusion_report(functions, operators, family: CubeFamily,
                     q: QuadratureConfig = QuadratureConfig(),
                     margin: float = DIVERGENCE_MARGIN, jobs: int = 1) -> dict:
    """Verdict table across test functions and operators.

    ``functions`` is a list of (name, SampledFunction); ``operators`` mixes
    OperatorKind values and the string 'classical'.  The chain section checks
    that finite/divergent verdicts respect the one-sided inclusions
    (adapted-Dirichlet inside classical inside adapted-Neumann).
    """
    table: dict[str, dict] = {}
    for name, f in functions:
        row = {}
        for oper in operators:
            if oper == CLASSICAL:
                est = classical_bmo(f, family, margin)
                row[CLASSICAL] = est.report(name, CLASSICAL)
            else:
                est = bmo_l(f, oper, family, q, margin, jobs=jobs)
                row[oper.tag.value] = est.report(name, oper.tag.value)
        table[name] = row

    chain = {}
    for name, row in table.items():
        checks = {}
        if CLASSICAL in row and "DeltaD" in row:
            checks["dirichlet_inside_classical"] = not (
                row[CLASSICAL]["divergent"] and not row["DeltaD"]["divergent"]
            )
        if CLASSICAL in row and "DeltaN" in row:
            checks["classical_inside_neumann"] = not (
                row["DeltaN"]["divergent"] and not row[CLASSICAL]["divergent"]
            )
        chain[name] = checks
    return {"functions": table, "chain": chain}
