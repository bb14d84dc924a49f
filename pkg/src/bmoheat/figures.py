"""Figure rendering for the report commands.

Every report path renders a small summary figure next to its CSV/JSON
output.  The Agg backend keeps rendering headless and deterministic; no
LaTeX, no timestamps, fixed sizes.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

plt.rcParams.update({
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": [5.2, 5.2 * _GOLDEN],
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
})


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def kernel_profiles(sections, labels, title, path) -> Path:
    """Overlaid kernel sections p_t(x, .); ``sections`` holds (ys, values)
    pairs, one curve per operator."""
    fig, ax = plt.subplots()
    for (ys, vals), lab in zip(sections, labels):
        ax.plot(ys, vals, lw=1.0, label=lab)
    ax.set_xlabel("y")
    ax.set_ylabel("kernel")
    ax.set_title(title)
    ax.legend(loc="best")
    return _finish(fig, path)


def scale_curves(curves, title, path, ylabel="max mean oscillation") -> Path:
    """Per-scale seminorm profiles, one labeled curve per estimate; scales
    on a log axis, largest to the left."""
    fig, ax = plt.subplots()
    for label, per_scale in curves:
        ss = [p[0] for p in per_scale]
        ms = [p[1] for p in per_scale]
        ax.semilogx(ss, ms, marker="o", ms=3, lw=1.0, label=label)
    ax.invert_xaxis()
    ax.set_xlabel("cube side s")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best")
    return _finish(fig, path)


def counterexample_curve(rows, path) -> Path:
    ks = [r["k"] for r in rows]
    fig, ax = plt.subplots()
    ax.semilogx(ks, [r["m_Qk"] for r in rows], marker="o", ms=3, lw=1.0, label="m_Qk")
    ax.semilogx(ks, [r["oscillation"] for r in rows], marker="s", ms=3, lw=1.0,
                label="oscillation")
    ax.semilogx(ks, [r["lower_bound_half"] for r in rows], ls="--", lw=1.0,
                label="(1/2g)(loglog k - loglog 2)")
    ax.semilogx(ks, [r["lower_bound_quarter"] for r in rows], ls=":", lw=1.0,
                label="(1/4g)(loglog k - loglog 2)")
    ax.set_xlabel("k")
    ax.set_ylabel("value on Q_k")
    ax.set_title("classical oscillation growth of the adapted-bounded function")
    ax.legend(loc="best")
    return _finish(fig, path)


def decay_profile(rows, title, path) -> Path:
    """|K(x, y)| against separation on log axes, with the t d^{a-3} line."""
    fig, ax = plt.subplots()
    sep = [r["separation"] for r in rows]
    ax.loglog(sep, [abs(r["kernel"]) for r in rows], marker="o", ms=3, lw=1.0,
              label="|difference kernel|")
    ax.loglog(sep, [r["bound"] for r in rows], ls="--", lw=1.0, label="fitted bound")
    ax.set_xlabel("separation d")
    ax.set_ylabel("|K|")
    ax.set_title(title)
    ax.legend(loc="best")
    return _finish(fig, path)


def growth_sweep(rows, title, path) -> Path:
    fig, ax = plt.subplots()
    ss = [r["s"] for r in rows]
    ax.plot(ss, [r["r_s"] for r in rows], marker="o", ms=3, lw=1.0, label="r(s)")
    c = max(r["ratio"] for r in rows)
    ax.plot(ss, [c * (1.0 + abs(s)) ** 0.5 for s in ss], ls="--", lw=1.0,
            label="c (1+|s|)^{1/2}")
    ax.set_xlabel("s")
    ax.set_ylabel("max adapted seminorm")
    ax.set_title(title)
    ax.legend(loc="best")
    return _finish(fig, path)


def multiplier_weight(u, m_abs, title, path) -> Path:
    fig, ax = plt.subplots()
    ax.semilogy(u, m_abs, lw=1.0)
    ax.set_xlabel("u")
    ax.set_ylabel("|m(u)|")
    ax.set_title(title)
    return _finish(fig, path)


def tail_mass_map(rows, title, path) -> Path:
    """One curve per r over the y grid."""
    fig, ax = plt.subplots()
    rs = sorted({r["r"] for r in rows})
    for rv in rs:
        pts = [(r["y"], r["tail_mass"]) for r in rows if r["r"] == rv]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3,
                lw=1.0, label=f"r = {rv:g}")
    ax.set_xlabel("y")
    ax.set_ylabel("tail mass")
    ax.set_title(title)
    ax.legend(loc="best")
    return _finish(fig, path)


def function_profile(xs, values, name, path) -> Path:
    fig, ax = plt.subplots()
    vals = np.asarray(values)
    if np.iscomplexobj(vals):
        ax.plot(xs, vals.real, lw=1.0, label="re")
        ax.plot(xs, vals.imag, lw=1.0, label="im")
        ax.legend(loc="best")
    else:
        ax.plot(xs, vals, lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel(name or "value")
    ax.set_title(name or "sampled function")
    return _finish(fig, path)
