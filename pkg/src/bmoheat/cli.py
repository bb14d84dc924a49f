"""Batch command-line front end.

Each subcommand runs one experiment family and writes its tables (CSV),
its structured report (JSON, embedding the fully resolved configuration),
and a summary figure into the output directory.  Outputs are byte
identical across reruns of the same configuration.

Exit codes: 0 success, 2 invalid configuration, 3 numerical-tolerance
failure (the diagnostic report is still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import figures
from .bmo import (
    CLASSICAL,
    DIVERGENCE_MARGIN,
    bmo_l,
    classical_bmo,
    inclusion_report,
)
from .catalog import CATALOG, get_function
from .fractional import (
    counterexample_report,
    fit_gamma,
    frac_params,
    gamma_alpha_closed,
    difference_decay_table,
)
from .grids import CubeFamily, Domain, dyadic_scales, make_grid, sample
from .kernels import (
    OperatorKind,
    OpTag,
    QuadratureConfig,
    eval_heat_kernel,
    kernel_mass,
    kernel_values,
    qt_apply,
)
from .reporting import output_dir, write_csv, write_json
from .spectral import (
    bmo_growth_sweep,
    mellin_forward,
    mellin_synthesis,
    multiplier_catalog,
    tail_mass_table,
)


class ToleranceFailure(RuntimeError):
    """A contract check failed after the reports were written."""


# shared desk-scale profile: fine enough to resolve the smallest dyadic
# cube against the log singularities, small enough to run in seconds
PROFILE = {
    "h": 1.0 / 256.0,
    "span": 13.0,
    "window": 2.0,
    "scales": 5,
}

DEFAULTS = {
    "kernels": {"operators": "all", "t": 1.0, "x": 0.3, "y_lo": -4.0,
                "y_hi": 4.0, "n": 513},
    "seminorm": {"function": "log_e", "params": "", "operator": "DeltaN"},
    "compare": {"functions": "log_e,Log",
                "operators": "classical,DeltaD,Delta,DeltaN,DeltaDN"},
    "counterexample": {"alpha": 0.5, "k": "5,10,100,1000"},
    "frac": {"alpha": 0.5, "operators": "Delta,DeltaN", "t": 1.0,
             "ratios": "2,4,8,16,32"},
    "impow": {"operator": "Delta", "s": "0,1,2,4,8,16,32"},
    "multiplier": {"name": "lam_exp", "t": 1.0, "operator": "Delta",
                   "function": "bump"},
    "tailmass": {"name": "lam_exp", "operator": "Delta",
                 "r": "0.25,0.5,1,2,4", "y": "-2,-0.5,0,0.5,2"},
}


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _names(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [tok.strip() for tok in str(text).split(",") if tok.strip()]


def _operator(name: str) -> OperatorKind:
    try:
        return OperatorKind(OpTag(name))
    except ValueError:
        raise ValueError(
            f"unknown operator {name!r}; known: "
            + ", ".join(t.value for t in OpTag)) from None


def _function_spec(name: str, params_text: str = ""):
    params = {}
    for tok in str(params_text).split(","):
        if tok.strip():
            k, _, v = tok.partition("=")
            params[k.strip()] = float(v)
    return get_function(name, **params)


def _profile_family(cfg) -> CubeFamily:
    w = float(cfg.get("window", PROFILE["window"]))
    return CubeFamily(scales=dyadic_scales(int(cfg.get("scales", PROFILE["scales"]))),
                      window_lo=(-w,), window_hi=(w,))


def _profile_grid(cfg, domain=Domain.FULL):
    span = float(cfg.get("span", PROFILE["span"]))
    h = float(cfg.get("h", PROFILE["h"]))
    lo = 0.0 if domain is Domain.UPPER_HALF else -span
    hi = 0.0 if domain is Domain.LOWER_HALF else span
    return make_grid(domain, (lo,), (hi,), h)


def _resolved(cfg, command: str) -> dict:
    out = {"command": command}
    out.update({k: cfg[k] for k in sorted(cfg)})
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_kernels(cfg, out: Path) -> int:
    ops = ([OperatorKind(t) for t in OpTag] if cfg["operators"] == "all"
           else [_operator(n) for n in _names(cfg["operators"])])
    t = float(cfg["t"])
    x = float(cfg["x"])
    ys = np.linspace(float(cfg["y_lo"]), float(cfg["y_hi"]), int(cfg["n"]))
    rows, sections, labels = [], [], []
    summary = {}
    for op in ops:
        keep = ys
        if op.domain is Domain.UPPER_HALF:
            keep = ys[ys >= 0.0]
        elif op.domain is Domain.LOWER_HALF:
            keep = ys[ys <= 0.0]
        xq = x if (op.domain is not Domain.LOWER_HALF) else -abs(x)
        vals = kernel_values(op, t, xq, keep)
        sections.append((keep, vals))
        labels.append(op.tag.value)
        for y, v in zip(keep, vals):
            rows.append((op.tag.value, t, xq, float(y), float(v)))
        sym = abs(eval_heat_kernel(op, t, xq, xq / 2.0 + 0.1)
                  - eval_heat_kernel(op, t, xq / 2.0 + 0.1, xq))
        summary[op.tag.value] = {
            "x": xq,
            "mass": kernel_mass(op, t, xq),
            "symmetry_error": sym,
            "min_value": float(np.min(vals)),
            "conservative": op.conservative,
        }
    write_csv(out / "kernels.csv", ["operator", "t", "x", "y", "value"], rows)
    write_json(out / "kernels.json",
               {"config": _resolved(cfg, "kernels"), "operators": summary})
    figures.kernel_profiles(sections, labels,
                            f"heat kernels at t = {t:g}, x = {x:g}",
                            out / "kernels.png")
    print(f"kernels: {len(ops)} operators, {len(rows)} rows -> {out}")
    return 0


def cmd_seminorm(cfg, out: Path) -> int:
    spec = _function_spec(cfg["function"], cfg.get("params", ""))
    family = _profile_family(cfg)
    jobs = int(cfg.get("jobs", 1))
    if cfg["operator"] == CLASSICAL:
        f = sample(spec, _profile_grid(cfg))
        est = classical_bmo(f, family)
        rep = est.report(spec.name, CLASSICAL)
    else:
        op = _operator(cfg["operator"])
        f = sample(spec, _profile_grid(cfg, op.domain))
        est = bmo_l(f, op, family, QuadratureConfig(), jobs=jobs)
        rep = est.report(spec.name, op.tag.value)
    write_csv(out / "seminorm.csv", ["scale", "max_mean_oscillation"],
              [(s, m) for s, m in rep["per_scale"]])
    write_json(out / "seminorm.json",
               {"config": _resolved(cfg, "seminorm"), "estimate": rep})
    figures.scale_curves([(f"{rep['function']} / {rep['operator']}", rep["per_scale"])],
                         "seminorm scale profile", out / "seminorm.png")
    print(f"seminorm: {rep['function']} / {rep['operator']} = "
          f"{rep['value']:.6f} divergent={rep['divergent']} -> {out}")
    return 0


def cmd_compare(cfg, out: Path) -> int:
    family = _profile_family(cfg)
    grid = _profile_grid(cfg)
    jobs = int(cfg.get("jobs", 1))
    fnames = _names(cfg["functions"])
    functions = [(n, sample(_function_spec(n), grid)) for n in fnames]
    operators = [CLASSICAL if n == CLASSICAL else _operator(n)
                 for n in _names(cfg["operators"])]
    report = inclusion_report(functions, operators, family, QuadratureConfig(),
                              jobs=jobs)
    report["config"] = _resolved(cfg, "compare")
    rows = []
    curves = []
    for fname, row in report["functions"].items():
        for opname, rep in row.items():
            rows.append((fname, opname, rep["value"], rep["divergent"]))
            curves.append((f"{fname}/{opname}", rep["per_scale"]))
    write_csv(out / "compare.csv", ["function", "operator", "value", "divergent"], rows)
    write_json(out / "compare.json", report)
    figures.scale_curves(curves, "classical vs adapted scale profiles",
                         out / "compare.png")
    for fname, checks in report["chain"].items():
        for cname, ok in checks.items():
            print(f"compare: {fname} {cname}: {'ok' if ok else 'VIOLATED'}")
    if not all(ok for checks in report["chain"].values() for ok in checks.values()):
        raise ToleranceFailure("inclusion chain violated")
    print(f"compare: wrote {out / 'compare.json'}")
    return 0


def cmd_counterexample(cfg, out: Path) -> int:
    ks = [int(v) for v in _floats(cfg["k"])]
    rep = counterexample_report(float(cfg["alpha"]), ks,
                                jobs=int(cfg.get("jobs", 1)))
    rep["config"] = _resolved(cfg, "counterexample")
    write_csv(out / "counterexample.csv",
              ["k", "m_Qk", "oscillation", "lower_bound_half", "lower_bound_quarter"],
              [(r["k"], r["m_Qk"], r["oscillation"], r["lower_bound_half"],
                r["lower_bound_quarter"]) for r in rep["rows"]])
    write_json(out / "counterexample.json", rep)
    figures.counterexample_curve(rep["rows"], out / "counterexample.png")
    print(f"counterexample: alpha={cfg['alpha']} oscillation increasing: "
          f"{rep['oscillation_increasing']}, adapted divergent: {rep['adapted_divergent']}")
    ok = (rep["oscillation_increasing"] and rep["means_exceed_half_bound"]
          and rep["oscillations_exceed_quarter_bound"] and not rep["adapted_divergent"])
    if not ok:
        raise ToleranceFailure("counterexample contract violated")
    print(f"counterexample: wrote {out / 'counterexample.json'}")
    return 0


def cmd_frac(cfg, out: Path) -> int:
    alpha = float(cfg["alpha"])
    t = float(cfg["t"])
    p = frac_params(alpha)
    fitted = float(fit_gamma(alpha))
    closed = float(gamma_alpha_closed(alpha))
    rel = abs(fitted - closed) / closed
    rows = []
    all_rows = {}
    for name in _names(cfg["operators"]):
        op = _operator(name)
        table = difference_decay_table(op, p, t, ratios=_floats(cfg["ratios"]))
        all_rows[name] = table
        for r in table:
            rows.append((name, alpha, r["ratio"], r["separation"], r["kernel"],
                         r["bound_ratio"]))
    write_csv(out / "frac.csv",
              ["operator", "alpha", "ratio", "separation", "kernel", "bound_ratio"],
              rows)
    payload = {"config": _resolved(cfg, "frac"), "gamma_closed_form": closed,
               "gamma_fitted": fitted, "gamma_rel_err": rel, "tables": all_rows}
    write_json(out / "frac.json", payload)
    first = next(iter(all_rows.values()))
    fit_c = max(r["bound_ratio"] for r in first[:2]) if len(first) >= 2 else 1.0
    figures.decay_profile(
        [{"separation": r["separation"], "kernel": r["kernel"],
          "bound": fit_c * t * r["separation"] ** (alpha - 3.0)}
         for r in first],
        f"difference kernel decay, alpha = {alpha:g}", out / "frac.png")
    print(f"frac: gamma fitted {fitted!r} vs closed {closed!r} rel err {rel:.2e}")
    if rel > 1e-6:
        raise ToleranceFailure("fitted normalization disagrees with closed form")
    print(f"frac: wrote {out / 'frac.json'}")
    return 0


def cmd_impow(cfg, out: Path) -> int:
    op = _operator(cfg["operator"])
    sweep = bmo_growth_sweep(op, _floats(cfg["s"]), jobs=int(cfg.get("jobs", 1)))
    sweep["config"] = _resolved(cfg, "impow")
    write_csv(out / "impow.csv", ["s", "r_s", "ratio"],
              [(r["s"], r["r_s"], r["ratio"]) for r in sweep["rows"]])
    write_json(out / "impow.json", sweep)
    figures.growth_sweep(sweep["rows"], "imaginary-power seminorm growth",
                         out / "impow.png")
    print(f"impow: spread {sweep['spread']:.4f}, fitted c {sweep['fitted_c']:.4f}")
    if sweep["spread"] > 3.0:
        raise ToleranceFailure("growth ratio spread exceeds factor 3")
    print(f"impow: wrote {out / 'impow.json'}")
    return 0


def cmd_multiplier(cfg, out: Path) -> int:
    name = cfg["name"]
    t = float(cfg["t"])
    op = _operator(cfg["operator"])
    spec = mellin_forward(name, strict=False)
    payload = {"config": _resolved(cfg, "multiplier"),
               "catalog": multiplier_catalog(),
               "name": name, "divergent": spec.divergent,
               "integrable": spec.integrable,
               "weighted_mass": spec.weighted_mass,
               "m_at_zero": {"re": float(spec.m[spec.u.size // 2].real),
                             "im": float(spec.m[spec.u.size // 2].imag)}}
    write_csv(out / "multiplier.csv", ["u", "re_m", "im_m", "abs_m"],
              [(float(u), float(m.real), float(m.imag), float(abs(m)))
               for u, m in zip(spec.u, spec.m)])
    figures.multiplier_weight(spec.u, np.abs(spec.m).clip(1e-300),
                              f"Mellin weight of {name}", out / "multiplier.png")
    synth_err = None
    if spec.integrable and not spec.divergent and name == "lam_exp":
        grid = _profile_grid(cfg, op.domain)
        f = sample(_function_spec(cfg.get("function", "bump")), grid)
        syn = mellin_synthesis(spec, t, op, f)
        w = PROFILE["window"]
        wlo = max(grid.lo[0], -w) if op.domain is not Domain.UPPER_HALF else 0.0
        whi = min(grid.hi[0], w) if op.domain is not Domain.LOWER_HALF else 0.0
        direct = qt_apply(op, t, f, QuadratureConfig(), window=[(wlo, whi)])
        i0 = grid.index_of(0, wlo)
        i1 = grid.index_of(0, whi)
        synth_err = float(np.max(np.abs(syn.values[i0:i1 + 1] - direct.values)))
        payload["synthesis_vs_direct_max_err"] = synth_err
    write_json(out / "multiplier.json", payload)
    print(f"multiplier: {name} divergent={spec.divergent} "
          f"weighted_mass={spec.weighted_mass:.6f}"
          + (f" synth err {synth_err:.2e}" if synth_err is not None else ""))
    if spec.divergent:
        raise ToleranceFailure("Mellin integral diverges (F(0) != 0)")
    if synth_err is not None and synth_err > 1e-4:
        raise ToleranceFailure("synthesis disagrees with the kernel route")
    print(f"multiplier: wrote {out / 'multiplier.json'}")
    return 0


def cmd_tailmass(cfg, out: Path) -> int:
    op = _operator(cfg["operator"])
    spec = mellin_forward(cfg["name"], strict=False)
    rs = _floats(cfg["r"])
    ys = _floats(cfg["y"])
    table = tail_mass_table(op, spec, rs, ys)
    # dilation invariance: spread across r at each y
    devs = []
    for y in ys:
        col = [r["tail_mass"] for r in table["rows"] if r["y"] == float(y)]
        devs.append(max(col) - min(col))
    table["r_invariance_max_dev"] = float(max(devs))
    table["config"] = _resolved(cfg, "tailmass")
    write_csv(out / "tailmass.csv", ["r", "y", "tail_mass"],
              [(r["r"], r["y"], r["tail_mass"]) for r in table["rows"]])
    write_json(out / "tailmass.json", table)
    figures.tail_mass_map(table["rows"], f"tail mass of {cfg['name']}",
                          out / "tailmass.png")
    print(f"tailmass: sup {table['empirical_sup']:.8f} "
          f"r-invariance dev {table['r_invariance_max_dev']:.2e}")
    if op.tag is OpTag.Delta and table["r_invariance_max_dev"] > 1e-6:
        raise ToleranceFailure("tail mass not dilation invariant")
    print(f"tailmass: wrote {out / 'tailmass.json'}")
    return 0


_COMMANDS = {
    "kernels": cmd_kernels,
    "seminorm": cmd_seminorm,
    "compare": cmd_compare,
    "counterexample": cmd_counterexample,
    "frac": cmd_frac,
    "impow": cmd_impow,
    "multiplier": cmd_multiplier,
    "tailmass": cmd_tailmass,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmoheat",
        description="heat-kernel experiments for operator-adapted oscillation spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags override it")
        p.add_argument("--out", help="output directory (default $BMOHEAT_OUT or ./reports)")
        p.add_argument("--jobs", type=int, help="worker threads (results independent of count)")
        p.add_argument("--h", type=float, help="grid spacing")
        p.add_argument("--span", type=float, help="grid half width")
        p.add_argument("--window", type=float, help="cube-family window half width")
        p.add_argument("--scales", type=int, help="number of dyadic scale halvings")

    p = sub.add_parser("kernels", help="kernel sections, mass, and symmetry summary")
    common(p)
    p.add_argument("--operators", help="comma list of operator tags, or 'all'")
    p.add_argument("--t", type=float, help="time")
    p.add_argument("--x", type=float, help="section point")
    p.add_argument("--y-lo", dest="y_lo", type=float)
    p.add_argument("--y-hi", dest="y_hi", type=float)
    p.add_argument("--n", type=int, help="section sample count")

    p = sub.add_parser("seminorm", help="classical or adapted seminorm of one function")
    common(p)
    p.add_argument("--function", help="catalog function id")
    p.add_argument("--params", help="function parameters k=v,k=v")
    p.add_argument("--operator", help="operator tag or 'classical'")

    p = sub.add_parser("compare", help="inclusion verdict table over functions and operators")
    common(p)
    p.add_argument("--functions", help="comma list of catalog ids")
    p.add_argument("--operators", help="comma list of operator tags / 'classical'")

    p = sub.add_parser("counterexample", help="divergence of the classical oscillation "
                                              "of an adapted-bounded function")
    common(p)
    p.add_argument("--alpha", type=float, help="fractional order in (0, 1)")
    p.add_argument("--k", help="comma list of cube indices k >= 5")

    p = sub.add_parser("frac", help="fractional-power kernels: normalization and decay")
    common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--operators", help="comma list of operator tags")
    p.add_argument("--t", type=float)
    p.add_argument("--ratios", help="comma list of d/sqrt(t) ratios")

    p = sub.add_parser("impow", help="seminorm growth sweep of imaginary powers")
    common(p)
    p.add_argument("--operator")
    p.add_argument("--s", help="comma list of powers")

    p = sub.add_parser("multiplier", help="Mellin weight and synthesis of a spectral multiplier")
    common(p)
    p.add_argument("--name", help="multiplier id from the catalog")
    p.add_argument("--t", type=float)
    p.add_argument("--operator")
    p.add_argument("--function", help="catalog id of the synthesized test function")

    p = sub.add_parser("tailmass", help="off-diagonal tail mass of a reproducing multiplier")
    common(p)
    p.add_argument("--name")
    p.add_argument("--operator")
    p.add_argument("--r", help="comma list of radii")
    p.add_argument("--y", help="comma list of centers")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    cfg.setdefault("jobs", 1)
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        loaded.pop("command", None)
        cfg.update(loaded)
    for k, v in vars(args).items():
        if k in ("command", "config"):
            continue
        if v is not None:
            cfg[k] = v
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        out = output_dir(cfg.pop("out", None))
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, out)
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
