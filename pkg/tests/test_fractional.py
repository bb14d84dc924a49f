import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn
from scipy.special import hyp1f1

from bmoheat.catalog import get_function
from bmoheat.fractional import (
    apply_frac_power,
    counterexample_g,
    counterexample_lp_mass,
    counterexample_lp_mass_quadrature,
    counterexample_report,
    difference_kernel,
    fit_gamma,
    frac_kernel,
    frac_kernel_time_integral,
    frac_params,
    gamma_alpha_closed,
    graded_nodes,
    difference_decay_table,
    riesz_potential,
    singular_weights,
)
from bmoheat.grids import CubeFamily, Domain, SampledFunction, dyadic_scales, make_grid, sample
from bmoheat.kernels import OperatorKind, OpTag

# independently derived reference values
GAMMA_03 = 5.331014971178469                 # 2^0.3 sqrt(pi) G(0.15)/G(0.35)
GAMMA_05 = 2.5066282746310007                # sqrt(2 pi)
GAMMA_07 = 1.178609578316497                 # 2^0.7 sqrt(pi) G(0.35)/G(0.15)
RIESZ_INDICATOR_AT_TWO = 0.8284271247461903  # int_0^1 |2-y|^(-1/2) dy = 2(sqrt 2 - 1)
LP_MASS_HALF = 1.4426950408889634            # 1 / log 2


def op(tag):
    return OperatorKind(tag)


def test_gamma_closed_goldens():
    assert gamma_alpha_closed(0.3) == pytest.approx(GAMMA_03, rel=1e-14)
    assert gamma_alpha_closed(0.5) == pytest.approx(GAMMA_05, rel=1e-14)
    assert gamma_alpha_closed(0.7) == pytest.approx(GAMMA_07, rel=1e-14)


def test_fit_gamma_matches_closed():
    for alpha in (0.3, 0.5, 0.7):
        assert fit_gamma(alpha) == pytest.approx(gamma_alpha_closed(alpha), rel=1e-6)


def test_time_integral_matches_power_law():
    # the time-integral kernel of Delta^{-alpha/2} is d^{alpha-1}/gamma_alpha
    for alpha, d in ((0.5, 1.0), (0.5, 2.0), (0.3, 1.5)):
        got = frac_kernel_time_integral(op(OpTag.Delta), alpha, 0.0, d)
        want = d ** (alpha - 1.0) / gamma_alpha_closed(alpha)
        assert got == pytest.approx(want, rel=1e-9)


def test_frac_kernel_image_structure():
    p = frac_params(0.5)
    g = p.gamma_alpha
    d, s = 1.0 ** -0.5, 3.0 ** -0.5
    assert frac_kernel(op(OpTag.Delta), p, 1.0, 2.0) == pytest.approx(d / g)
    assert frac_kernel(op(OpTag.DeltaNPlus), p, 1.0, 2.0) == pytest.approx((d + s) / g)
    assert frac_kernel(op(OpTag.DeltaDPlus), p, 1.0, 2.0) == pytest.approx((d - s) / g)
    assert frac_kernel(op(OpTag.DeltaN), p, 1.0, 2.0) == pytest.approx((d + s) / g)
    assert frac_kernel(op(OpTag.DeltaD), p, -1.0, -2.0) == pytest.approx((d - s) / g)
    # mixed: Neumann image above the interface, Dirichlet below
    assert frac_kernel(op(OpTag.DeltaDN), p, 1.0, 2.0) == pytest.approx((d + s) / g)
    assert frac_kernel(op(OpTag.DeltaDN), p, -1.0, -2.0) == pytest.approx((d - s) / g)
    # opposite sides never communicate
    assert frac_kernel(op(OpTag.DeltaN), p, 1.0, -2.0) == 0.0


def test_frac_kernel_singular_pair_raises():
    p = frac_params(0.5)
    with pytest.raises(ValueError):
        frac_kernel(op(OpTag.Delta), p, 0.4, 0.4)
    with pytest.raises(ValueError):
        frac_kernel_time_integral(op(OpTag.Delta), 0.5, 0.4, 0.4)


def test_singular_weights_row_sum():
    # W @ 1 must integrate the bare power kernel over the node range
    rng = np.random.default_rng(7)
    nodes = np.sort(rng.uniform(-3.0, 3.0, 400))
    nodes[0], nodes[-1] = -3.0, 3.0
    for alpha in (0.3, 0.5, 0.7):
        for x in (-1.3, 0.0, 0.7):
            w = singular_weights([x], nodes, alpha)
            exact = ((3.0 - x) ** alpha + (x + 3.0) ** alpha) / alpha
            assert float(w.sum()) == pytest.approx(exact, rel=1e-6)
            assert float(w.min()) >= 0.0


def test_singular_weights_rejects_bad_nodes():
    with pytest.raises(ValueError):
        singular_weights([0.0], np.array([0.0, 1.0, 0.5]), 0.5)
    with pytest.raises(ValueError):
        singular_weights([0.0], np.array([1.0]), 0.5)


def test_riesz_potential_of_indicator():
    grid = make_grid(Domain.FULL, -4.0, 4.0, 1.0 / 256.0)
    f = sample(get_function("indicator", lo=0.0, hi=1.0), grid)
    r = riesz_potential(f, frac_params(0.5))
    i2 = grid.index_of(0, 2.0)
    assert r.values[i2] == pytest.approx(RIESZ_INDICATOR_AT_TWO, abs=1e-5)


def test_frac_power_of_even_data_reduces_to_free_case():
    # for even f the glued Neumann power equals the free-space power
    grid = make_grid(Domain.FULL, -6.0, 6.0, 1.0 / 128.0)
    f = sample(get_function("bump", width=1.5), grid)
    p = frac_params(0.5)
    glued = apply_frac_power(op(OpTag.DeltaN), p, f)
    free = riesz_potential(f, p)
    xs = grid.axis(0)
    keep = xs >= 0.0
    np.testing.assert_allclose(glued.values[keep],
                               free.values[keep] / p.gamma_alpha,
                               rtol=0.0, atol=1e-12)


def test_difference_kernel_free_case_closed_form():
    # int g_t(x-z)|z-y|^(a-1) dz = (4t)^((a-1)/2) G(a/2)/sqrt(pi)
    #                              * 1F1((1-a)/2; 1/2; -d^2/4t)
    for alpha in (0.3, 0.5, 0.7):
        p = frac_params(alpha)
        for t, d in ((1.0, 2.0), (0.5, 3.0)):
            smooth = ((4.0 * t) ** ((alpha - 1.0) / 2.0)
                      * gamma_fn(alpha / 2.0) / math.sqrt(math.pi)
                      * hyp1f1((1.0 - alpha) / 2.0, 0.5, -d * d / (4.0 * t)))
            exact = (d ** (alpha - 1.0) - smooth) / p.gamma_alpha
            got = difference_kernel(op(OpTag.Delta), p, t, 0.0, d)
            assert got == pytest.approx(exact, rel=1e-3)


def test_difference_kernel_coincident_raises():
    with pytest.raises(ValueError):
        difference_kernel(op(OpTag.Delta), frac_params(0.5), 1.0, 0.5, 0.5)


def test_difference_decay_table_bound_transfers():
    p = frac_params(0.5)
    rows = difference_decay_table(op(OpTag.Delta), p, 1.0)
    assert [r["ratio"] for r in rows] == [2.0, 4.0, 8.0, 16.0, 32.0]
    fitted = max(rows[0]["bound_ratio"], rows[1]["bound_ratio"])
    for r in rows[2:]:
        assert r["bound_ratio"] <= fitted * (1.0 + 1e-9)


def test_counterexample_lp_mass_closed_form():
    assert counterexample_lp_mass(0.5) == pytest.approx(LP_MASS_HALF, rel=1e-14)
    assert counterexample_lp_mass_quadrature(0.5) == pytest.approx(LP_MASS_HALF, rel=1e-10)
    # the quoted reciprocal form
    assert 1.0 / counterexample_lp_mass(0.5) == pytest.approx(math.log(2.0), rel=1e-14)
    with pytest.raises(ValueError):
        counterexample_lp_mass(1.0)


def test_graded_nodes_cover_origin():
    z = graded_nodes()
    assert np.all(np.diff(z) > 0.0)
    assert z[-1] == 0.5
    assert z[0] == pytest.approx(2.0 ** -44, rel=1e-12)


def test_counterexample_grows_like_loglog():
    fam = CubeFamily(scales=dyadic_scales(3), window_lo=(-1.0,), window_hi=(1.0,))
    rep = counterexample_report(0.5, (5, 10, 100), grid_h=1.0 / 64.0, family=fam)
    assert [r["k"] for r in rep["rows"]] == [5, 10, 100]
    for r in rep["rows"]:
        assert r["m_Qk"] >= r["lower_bound_half"]
        assert r["oscillation"] >= r["lower_bound_quarter"]
    assert rep["means_exceed_half_bound"]
    assert rep["oscillations_exceed_quarter_bound"]
    assert rep["oscillation_increasing"]
    assert not rep["adapted_divergent"]
    assert rep["lp_mass_closed_form"] == pytest.approx(LP_MASS_HALF, rel=1e-12)


def test_counterexample_report_rejects_small_k():
    with pytest.raises(ValueError):
        counterexample_report(0.5, (2, 5))


def test_counterexample_g_positive_targets_only():
    with pytest.raises(ValueError):
        counterexample_g(frac_params(0.5), [-0.5, 0.5])
