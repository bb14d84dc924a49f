import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from bmoheat.catalog import get_function
from bmoheat.grids import CubeFamily, Domain, SampledFunction, dyadic_scales, make_grid, sample
from bmoheat.kernels import OperatorKind, OpTag, QuadratureConfig, qt_apply
from bmoheat.spectral import (
    MellinError,
    MultiplierSpec,
    Transform,
    TransformConfig,
    bmo_growth_sweep,
    imaginary_power,
    imaginary_power_split,
    l2_norm,
    maximal_multiplier,
    mellin_forward,
    mellin_synthesis,
    multiplier_catalog,
    realization_for,
    tail_mass,
    tail_mass_table,
)

# independently derived reference values
INV_TWO_PI = 0.15915494309189535           # Mellin weight of lambda e^{-lambda} at u = 0
TAIL_MASS_FREE = 0.20786600691654572       # scale-matched tail mass, free line
WEIGHTED_MASS_LAM_EXP = 0.5256456253153348

BARE = TransformConfig(pad_factor=1, taper_frac=0.0)
GLUED = (OpTag.DeltaD, OpTag.DeltaN, OpTag.DeltaDN)


@pytest.fixture(scope="module")
def lam_exp_spec():
    return mellin_forward("lam_exp")


def weighted_l2(values, h):
    w = np.full(values.shape[0], h)
    w[0] = w[-1] = h / 2.0
    return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))


def compatible_noise(op, grid, rng):
    """Random data obeying the symmetry class of the operator's transform:
    periodic closure for the full line, zero Dirichlet boundary values."""
    raw = rng.standard_normal(grid.shape[0])
    tr = realization_for(op).transform
    if tr is Transform.FOURIER:
        raw[-1] = raw[0]
    elif tr is Transform.SINE:
        raw[0] = raw[-1] = 0.0
    elif tr is Transform.SPLIT:
        raw[0] = raw[-1] = 0.0
        if op.tag is not OpTag.DeltaN:
            raw[grid.index_of(0, 0.0)] = 0.0
    return raw


def test_realization_map():
    assert realization_for(OperatorKind(OpTag.Delta)).transform is Transform.FOURIER
    assert realization_for(OperatorKind(OpTag.DeltaNPlus)).transform is Transform.COSINE
    assert realization_for(OperatorKind(OpTag.DeltaDMinus)).transform is Transform.SINE
    for tag in GLUED:
        assert realization_for(OperatorKind(tag)).transform is Transform.SPLIT


def test_zero_power_is_identity():
    grid = make_grid(Domain.UPPER_HALF, 0.0, 4.0, 1.0 / 64.0)
    f = sample(get_function("bump", width=1.0), grid)
    assert imaginary_power(OperatorKind(OpTag.DeltaNPlus), 0.0, f) is f


def test_split_rejects_one_sided_operators():
    grid = make_grid(Domain.FULL, -4.0, 4.0, 1.0 / 64.0)
    f = sample(get_function("bump", width=1.0), grid)
    with pytest.raises(ValueError):
        imaginary_power_split(OperatorKind(OpTag.Delta), 1.0, f)


def test_group_law_and_unitarity():
    # in the bare transform configuration the discrete powers form a
    # unitary group in the trapezoid-weighted norm
    rng = np.random.default_rng(11)
    gf = make_grid(Domain.FULL, -8.0, 8.0, 1.0 / 128.0)
    gu = make_grid(Domain.UPPER_HALF, 0.0, 8.0, 1.0 / 128.0)
    gl = make_grid(Domain.LOWER_HALF, -8.0, 0.0, 1.0 / 128.0)
    s1, s2 = 3.7, -1.9
    for tag in OpTag:
        op = OperatorKind(tag)
        if tag in GLUED:
            grid = gf
        elif op.domain is Domain.UPPER_HALF:
            grid = gu
        elif op.domain is Domain.LOWER_HALF:
            grid = gl
        else:
            grid = gf
        f = SampledFunction(grid, compatible_noise(op, grid, rng), "noise")
        if tag in GLUED:
            a = imaginary_power_split(op, s1, f, BARE)
            b = imaginary_power_split(op, s2, a, BARE)
            c = imaginary_power_split(op, s1 + s2, f, BARE)
            for got, want in zip(b, c):
                assert np.max(np.abs(got.values - want.values)) < 1e-9
            for half, ref in zip(a, imaginary_power_split(op, 0.0, f, BARE)):
                assert abs(weighted_l2(half.values, grid.h)
                           - weighted_l2(np.asarray(ref.values, complex), grid.h)) < 1e-9
        else:
            a = imaginary_power(op, s1, f, BARE)
            b = imaginary_power(op, s2, a, BARE)
            c = imaginary_power(op, s1 + s2, f, BARE)
            assert np.max(np.abs(b.values - c.values)) < 1e-9
            assert abs(weighted_l2(a.values, grid.h)
                       - weighted_l2(f.values, grid.h)) < 1e-9


def test_l2_norm_constant():
    grid = make_grid(Domain.FULL, -2.0, 2.0, 1.0 / 64.0)
    f = sample(get_function("const1"), grid)
    assert l2_norm(f) == pytest.approx(2.0, rel=1e-12)


def test_mellin_weight_of_heat_derivative(lam_exp_spec):
    # int lambda e^{-lambda} lambda^{-iu} dlambda/lambda = Gamma(1 - iu)
    spec = lam_exp_spec
    i0 = int(np.argmin(np.abs(spec.u)))
    assert spec.u[i0] == 0.0
    assert abs(spec.m[i0] - INV_TWO_PI) < 1e-12
    for u in (0.5, 2.0, 7.25):
        iu = int(np.argmin(np.abs(spec.u - u)))
        exact = gamma_fn(1.0 - 1j * spec.u[iu]) / (2.0 * math.pi)
        assert abs(spec.m[iu] - exact) < 1e-12
    assert spec.weighted_mass == pytest.approx(WEIGHTED_MASS_LAM_EXP, rel=1e-12)
    assert not spec.divergent


def test_mellin_pole_at_origin_is_an_error():
    with pytest.raises(MellinError):
        mellin_forward("exp_neg")
    spec = mellin_forward("exp_neg", strict=False)
    assert spec.divergent
    assert spec.f_zero == 1.0


def test_unknown_multiplier_id():
    with pytest.raises(MellinError):
        mellin_forward("heat_wave")


def test_catalog_descriptors():
    cat = multiplier_catalog()
    names = [c["name"] for c in cat]
    assert names == sorted(names)
    by_name = {c["name"]: c for c in cat}
    assert by_name["lam_exp"]["sup_norm"] == pytest.approx(math.exp(-1.0))
    assert by_name["lam2_exp"]["sup_norm"] == pytest.approx(4.0 * math.exp(-2.0))


def test_synthesis_matches_direct_heat_derivative(lam_exp_spec):
    # F(lambda) = lambda e^{-lambda} makes F(tL) = tL e^{-tL}
    grid = make_grid(Domain.FULL, -13.0, 13.0, 1.0 / 128.0)
    f = sample(get_function("bump", width=1.0), grid)
    lo, hi = grid.index_of(0, -2.0), grid.index_of(0, 2.0)
    for tag in (OpTag.Delta, OpTag.DeltaDN):
        op = OperatorKind(tag)
        syn = mellin_synthesis(lam_exp_spec, 1.0, op, f)
        direct = qt_apply(op, 1.0, f, QuadratureConfig(), window=[(-2.0, 2.0)])
        err = np.max(np.abs(syn.values[lo:hi + 1] - direct.values))
        assert err < 1e-10


def test_synthesis_requires_integrable_samples():
    spec = mellin_forward("imag_power", strict=False)
    grid = make_grid(Domain.FULL, -4.0, 4.0, 1.0 / 64.0)
    f = sample(get_function("bump", width=1.0), grid)
    with pytest.raises(MellinError):
        mellin_synthesis(spec, 1.0, OperatorKind(OpTag.Delta), f)
    bare = MultiplierSpec(name="lam_exp")
    with pytest.raises(MellinError):
        mellin_synthesis(bare, 1.0, OperatorKind(OpTag.Delta), f)


def test_maximal_dominates_members(lam_exp_spec):
    grid = make_grid(Domain.FULL, -13.0, 13.0, 1.0 / 128.0)
    f = sample(get_function("bump", width=1.0), grid)
    op = OperatorKind(OpTag.Delta)
    mx = maximal_multiplier(lam_exp_spec, op, f, (1.0, 2.0))
    member = mellin_synthesis(lam_exp_spec, 1.0, op, f)
    assert np.all(mx.values >= np.abs(member.values) - 1e-12)


def test_tail_mass_is_scale_invariant(lam_exp_spec):
    op = OperatorKind(OpTag.Delta)
    vals = [tail_mass(op, lam_exp_spec, r, 0.3) for r in (0.25, 0.5, 1.0, 2.0, 4.0)]
    for v in vals:
        assert v == pytest.approx(TAIL_MASS_FREE, abs=1e-12)
    table = tail_mass_table(OperatorKind(OpTag.DeltaN), lam_exp_spec,
                            (0.25, 0.5, 1.0, 2.0, 4.0), (-2.0, -0.5, 0.0, 0.5, 2.0))
    assert len(table["rows"]) == 25
    assert table["empirical_sup"] == pytest.approx(2.0 * TAIL_MASS_FREE, rel=1e-9)


def test_tail_mass_fixed_operator_is_not_invariant(lam_exp_spec):
    # without scale matching the quantity genuinely moves with r
    op = OperatorKind(OpTag.Delta)
    vals = [tail_mass(op, lam_exp_spec, r, 0.3, scale_matched=False)
            for r in (0.5, 1.0, 2.0)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] / vals[0] > 2.0


def test_tail_mass_special_cases(lam_exp_spec):
    op = OperatorKind(OpTag.Delta)
    zero = MultiplierSpec(name="zero")
    assert tail_mass(op, zero, 1.0, 0.0) == 0.0
    other = MultiplierSpec(name="lam2_exp")
    with pytest.raises(NotImplementedError):
        tail_mass(op, other, 1.0, 0.0)


def test_narrow_mellin_weight_approximates_pure_power():
    # a Gaussian m(u) around s0 synthesizes lambda^{is0} damped by
    # exp(-sigma^2 log(lambda)^2 / 2); the error shrinks with sigma
    grid = make_grid(Domain.FULL, -13.0, 13.0, 1.0 / 128.0)
    f = sample(get_function("bump", width=1.0), grid)
    op = OperatorKind(OpTag.Delta)
    target = imaginary_power(op, 2.0, f)
    du = 1.0 / 64.0
    u = np.arange(-16.0, 16.0 + du / 2.0, du)
    errs = []
    for sigma in (0.5, 0.25):
        m = np.exp(-((u - 2.0) ** 2) / (2.0 * sigma * sigma)) \
            / (sigma * math.sqrt(2.0 * math.pi))
        spec = MultiplierSpec(name="narrow", params={"sigma": sigma},
                              u=u, m=m.astype(complex), weighted_mass=1.0,
                              f_zero=1.0, sup_norm=1.0,
                              integrable=True, divergent=False)
        syn = mellin_synthesis(spec, 1.0, op, f)
        errs.append(float(np.max(np.abs(syn.values - target.values))))
    assert errs[1] < errs[0] < 0.1


def test_growth_sweep_reduced_profile():
    grid = make_grid(Domain.FULL, -13.0, 13.0, 1.0 / 64.0)
    fam = CubeFamily(scales=dyadic_scales(3), window_lo=(-1.0,), window_hi=(1.0,))
    funcs = [get_function("sign"), get_function("chirp", rate=4.0)]
    out = bmo_growth_sweep(OperatorKind(OpTag.Delta), (0.0, 4.0),
                           functions=funcs, family=fam, grid=grid)
    assert out["operator"] == "Delta"
    assert [r["s"] for r in out["rows"]] == [0.0, 4.0]
    for row in out["rows"]:
        assert row["r_s"] > 0.0
        assert row["ratio"] == pytest.approx(row["r_s"] / (1.0 + abs(row["s"])) ** 0.5)
        assert row["argmax_function"] in ("sign", "chirp(rate=4)")
    assert out["fitted_c"] == pytest.approx(out["max_ratio"])
    assert out["spread"] >= 1.0
