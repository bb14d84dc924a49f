import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmoheat.grids import (
    CubeFamily,
    CubeSpec,
    Domain,
    Grid,
    GridError,
    SampledFunction,
    dyadic_cubes,
    dyadic_scales,
    even_extension,
    make_grid,
    odd_extension,
    reflect,
    restrict,
    zero_extension,
)


def test_grid_shape_and_axis():
    g = make_grid(Domain.FULL, -2.0, 2.0, 0.5)
    assert g.dim == 1
    assert g.shape == (9,)
    xs = g.axis(0)
    assert xs[0] == -2.0 and xs[-1] == 2.0
    assert g.index_of(0, 0.0) == 4


def test_grid_validation():
    with pytest.raises(GridError):
        make_grid(Domain.FULL, 0.0, 1.05, 0.5)
    with pytest.raises(GridError):
        make_grid(Domain.UPPER_HALF, -1.0, 1.0, 0.5)
    with pytest.raises(GridError):
        make_grid(Domain.FULL, -0.75, 1.0, 0.5)  # no node at 0
    with pytest.raises(GridError):
        make_grid(Domain.FULL, 1.0, 0.0, 0.5)


def test_sampled_function_shape_check():
    g = make_grid(Domain.FULL, -1.0, 1.0, 0.5)
    with pytest.raises(GridError):
        SampledFunction(g, np.zeros(4))


def test_restrict_keeps_boundary_node():
    g = make_grid(Domain.FULL, -1.0, 1.0, 0.25)
    f = SampledFunction(g, np.arange(9, dtype=float))
    up = restrict(f, Domain.UPPER_HALF)
    lo = restrict(f, Domain.LOWER_HALF)
    assert up.grid.domain is Domain.UPPER_HALF
    assert up.values[0] == f.values[4]
    assert lo.values[-1] == f.values[4]
    assert up.values.size + lo.values.size == f.values.size + 1


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 40), seed=st.integers(0, 2**31 - 1))
def test_extension_restriction_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(Domain.UPPER_HALF, 0.0, n * 0.125, 0.125)
    f = SampledFunction(g, rng.standard_normal(g.shape[0]))
    for ext in (even_extension, zero_extension):
        back = restrict(ext(f), Domain.UPPER_HALF)
        assert np.array_equal(back.values, f.values)
    fo = np.array(f.values)
    fo[0] = 0.0  # odd extension zeroes the interface node
    back = restrict(odd_extension(SampledFunction(g, fo)), Domain.UPPER_HALF)
    assert np.array_equal(back.values, fo)


def test_extension_symmetry():
    g = make_grid(Domain.UPPER_HALF, 0.0, 1.0, 0.25)
    f = SampledFunction(g, np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
    ev = even_extension(f)
    od = odd_extension(f)
    zr = zero_extension(f)
    assert np.array_equal(ev.values, [5, 4, 3, 2, 1, 2, 3, 4, 5])
    assert np.array_equal(od.values, [-5, -4, -3, -2, 0, 2, 3, 4, 5])
    assert np.array_equal(zr.values, [0, 0, 0, 0, 1, 2, 3, 4, 5])


def test_reflect_mirrors_lower_half():
    g = make_grid(Domain.LOWER_HALF, -1.0, 0.0, 0.5)
    f = SampledFunction(g, np.array([10.0, 20.0, 30.0]))
    r = reflect(f)
    assert r.grid.domain is Domain.UPPER_HALF
    assert r.grid.hi[-1] == 1.0
    assert np.array_equal(r.values, [30.0, 20.0, 10.0])


def test_dyadic_scales_descending():
    s = dyadic_scales(3)
    assert s == (1.0, 0.5, 0.25, 0.125)


def test_dyadic_cubes_counts_and_bounds():
    fam = CubeFamily(scales=(1.0, 0.5), window_lo=(-1.0,), window_hi=(1.0,))
    cubes = dyadic_cubes(fam)
    # step = side/2: centers for side 1 at -0.5, 0, 0.5; for side 0.5 at
    # -0.75, -0.5, ..., 0.75
    sides = [c.side for c in cubes]
    assert sides == sorted(sides, reverse=True)
    assert sides.count(1.0) == 3
    assert sides.count(0.5) == 7
    for c in cubes:
        (a, b), = c.bounds()
        assert a >= -1.0 - 1e-12 and b <= 1.0 + 1e-12


def test_dyadic_cubes_clip_to_half_domain():
    fam = CubeFamily(scales=(1.0,), window_lo=(-1.0,), window_hi=(1.0,))
    up = dyadic_cubes(fam, Domain.UPPER_HALF)
    assert all(c.bounds()[0][0] >= -1e-12 for c in up)
    assert len(up) == 1 and up[0].center == (0.5,)


def test_cube_family_sorts_scales():
    fam = CubeFamily(scales=(0.25, 1.0, 0.5), window_lo=(0.0,), window_hi=(4.0,))
    assert fam.scales == (1.0, 0.5, 0.25)


def test_cubespec_bounds():
    c = CubeSpec((0.5,), 1.0)
    assert c.bounds() == ((0.0, 1.0),)


def test_two_dim_grid():
    g = make_grid(Domain.UPPER_HALF, (-1.0, 0.0), (1.0, 1.0), 0.5)
    assert g.shape == (5, 3)
    assert g.meshgrid()[1].shape == (5, 3)
