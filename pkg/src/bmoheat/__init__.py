"""Heat kernels with reflecting/absorbing boundaries and the oscillation
spaces adapted to them: seminorm estimation, fractional and imaginary
powers, spectral multipliers, and the associated desk-scale experiments.
"""

from .bmo import (
    CLASSICAL,
    DIVERGENCE_MARGIN,
    HalfVariant,
    SeminormEstimate,
    bmo_l,
    classical_bmo,
    halfspace_bmo,
    inclusion_report,
    mean_oscillation,
    split_bmo_l,
)
from .catalog import CATALOG, FunctionSpec, get_function, random_bounded
from .fractional import (
    FracParams,
    apply_frac_power,
    counterexample_f,
    counterexample_g,
    counterexample_lp_mass,
    counterexample_report,
    difference_kernel,
    fit_gamma,
    frac_kernel,
    frac_kernel_time_integral,
    frac_params,
    gamma_alpha_closed,
    difference_decay_table,
    riesz_potential,
)
from .grids import (
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
    sample,
    zero_extension,
)
from .kernels import (
    CONSERVATIVE,
    CoverageError,
    OperatorKind,
    OpTag,
    QuadratureConfig,
    apply_semigroup,
    eval_heat_kernel,
    gaussian_bound_ratio,
    kernel_mass,
    kernel_values,
    qt_apply,
    qt_kernel_values,
    truncation_radius,
)
from .reporting import write_csv, write_function, write_json
from .spectral import (
    MellinError,
    MultiplierSpec,
    Transform,
    TransformConfig,
    bmo_growth_sweep,
    imaginary_power,
    imaginary_power_split,
    maximal_multiplier,
    mellin_forward,
    mellin_synthesis,
    multiplier_catalog,
    realization_for,
    tail_mass,
    tail_mass_table,
)

__version__ = "0.1.0"
