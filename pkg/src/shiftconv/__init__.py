"""Numerical experiments on mean squares of shifted convolution sums of Hecke eigenvalues."""

from .arith import build_tables, divisors, mod_inverse, ramanujan_tau_table, sigma_2ir
from .bessel import (
    TransformSpec,
    bessel_J,
    bessel_K_imag,
    bessel_K_imag_watson,
    j_minus_combination,
    psi_hat,
    psi_hat_holomorphic,
    psi_hat_minus,
)
from .circle import (
    CircleApprox,
    ShiftedCoeffProblem,
    b_f_direct,
    b_f_star,
    build_circle_approx,
    chi_star,
    lemma1_residual,
    standard_problem,
    variance_V,
)
from .errors import (
    ConsistencyError,
    DataFormatError,
    DataValidationError,
    InvalidArgument,
    NoInverseError,
    QuadratureError,
)
from .forms import (
    HeckeCoeffTable,
    MaassForm,
    SpectralDataset,
    delta_form,
    load_spectral_dataset,
    parse_spectral_dataset,
    write_dataset,
)
from .identities import (
    IdentityReport,
    continuous_sieve_ratio,
    duality_check,
    kuznetsov_residual,
    sobolev_check,
    voronoi_residual,
    zeta_one_plus_it,
)
from .kloosterman import exp_sum_S, kloosterman, ramanujan_sum
from .meanvalue import (
    ExperimentRecord,
    MeanValueSpec,
    envelope,
    envelope_sweep,
    triple_sum,
    triple_sum_naive,
    weighted_bf_meansquare,
)
from .weights import SmoothBump, make_bump, make_nu

__version__ = "0.1.0"
