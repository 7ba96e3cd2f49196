"""Monotone rearrangement of estimated quantile and distribution curves.

Sorting the sampled values of a curve gives its nondecreasing version with
the same value distribution.  The package provides that operation and the
tools around it: analytic quantities of smooth curves with oracles,
isotonic regression for comparison, quantile and instrumental estimators on
a simulation design, bootstrap uniform bands with a monotonicity test, and
Monte Carlo harnesses.
"""

from .analytic import (
    AnalyticCurve,
    analytic_cdf,
    analytic_density,
    brute_force_cdf,
    find_roots,
    finite_diff_D,
    finite_diff_Dtilde,
    hadamard_D,
    hadamard_Dtilde,
    linear_curve,
    rearranged_value,
    regular_region,
    sine_curve,
    sparsity,
)
from .curves import (
    DEFAULT_NET_SIZE,
    DomainMap,
    GridCurve,
    StepCdf,
    lp_distance,
    lp_norm,
    make_grid,
    read_curve_csv,
    write_curve_csv,
)
from .errors import (
    CriticalValueError,
    InfeasibleBandError,
    InputError,
    NumericalError,
    RearrangementError,
)
from .estimators import (
    DgpParams,
    Sample,
    abadie_structural_cdf,
    gen_sample,
    ivqr_fit,
    qr_curves,
    qr_fit,
    true_structural_cdf,
    true_structural_quantile,
)
from .functionals import SmoothingSpec, linear_functional, lorenz, lorenz_curve, smooth
from .inference import (
    Band,
    BootstrapEnsemble,
    bootstrap,
    monotone_intersect,
    monotonicity_test,
    score_errors,
    uniform_band,
)
from .isotonic import isotonize, pava
from .rearrange import invert_cdf, is_monotone, pre_cdf, rearrange, rearrange_via_cdf

__version__ = "0.1.0"
