"""Prime number races, Chebyshev bias, and limiting logarithmic distributions."""

from .coeffs import (
    BadReductionError,
    CoefficientSource,
    EllipticCurve,
    PRESET_CURVES,
    cornacchia,
    dirichlet_pair_coeff,
    ec_ap,
    kronecker,
    lambda_ec_pair,
    lambda_gauss,
    lambda_sum2sq,
    parse_curve,
    qr_race_coeff,
    sqrt_mod,
)
from .dist import (
    ComparisonResult,
    DistributionSummary,
    FourierProfile,
    InsufficientDecayError,
    bessel_j0,
    chebyshev_bound,
    compare_empirical,
    delta_estimate,
    density_by_inversion,
    fourier_hat,
    sample_li,
    sample_time_average,
)
from .primes import LiEvaluator, PrimeStream, sieve_primes
from .race import (
    RaceSpec,
    RaceTrajectory,
    accumulate,
    build_spec,
    export_trajectory,
    import_trajectory,
    log_density_nonneg,
    make_spec,
    normalize,
    trajectory_stats,
)
from .zeros import (
    ComponentMeta,
    CriticalLineEvaluator,
    ZeroSet,
    file_digest,
    find_zeros,
    load_zero_file,
    save_zero_file,
    zero_count_main_term,
)

__version__ = "0.1.0"
