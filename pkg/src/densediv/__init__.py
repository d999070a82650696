"""Dense divisors of Euler's phi and Carmichael's lambda.

Exact predicates for u-dense integers, segmented sieves for bulk phi/lambda
values, and counting experiments over their divisor structure.
"""

from .arithmetic import (
    Factorization,
    carmichael,
    divisors,
    euler_phi,
    factorize,
    is_prime,
    largest_prime_factor,
    multiplicative_order,
)
from .density import (
    DensityCertificate,
    Interval,
    certificate_failure,
    closed,
    divisor_in,
    extend_certificate,
    find_certificate,
    is_dense,
    is_dense_in,
    max_divisor_ratio,
    verify_certificate,
)
from .errors import CacheIntegrityError, CapacityError, CertificateError
from .experiments import (
    OmegaProfile,
    ScanResult,
    ThetaProfile,
    Witness,
    count_B,
    floor_pow,
    landau_scan,
    nondense_scan,
    omega_phi_profile,
    phi_prime_gap_scan,
    phi_ratio_small,
    scan_density,
    scan_full_range_density,
    shifted_prime_scan,
    theta_profile,
)
from .sieve import (
    SieveConfig,
    SieveSegment,
    build_segment,
    build_spf_table,
    cache_read,
    cache_write,
    iterate_segments,
    primes_in,
    shifted_prime_factor_table,
)

__version__ = "0.1.0"
