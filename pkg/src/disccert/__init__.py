"""disccert: exact certification of lower bounds on matrix discrepancy.

The certified value is a true lower bound on
min over +-1 signings x of max_i |<A_i, x>| for every input, and is
positive with high probability on the random models the generators produce.
Certificates are self-contained and re-verifiable with exact arithmetic.
"""
from .certificate import Certificate, parse_certificate, serialize_certificate
from .certifier import (
    CertifierParams,
    VerifyResult,
    alpha_threshold,
    build_polytope_matrix,
    certify_discrepancy,
    certify_gaussian,
    certify_matrix_gaussian,
    certify_partition,
    default_parameters,
    sound_threshold,
    verify_certificate,
    verify_certificate_bytes,
)
from .dyadic import DyadicRational, RealSample, truncate_to_bits
from .ellipsoid import (
    EllipsoidWeights,
    PolytopeRows,
    certify_sandwich,
    john_weights,
    leverages_exact,
    polytope_vertices,
)
from .errors import (
    DimensionTooLarge,
    DiscCertError,
    FormatError,
    GuardInsufficient,
    InsufficientPrecisionWarning,
    NotPositiveDefinite,
    SandwichFailure,
    SingularIntermediate,
)
from .gen import (
    GaussianSource,
    GenSpec,
    MODELS,
    gen_gaussian_truncated,
    gen_partition,
    gen_wishart,
)
from .instances import (
    FixedPointMatrix,
    PartitionInstance,
    canonical_serialize,
    instance_digest,
    parse_instance,
)
from .lattice import (
    MinNormDecision,
    QuadraticForm,
    ReducedBasisReport,
    decide_min_norm_exceeds,
    first_minimum_exact,
    lll_reduce_gram,
    vectors_not_exceeding,
)
from .oracle import brute_force_disc, empirical_anticoncentration, has_perfect_partition

__version__ = "0.1.0"
