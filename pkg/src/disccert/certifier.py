"""End-to-end certification of discrepancy lower bounds.

The pipeline: scale the slab constraints |<A_i, x>| <= delta by 1/delta and
add the box rows, find candidate John-position weights, certify the
ellipsoid sandwich exactly, then decide by exact Gram-form LLL whether the
first reduced entry R11 exceeds 2^(n-1) * 4n. That inequality proves
min_{x != 0} x^T Q x > 4n, which rules out any +-1 signing inside the slab
polytope, hence certifies disc > delta; the output is therefore a valid
lower bound for every input, certified or not, no matter what the weight
heuristic did.

The alpha-strength comparison against 2^(n-1) * 4n * alpha^2 (the threshold
the completeness analysis is phrased in) is recorded in every certificate
alongside the sound threshold actually used for the decision.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from .certificate import Certificate
from .dyadic import DyadicRational
from .ellipsoid import (
    PolytopeRows,
    certify_sandwich,
    john_weights,
    leverages_exact,
    _weighted_form,
)
from .errors import (
    FormatError,
    InsufficientPrecisionWarning,
    SandwichFailure,
    SingularIntermediate,
)
from .exactlinalg import ldlt
from .gen import GaussianSource
from .instances import (
    FixedPointMatrix,
    PartitionInstance,
    canonical_serialize,
    instance_digest,
    parse_instance,
)
from .lattice import QuadraticForm, lll_reduce_gram

__all__ = [
    "CertifierParams",
    "build_polytope_matrix",
    "certify_discrepancy",
    "certify_matrix_gaussian",
    "certify_gaussian",
    "certify_partition",
    "default_parameters",
    "verify_certificate",
    "verify_certificate_bytes",
    "VerifyResult",
    "sound_threshold",
    "alpha_threshold",
]

PARTITION_COMPLETENESS_FACTOR = 4  # needs b >= 4 n^2 for the success analysis


@dataclass(frozen=True)
class CertifierParams:
    """Derived certification parameters.

    delta: slab width (power of two). alpha_log2: log2 of the gap strength
    the completeness analysis assumes. b: truncation bits. u: entry bound
    (Gaussian pipeline only). M_tail: tail cutoff used when sizing b.
    """

    delta: DyadicRational
    alpha_log2: int
    b: int
    u: DyadicRational | None
    M_tail: Fraction

    def __post_init__(self):
        if not self.delta > 0 or not self.delta.is_power_of_two():
            raise ValueError("delta must be a positive power of two")
        if self.b < 1:
            raise ValueError("b must be at least 1")


def sound_threshold(n: int) -> Fraction:
    """Decision bound on R11: beyond it, min x^T Q x > 4n is proven."""
    return Fraction((1 << (n - 1)) * 4 * n)


def alpha_threshold(n: int, alpha_log2: int) -> Fraction:
    """R11 bound proving min x^T Q x > 4n * alpha^2 (recorded, not decided on)."""
    return sound_threshold(n) * (1 << (2 * alpha_log2))


def build_polytope_matrix(A: FixedPointMatrix, delta: DyadicRational) -> PolytopeRows:
    """Rows of the slab polytope: A_i / delta for each matrix row, then the
    n standard basis rows for the [-1,1]^n box. Exact dyadic scaling."""
    if not delta > 0 or not delta.is_power_of_two():
        raise ValueError("delta must be a positive power of two")
    t = delta.log2()
    rows: list[list[Fraction]] = []
    shift = A.b + t
    for i in range(A.m):
        if shift >= 0:
            rows.append([Fraction(v, 1 << shift) for v in A.numerators[i]])
        else:
            rows.append([Fraction(v << -shift) for v in A.numerators[i]])
    for j in range(A.n):
        rows.append([Fraction(int(k == j)) for k in range(A.n)])
    return PolytopeRows(A.n, tuple(tuple(r) for r in rows))


def _stub_certificate(kind, digest, delta, alpha_log2, correction) -> Certificate:
    return Certificate(
        kind=kind,
        instance_digest=digest,
        delta=delta,
        alpha_log2=alpha_log2,
        correction=correction,
        certified_value=None,
    )


def _certify_core(
    A: FixedPointMatrix,
    delta: DyadicRational,
    alpha_log2: int,
    kind: str,
    digest: str,
    correction: DyadicRational,
    tol: Fraction,
    max_iters: int,
) -> tuple[bool, Certificate]:
    """Shared slab -> ellipsoid -> lattice pipeline. Returns (certified, cert)."""
    if A.m > A.n:
        raise ValueError("pipeline requires m <= n")
    rows = build_polytope_matrix(A, delta)
    try:
        w = john_weights(rows, tol=tol, max_iters=max_iters)
        ew = certify_sandwich(rows, w)
    except (SandwichFailure, SingularIntermediate):
        return False, _stub_certificate(kind, digest, delta, alpha_log2, correction)
    n = A.n
    # LLL runs on Q0 = Q / c: scale invariance makes the transform identical
    # to reducing Q while keeping the integer Gram entries small
    c = ew.scaling_c
    Q0 = ew.Q.scaled(1 / c)
    rep = lll_reduce_gram(Q0)
    r11 = c * rep.reduced_form.entries[0][0]
    sound = sound_threshold(n)
    alpha_b = alpha_threshold(n, alpha_log2)
    certified = r11 > sound
    value = delta - correction
    if value < 0:
        value = DyadicRational.zero()
    cert = Certificate(
        kind=kind,
        instance_digest=digest,
        delta=delta,
        alpha_log2=alpha_log2,
        correction=correction,
        certified_value=value if certified else None,
        weights=ew.w,
        scaling_c=c,
        reduced_form=rep.reduced_form.scaled(c),
        unimodular=rep.unimodular,
        sound_bound=sound,
        alpha_bound=alpha_b,
        alpha_exceeded=r11 > alpha_b,
    )
    return certified, cert


def certify_discrepancy(
    A: FixedPointMatrix,
    delta: DyadicRational,
    alpha_log2: int | None = None,
    tol: Fraction = Fraction(1, 2),
    max_iters: int = 96,
) -> tuple[DyadicRational, Certificate]:
    """Certify disc(A) > delta, or return 0. The returned value is a valid
    lower bound on disc(A) for every input matrix."""
    if alpha_log2 is None:
        alpha_log2 = (A.n + 1) // 2
    digest = instance_digest(canonical_serialize(A))
    certified, cert = _certify_core(
        A, delta, alpha_log2, "raw-disc", digest, DyadicRational.zero(), tol, max_iters
    )
    return (delta if certified else DyadicRational.zero()), cert


def certify_matrix_gaussian(
    A: FixedPointMatrix, params: CertifierParams
) -> tuple[DyadicRational, Certificate]:
    """Entry-bounded pipeline on an already-truncated matrix: reject when any
    entry magnitude exceeds u, otherwise certify and subtract the truncation
    correction u*n/2^b. The result lower-bounds the discrepancy of the
    untruncated source matrix whenever its entries were really bounded by u."""
    if params.u is None:
        raise ValueError("params.u is required for the entry-bounded pipeline")
    digest = instance_digest(canonical_serialize(A))
    # u dyadic and n integral make the correction u*n/2^b exactly dyadic
    un = params.u * A.n
    correction = DyadicRational(un.numerator, un.exponent + A.b)
    bound = params.u.as_fraction() * (1 << A.b)
    for row in A.numerators:
        for v in row:
            if abs(v) > bound:
                cert = _stub_certificate(
                    "gaussian-disc", digest, params.delta, params.alpha_log2, correction
                )
                return DyadicRational.zero(), cert
    certified, cert = _certify_core(
        A,
        params.delta,
        params.alpha_log2,
        "gaussian-disc",
        digest,
        correction,
        Fraction(1, 2),
        96,
    )
    return (cert.value() if certified else DyadicRational.zero()), cert


def certify_gaussian(
    source: GaussianSource, m: int, n: int, params: CertifierParams
) -> tuple[DyadicRational, Certificate]:
    """Query b bits of every entry of a bit-queryable Gaussian matrix, then
    run the entry-bounded pipeline on the truncation."""
    if source.m != m or source.n != n:
        raise ValueError("source shape mismatch")
    A = source.matrix(params.b)
    return certify_matrix_gaussian(A, params)


def certify_partition(
    inst: PartitionInstance,
) -> tuple[str, Certificate]:
    """Certify that no perfect partition of the instance exists.

    Returns ("no-perfect-partition", cert) only when disc of the rescaled
    1 x n matrix provably exceeds 2^-b, i.e. every signed sum has magnitude
    at least 2; otherwise ("unknown", cert). Never wrong when a perfect
    partition exists."""
    A = inst.to_matrix()
    delta = DyadicRational.power_of_two(-inst.b)
    alpha_log2 = (inst.n + 1) // 2
    digest = instance_digest(canonical_serialize(inst))
    certified, cert = _certify_core(
        A, delta, alpha_log2, "partition", digest, DyadicRational.zero(),
        Fraction(1, 2), 96,
    )
    return ("no-perfect-partition" if certified else "unknown"), cert


def _min_k_pow2_geq(target: int, m: int) -> int:
    """Smallest k with 2^(k*m) >= target, exactly."""
    bl = target.bit_length()
    need = bl - 1 if target == 1 << (bl - 1) else bl
    return -(-need // m)


def _ceil_sqrt_scaled(n: int, frac_bits: int) -> int:
    """Smallest integer s with s / 2^frac_bits >= sqrt(n)."""
    t = n << (2 * frac_bits)
    s = math.isqrt(t)
    if s * s < t:
        s += 1
    return s


def default_parameters(
    m: int,
    n: int,
    dist: str,
    b: int | None = None,
    paper_scale: bool = False,
) -> CertifierParams:
    """Derive certification parameters for a distribution and shape.

    gaussian: alpha = 2^ceil(n/2); delta is the largest power of two at or
    below (2 alpha sqrt(n))^(-4n/m), computed by exact integer comparison;
    u is the smallest multiple of 2^-16 at or above 2 sqrt(ln(200 m n))
    (entry tail 2 exp(-u^2/2) m n <= 1/100 with a factor-two margin in u);
    M = ceil(u sqrt(n)); b is the smallest integer with
    b >= 2 log2(M alpha n) + (2n/m) log2(2 alpha sqrt(n) + 1), again by
    integer comparison. With paper_scale=True the far more conservative
    concrete choices delta ~ exp(-6 n^2/m) and b = 8 n^3 are used instead.

    uniform01: delta = 2^-b for the instance's own b (pass b=...); emits
    InsufficientPrecisionWarning when b < 4 n^2, below which the success
    analysis gives no guarantee (certification stays sound regardless).
    """
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    if dist == "uniform01":
        if b is None:
            raise ValueError("uniform01 parameters need the instance bit width b")
        b_req = PARTITION_COMPLETENESS_FACTOR * n * n
        if b < b_req:
            warnings.warn(InsufficientPrecisionWarning(b, b_req))
        return CertifierParams(
            delta=DyadicRational.power_of_two(-b),
            alpha_log2=(n + 1) // 2,
            b=b,
            u=None,
            M_tail=Fraction(1),
        )
    if dist != "gaussian":
        raise ValueError(f"unknown distribution {dist!r}")
    alpha_log2 = (n + 1) // 2
    if paper_scale:
        with mp.workprec(200):
            k = int(mp.ceil(6 * mpf(n) ** 2 / (m * mp.ln(2))))
        b_bits = 8 * n ** 3
    else:
        # 2^(k m) >= (2 alpha)^(4n) * n^(2n)  <=>  2^-k <= (2 alpha sqrt n)^(-4n/m)
        target = (1 << (4 * n * (1 + alpha_log2))) * n ** (2 * n)
        k = _min_k_pow2_geq(target, m)
    delta = DyadicRational.power_of_two(-k)
    with mp.workprec(300):
        uval = 2 * mp.sqrt(mp.ln(mpf(200) * m * n))
        u_num = int(mp.ceil(uval * (1 << 16)))
    u = DyadicRational(u_num, 16)
    # M = ceil(u sqrt n): smallest integer with M^2 * 2^32 >= u_num^2 * n
    t = u_num * u_num * n
    M = math.isqrt(t) >> 16
    while M * M << 32 < t:
        M += 1
    if not paper_scale:
        # smallest b with 2^(b m) * 2^(64 n) >= (M alpha n)^(2m) * (2 alpha s + 2^32)^(2n),
        # s/2^32 an upper dyadic bound on sqrt(n)
        s = _ceil_sqrt_scaled(n, 32)
        rhs = (M * (1 << alpha_log2) * n) ** (2 * m) * ((1 << (1 + alpha_log2)) * s + (1 << 32)) ** (2 * n)
        bl = rhs.bit_length()
        need = (bl - 1 if rhs == 1 << (bl - 1) else bl) - 64 * n
        b_bits = max(1, -(-need // m))
    return CertifierParams(
        delta=delta, alpha_log2=alpha_log2, b=b_bits, u=u, M_tail=Fraction(M)
    )


@dataclass(frozen=True)
class VerifyResult:
    valid: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def verify_certificate(instance_bytes: bytes, cert: Certificate) -> VerifyResult:
    """Independently re-check a certificate against its instance, exactly.

    Recomputes the digest, rebuilds the polytope rows, re-verifies both
    ellipsoid containments, the unimodular congruence U^T Q U = R, the
    LLL-reducedness of R, and the decision arithmetic. Never raises on
    malformed input; any failure is reported as Invalid with a reason.
    """
    try:
        return _verify(instance_bytes, cert)
    except Exception as exc:  # malformed inputs must never crash the checker
        return VerifyResult(False, f"verification error: {exc}")


def verify_certificate_bytes(instance_bytes: bytes, cert_bytes: bytes) -> VerifyResult:
    from .certificate import parse_certificate

    try:
        cert = parse_certificate(cert_bytes)
    except FormatError as exc:
        return VerifyResult(False, f"unparseable certificate: {exc}")
    return verify_certificate(instance_bytes, cert)


def _verify(instance_bytes: bytes, cert: Certificate) -> VerifyResult:
    if instance_digest(instance_bytes) != cert.instance_digest:
        return VerifyResult(False, "digest mismatch")
    instance = parse_instance(instance_bytes)
    if isinstance(instance, PartitionInstance):
        if cert.kind != "partition":
            return VerifyResult(False, "kind/instance mismatch")
        if cert.delta.as_fraction() != Fraction(1, 1 << instance.b):
            return VerifyResult(False, "partition delta must be 2^-b")
        if cert.correction.numerator != 0:
            return VerifyResult(False, "partition correction must be zero")
        A = instance.to_matrix()
    else:
        if cert.kind == "partition":
            return VerifyResult(False, "kind/instance mismatch")
        if cert.kind == "raw-disc" and cert.correction.numerator != 0:
            return VerifyResult(False, "raw correction must be zero")
        A = instance
    if A.m > A.n:
        return VerifyResult(False, "certificates require m <= n")

    if cert.weights is None:
        if cert.certified:
            return VerifyResult(False, "certified decision without lattice data")
        return VerifyResult(True, "nothing claimed")

    n = A.n
    rows = build_polytope_matrix(A, cert.delta)
    if len(cert.weights) != rows.r:
        return VerifyResult(False, "weight count mismatch")
    if any(wv < 0 for wv in cert.weights):
        return VerifyResult(False, "negative weight")
    total = sum(cert.weights)
    if total <= 0:
        return VerifyResult(False, "weights sum to zero")
    c = cert.scaling_c
    if c is None or c <= 0:
        return VerifyResult(False, "bad scaling")

    # (1) containments: every leverage <= c (inscribed side, with equality
    # allowed), and c * sum(w) <= 4n (outer side)
    levs = leverages_exact(rows, list(cert.weights))
    if any(lv > c for lv in levs):
        return VerifyResult(False, "inner containment fails: leverage above scaling")
    if c * total > 4 * n:
        return VerifyResult(False, "outer containment fails")

    # (2) congruence: U^T (c Q0) U = R
    Q0 = _weighted_form(rows, list(cert.weights))
    U = cert.unimodular
    R = cert.reduced_form
    if R.n != n or len(U) != n:
        return VerifyResult(False, "dimension mismatch")
    for i in range(n):
        Qu = [sum(Q0[t][s] * U[s][i] for s in range(n)) for t in range(n)]
        for j in range(i, n):
            val = c * sum(U[t][j] * Qu[t] for t in range(n))
            if val != R.entries[i][j]:
                return VerifyResult(False, f"congruence fails at ({i},{j})")

    # (3) reducedness of R at parameter 3/4
    L, D = ldlt([list(r) for r in R.entries])
    for i in range(n):
        for j in range(i):
            if 2 * abs(L[i][j]) > 1:
                return VerifyResult(False, "reduced form is not size-reduced")
    for i in range(1, n):
        if D[i] < (Fraction(3, 4) - L[i][i - 1] ** 2) * D[i - 1]:
            return VerifyResult(False, "reduced form violates the Lovasz condition")

    # (4) decision arithmetic
    if cert.sound_bound != sound_threshold(n):
        return VerifyResult(False, "wrong sound bound")
    if cert.alpha_bound != alpha_threshold(n, cert.alpha_log2):
        return VerifyResult(False, "wrong alpha bound")
    r11 = R.entries[0][0]
    if cert.certified != (r11 > cert.sound_bound):
        return VerifyResult(False, "decision inconsistent with reduced form")
    if cert.alpha_exceeded != (r11 > cert.alpha_bound):
        return VerifyResult(False, "alpha comparison inconsistent")
    if cert.certified:
        expect = cert.delta - cert.correction
        if expect < 0:
            expect = DyadicRational.zero()
        if cert.certified_value.as_fraction() != expect.as_fraction():
            return VerifyResult(False, "certified value arithmetic wrong")
    return VerifyResult(True, "all checks passed")
