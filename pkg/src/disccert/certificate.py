"""Re-verifiable certificates of discrepancy lower bounds.

A certificate pins everything an independent checker needs: the instance
digest, the slab width delta, the ellipsoid weights and scaling, the
LLL-reduced form with its unimodular transform, the decision, and the
entry-truncation correction term. Certificates produced without reaching
the lattice stage (entry-bound rejection, sandwich failure) omit the
weights/form fields.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import DyadicRational
from .errors import FormatError
from .exactlinalg import det_bareiss
from .lattice import QuadraticForm

__all__ = ["Certificate", "serialize_certificate", "parse_certificate", "KINDS"]

KINDS = ("gaussian-disc", "partition", "raw-disc")


@dataclass(frozen=True)
class Certificate:
    """Everything needed to re-check a certification run, exactly.

    `certified_value` is None when nothing was certified; otherwise it equals
    max(0, delta - correction). `unimodular` is checked to have determinant
    +-1 at construction. `sound_bound` is the reduced-first-entry threshold
    2^(n-1) * 4n actually used for the decision; `alpha_bound` additionally
    carries the alpha-strength threshold 2^(n-1) * 4n * alpha^2 for which
    `alpha_exceeded` records the (informational) comparison outcome.
    """

    kind: str
    instance_digest: str
    delta: DyadicRational
    alpha_log2: int
    correction: DyadicRational
    certified_value: DyadicRational | None
    weights: tuple[Fraction, ...] | None = None
    scaling_c: Fraction | None = None
    reduced_form: QuadraticForm | None = None
    unimodular: tuple[tuple[int, ...], ...] | None = None
    sound_bound: Fraction | None = None
    alpha_bound: Fraction | None = None
    alpha_exceeded: bool | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if not re.fullmatch(r"[0-9a-f]{64}", self.instance_digest):
            raise ValueError("digest must be 64 hex characters")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.unimodular is not None:
            if det_bareiss([list(r) for r in self.unimodular]) not in (1, -1):
                raise ValueError("transform matrix is not unimodular")
        if self.certified_value is not None:
            expect = self.delta - self.correction
            if expect < 0:
                expect = DyadicRational.zero()
            if self.certified_value.as_fraction() != expect.as_fraction():
                raise ValueError("certified value must equal max(0, delta - correction)")

    @property
    def certified(self) -> bool:
        return self.certified_value is not None

    def value(self) -> DyadicRational:
        return self.certified_value if self.certified_value is not None else DyadicRational.zero()


def _frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _parse_frac(text: str) -> Fraction:
    num, den = text.split("/", 1)
    return Fraction(int(num), int(den))


_HEADER = "disc-cert v1"


def serialize_certificate(cert: Certificate) -> bytes:
    lines = [_HEADER]
    lines.append(f"kind: {cert.kind}")
    lines.append(f"digest: {cert.instance_digest}")
    lines.append(f"delta: {cert.delta.encode()}")
    lines.append(f"alpha_log2: {cert.alpha_log2}")
    if cert.weights is not None:
        lines.append("weights: " + " ".join(_frac(w) for w in cert.weights))
        lines.append(f"scaling: {_frac(cert.scaling_c)}")
        n = cert.reduced_form.n
        lines.append(f"n: {n}")
        flat = " ".join(
            _frac(cert.reduced_form.entries[i][j]) for i in range(n) for j in range(n)
        )
        lines.append("reduced_form: " + flat)
        lines.append(
            "unimodular: " + " ".join(str(cert.unimodular[i][j]) for i in range(n) for j in range(n))
        )
        lines.append(f"sound_bound: {_frac(cert.sound_bound)}")
        lines.append(f"alpha_bound: {_frac(cert.alpha_bound)}")
        lines.append(f"alpha_exceeded: {'yes' if cert.alpha_exceeded else 'no'}")
    if cert.certified_value is not None:
        lines.append(f"decision: certified {cert.certified_value.encode()}")
    else:
        lines.append("decision: not-certified")
    lines.append(f"correction: {cert.correction.encode()}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_certificate(data: bytes) -> Certificate:
    """Parse a certificate file; raises FormatError on any malformation."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not UTF-8: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _HEADER:
        raise FormatError("missing certificate header")
    fields: dict[str, str] = {}
    for ln in lines[1:]:
        if ": " not in ln:
            raise FormatError(f"malformed field line {ln!r}")
        key, val = ln.split(": ", 1)
        if key in fields:
            raise FormatError(f"duplicate field {key!r}")
        fields[key] = val
    try:
        kind = fields["kind"]
        digest = fields["digest"]
        delta = DyadicRational.decode(fields["delta"])
        alpha_log2 = int(fields["alpha_log2"])
        correction = DyadicRational.decode(fields["correction"])
        decision = fields["decision"]
        if decision == "not-certified":
            value = None
        elif decision.startswith("certified "):
            value = DyadicRational.decode(decision[len("certified "):])
        else:
            raise FormatError(f"bad decision {decision!r}")
        weights = scaling = reduced = unimod = sound_bound = alpha_bound = None
        alpha_exceeded = None
        if "weights" in fields:
            weights = tuple(_parse_frac(t) for t in fields["weights"].split())
            scaling = _parse_frac(fields["scaling"])
            n = int(fields["n"])
            flat = [_parse_frac(t) for t in fields["reduced_form"].split()]
            if len(flat) != n * n:
                raise FormatError("reduced form has wrong entry count")
            reduced = QuadraticForm(
                n, tuple(tuple(flat[i * n + j] for j in range(n)) for i in range(n))
            )
            uflat = [int(t) for t in fields["unimodular"].split()]
            if len(uflat) != n * n:
                raise FormatError("unimodular matrix has wrong entry count")
            unimod = tuple(tuple(uflat[i * n + j] for j in range(n)) for i in range(n))
            sound_bound = _parse_frac(fields["sound_bound"])
            alpha_bound = _parse_frac(fields["alpha_bound"])
            alpha_exceeded = fields["alpha_exceeded"] == "yes"
        return Certificate(
            kind=kind,
            instance_digest=digest,
            delta=delta,
            alpha_log2=alpha_log2,
            correction=correction,
            certified_value=value,
            weights=weights,
            scaling_c=scaling,
            reduced_form=reduced,
            unimodular=unimod,
            sound_bound=sound_bound,
            alpha_bound=alpha_bound,
            alpha_exceeded=alpha_exceeded,
        )
    except FormatError:
        raise
    except Exception as exc:  # int()/Fraction()/validation failures
        raise FormatError(f"malformed certificate: {exc}") from None
