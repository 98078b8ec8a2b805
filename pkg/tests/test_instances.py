import pytest
from hypothesis import given
import hypothesis.strategies as st

from disccert.errors import FormatError
from disccert.instances import (
    FixedPointMatrix,
    PartitionInstance,
    canonical_serialize,
    instance_digest,
    parse_instance,
)


@st.composite
def matrices(draw):
    m = draw(st.integers(1, 5))
    n = draw(st.integers(1, 5))
    b = draw(st.integers(0, 20))
    rows = [
        [draw(st.integers(-(2 ** (b + 4)), 2 ** (b + 4))) for _ in range(n)] for _ in range(m)
    ]
    return FixedPointMatrix.from_rows(b, rows)


@st.composite
def partitions(draw):
    n = draw(st.integers(1, 8))
    b = draw(st.integers(1, 24))
    vals = [draw(st.integers(0, 2**b - 1)) for _ in range(n)]
    return PartitionInstance(n, b, tuple(vals))


@given(st.one_of(matrices(), partitions()))
def test_serialize_parse_round_trip(inst):
    data = canonical_serialize(inst)
    assert canonical_serialize(inst) == data  # deterministic
    assert parse_instance(data) == inst


@given(matrices())
def test_single_entry_change_changes_digest(A):
    data = canonical_serialize(A)
    rows = [list(r) for r in A.numerators]
    rows[0][0] += 1
    other = FixedPointMatrix.from_rows(A.b, rows)
    assert instance_digest(canonical_serialize(other)) != instance_digest(data)


def test_documented_header_format():
    A = FixedPointMatrix.from_rows(0, [[1]])
    assert canonical_serialize(A) == b"disc-instance v1\n1 1 0\n1\n"
    p = PartitionInstance(2, 3, (5, 0))
    assert canonical_serialize(p) == b"partition-instance v1\n2 3\n5 0\n"


def test_int_bound_recorded():
    A = FixedPointMatrix.from_rows(4, [[31, -16]])
    # |31| < 2^(4+1) so one integer bit suffices
    assert A.int_bound == 1
    assert FixedPointMatrix.from_rows(4, [[0, 0]]).int_bound == 0


def test_partition_range_enforced():
    with pytest.raises(ValueError):
        PartitionInstance(2, 3, (8, 0))
    with pytest.raises(ValueError):
        PartitionInstance(2, 3, (-1, 0))


def test_parse_rejects_malformed():
    for bad in (
        b"",
        b"bogus v1\n1 1 0\n1\n",
        b"disc-instance v1\n2 2 0\n1 2\n",  # missing row
        b"disc-instance v1\n1 2 0\n1\n",  # short row
        b"disc-instance v1\n1 1 0\n1\nextra\n",
        b"partition-instance v1\n2 3\n1\n",
        b"partition-instance v1\nx y\n1 2\n",
        b"\xff\xfe",
    ):
        with pytest.raises(FormatError):
            parse_instance(bad)


def test_matrix_entry_views():
    A = FixedPointMatrix.from_rows(3, [[5, -8]])
    assert A.entry(0, 0).as_fraction().numerator == 5
    assert A.entry_fraction(0, 1) == -1
    assert A.row_fractions(0)[0] * 8 == 5
