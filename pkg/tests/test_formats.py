import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ssfbasis.classical import learn_eof, learn_fourier_eof
from ssfbasis.errors import BadMagicError, DomainError, PayloadMismatchError, TruncatedError, TypeTagError
from ssfbasis.formats import (
    basis_from_bytes,
    basis_to_bytes,
    read_basis,
    read_tensor,
    tensor_from_bytes,
    tensor_to_bytes,
    write_basis,
    write_tensor,
)
from ssfbasis.ksvd import ksvd_learn
from ssfbasis.tucker import hooi


def same_bits(a, b):
    a = np.asarray(a, dtype="<f8")
    b = np.asarray(b, dtype="<f8")
    return a.shape == b.shape and np.array_equal(a.view(np.uint64), b.view(np.uint64))


def test_layout_by_hand():
    x = np.arange(6, dtype=float).reshape(2, 3, order="F")
    buf = tensor_to_bytes(x)
    expected = b"DT01" + struct.pack("<I", 2) + struct.pack("<2Q", 2, 3) + struct.pack("<6d", *range(6))
    assert buf == expected


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(1, 4), min_size=1, max_size=4).flatmap(
        lambda s: arrays(np.float64, tuple(s), elements=st.floats(allow_nan=True, allow_infinity=True))
    )
)
def test_dt01_roundtrip_bit_exact(x):
    assert same_bits(tensor_from_bytes(tensor_to_bytes(x)), x)


def test_special_values_and_files(tmp_path):
    x = np.array([[0.0, -0.0], [np.nan, 5e-324], [np.inf, -np.inf]])
    write_tensor(tmp_path / "x.dt01", x)
    assert same_bits(read_tensor(tmp_path / "x.dt01"), x)


def test_dt01_errors():
    good = tensor_to_bytes(np.ones((2, 2)))
    with pytest.raises(BadMagicError, match="bad magic"):
        tensor_from_bytes(b"XX01" + good[4:])
    with pytest.raises(TruncatedError):
        tensor_from_bytes(good[:10])
    with pytest.raises(PayloadMismatchError, match="payload length mismatch"):
        tensor_from_bytes(good[:-8])
    with pytest.raises(PayloadMismatchError):
        tensor_from_bytes(good + b"\0" * 8)
    with pytest.raises(DomainError):
        tensor_to_bytes(np.ones(2) * 1j)


def bases(rng):
    x = rng.standard_normal((4, 5, 6))
    _, tb = hooi(x, (2, 2, 3))
    tb.mean_field = rng.standard_normal((4, 5, 6))
    eb = learn_eof(rng.standard_normal((6, 10)), 2)
    fb = learn_fourier_eof(x, 3, 2, 2, lx=5.5)
    kd, _ = ksvd_learn(rng.standard_normal((6, 30)), 8, 2, max_iter=3)
    return [tb, eb, fb, kd]


def test_basis_roundtrip_all_types(rng, tmp_path):
    for b in bases(rng):
        back = basis_from_bytes(basis_to_bytes(b))
        assert type(back) is type(b)
        if hasattr(b, "b1"):
            for u, v in zip(b.factors, back.factors):
                assert same_bits(u, v)
            assert same_bits(b.mean_field, back.mean_field)
            assert back.fit_trace == b.fit_trace
        elif hasattr(b, "f1"):
            assert np.array_equal(b.f1, back.f1) and np.array_equal(b.f2, back.f2)
            assert same_bits(b.eof, back.eof) and back.lx == b.lx
        elif hasattr(b, "atoms"):
            assert same_bits(b.atoms, back.atoms) and back.sparsity == b.sparsity
        else:
            assert same_bits(b.factors, back.factors)
        write_basis(tmp_path / "b.ssfb", b)
        assert basis_to_bytes(read_basis(tmp_path / "b.ssfb")) == basis_to_bytes(b)


def test_basis_errors(rng):
    tb, eb, _, _ = bases(rng)
    buf = basis_to_bytes(tb)
    with pytest.raises(TypeTagError):
        basis_from_bytes(buf, expected="EofBasis")
    assert basis_from_bytes(buf, expected="TuckerBasis") is not None
    with pytest.raises(BadMagicError):
        basis_from_bytes(b"NOPE" + buf[4:])
    with pytest.raises(TruncatedError):
        basis_from_bytes(buf[:-5])
    with pytest.raises(PayloadMismatchError):
        basis_from_bytes(buf + b"x")
    with pytest.raises(TypeTagError):
        basis_to_bytes(object())
