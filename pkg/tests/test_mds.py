import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedcache.mds import (
    MdsCodec,
    field_add,
    field_inv,
    field_mul,
    field_pow,
    gf_rank,
    gf_solve,
    mds_decode,
    mds_encode,
    mul_arrays,
    slow_mul,
)

import oracles

symbols = st.integers(0, 65535)


@settings(max_examples=500, deadline=None)
@given(symbols, symbols)
def test_mul_matches_oracle(a, b):
    assert field_mul(a, b) == oracles.gf_mul(a, b) == slow_mul(a, b)


def test_field_identities():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 65536, 10_000)
    b = rng.integers(0, 65536, 10_000)
    c = rng.integers(0, 65536, 10_000)
    # distributivity over xor addition
    assert np.array_equal(mul_arrays(a, b ^ c), mul_arrays(a, b) ^ mul_arrays(a, c))
    assert np.array_equal(mul_arrays(a, 1), a)
    assert not mul_arrays(a, 0).any()
    nz = a[a != 0][:2000]
    assert all(field_mul(int(x), field_inv(int(x))) == 1 for x in nz)
    assert field_add(5, 3) == 6
    assert field_pow(2, 65535) == 1
    with pytest.raises(ZeroDivisionError):
        field_inv(0)


def test_encode_examples():
    rng = np.random.default_rng(0)
    info = rng.integers(0, 65536, 5)
    assert np.array_equal(MdsCodec(5, 5).encode(info), info)
    assert not MdsCodec(9, 4).encode(np.zeros(4, dtype=int)).any()
    c = MdsCodec(4, 3)
    word = mds_encode(c, [1, 2, 3])
    for keep in itertools.combinations(range(4), 3):
        assert mds_decode(c, {i: word[i] for i in keep}).tolist() == [1, 2, 3]


def test_generator_matrix_is_mds():
    c = MdsCodec(8, 5)
    G = c.generator_matrix()
    assert np.array_equal(G[:, :5], np.eye(5, dtype=int))
    for cols in itertools.combinations(range(8), 5):
        assert gf_rank(G[:, cols]) == 5


def test_decode_matches_elimination():
    rng = np.random.default_rng(3)
    c = MdsCodec(12, 7)
    G = c.generator_matrix()
    info = rng.integers(0, 65536, 7)
    word = c.encode(info)
    cols = [11, 3, 9, 0, 7, 5, 10]
    # solve info @ G[:, cols] = word[cols] by elimination as an independent path
    solved = gf_solve(G[:, cols].T, word[cols])
    assert np.array_equal(solved, info)
    assert np.array_equal(c.decode_indices(cols, word[cols]), info)


def test_decode_round_trip_6_4():
    rng = np.random.default_rng(1)
    c = MdsCodec(6, 4)
    info = rng.integers(0, 65536, (4, 3))
    word = c.encode(info)
    for keep in itertools.combinations(range(6), 4):
        assert np.array_equal(c.decode({i: word[i] for i in keep}), info)
    assert np.array_equal(c.decode({i: word[i] for i in range(4)}), info)


def test_decode_errors():
    c = MdsCodec(6, 4)
    word = c.encode([1, 2, 3, 4])
    with pytest.raises(ValueError):
        c.decode({0: word[0], 1: word[1], 2: word[2]})
    with pytest.raises(ValueError):
        c.decode({i: word[i] for i in range(5)})
    with pytest.raises(ValueError):
        c.decode_indices([0, 0, 1, 2], word[[0, 0, 1, 2]])
    with pytest.raises(ValueError):
        c.decode_indices([0, 1, 2, 6], word[[0, 1, 2, 3]])
    with pytest.raises(ValueError):
        MdsCodec(4, 5)
    with pytest.raises(ValueError):
        c.encode([1, 2, 3, 70000])


def test_xor_is_field_addition():
    # linearity over xor lets multicasts of coded packets be decoded as usual
    c = MdsCodec(10, 6)
    rng = np.random.default_rng(5)
    a, b = rng.integers(0, 65536, (2, 6))
    assert np.array_equal(c.encode(a) ^ c.encode(b), c.encode(a ^ b))
