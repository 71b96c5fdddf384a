import itertools

import numpy as np
import pytest

from conjpiggy.galois import (
    DEFAULT_POLYS,
    SingularMatrixError,
    build_field,
    gf_add,
    gf_inv,
    gf_mul,
    gf_pow,
    invert_matrix,
    is_invertible,
    rank,
    solve_linear,
)

from conftest import clmul_mod


def test_default_field_m8(gf256):
    assert gf256.order == 256
    assert gf256.alpha == 2
    assert gf256.reduction_poly == DEFAULT_POLYS[8]
    powers = {gf_pow(gf256, 2, e) for e in range(255)}
    assert len(powers) == 255


def test_add_examples(gf256):
    assert gf_add(gf256, 0x57, 0x57) == 0
    assert gf_add(gf256, 0x57, 0x00) == 0x57
    assert gf_add(gf256, 0x05, 0x0E) == 0x0B


def test_mul_examples(gf256):
    assert gf_mul(gf256, 0x00, 0x57) == 0
    assert gf_mul(gf256, 0x01, 0x57) == 0x57


def test_mul_under_0x11d():
    f = build_field(8, 0x11D)
    assert gf_mul(f, 0x02, 0x80) == 0x1D


@pytest.mark.parametrize("poly", [None, 0x11D])
def test_mul_matches_schoolbook_all_pairs(poly):
    f = build_field(8, poly)
    a = np.arange(256)
    table = f.vmul(a[:, None], a[None, :])
    expected = np.array([[clmul_mod(x, y, f.reduction_poly, 8) for y in range(256)] for x in range(256)])
    assert np.array_equal(table, expected)


def test_inverse_exhaustive(gf256):
    for a in range(1, 256):
        scan = [b for b in range(1, 256) if clmul_mod(a, b, gf256.reduction_poly, 8) == 1]
        assert scan == [gf_inv(gf256, a)]
        assert gf_inv(gf256, gf_inv(gf256, a)) == a
    assert gf_inv(gf256, 1) == 1


def test_inverse_of_zero_raises(gf256):
    with pytest.raises(ZeroDivisionError):
        gf_inv(gf256, 0)


def test_axioms_random_triples(gf256, rng):
    a, b, c = rng.integers(0, 256, size=(3, 100_000))
    mul = gf256.vmul
    assert np.array_equal(mul(a, b ^ c), mul(a, b) ^ mul(a, c))
    assert np.array_equal(mul(mul(a, b), c), mul(a, mul(b, c)))
    assert np.array_equal(mul(a, b), mul(b, a))


def test_pow_rules(gf256):
    assert gf_pow(gf256, 2, 255) == 1
    assert gf_pow(gf256, 0x53, 1) == 0x53
    assert gf_mul(gf256, gf_pow(gf256, 2, 5), gf_pow(gf256, 2, -5)) == 1
    assert gf_pow(gf256, 0, 3) == 0
    with pytest.raises(ZeroDivisionError):
        gf_pow(gf256, 0, -1)


def test_exp_log_round_trip(gf256):
    for x in range(1, 256):
        assert gf_pow(gf256, 2, int(gf256.log_table[x])) == x


def test_m2_field():
    f = build_field(2, 0b111)
    assert f.order == 4
    assert gf_pow(f, 2, 3) == 1
    assert gf_pow(f, 2, 1) != 1 and gf_pow(f, 2, 2) != 1


@pytest.mark.parametrize("m", sorted(DEFAULT_POLYS))
def test_every_default_is_primitive(m):
    f = build_field(m)
    assert f.order == 1 << m
    x = f.exp_table[: f.group_order]
    assert len(set(x.tolist())) == f.group_order


def test_rejects_bad_fields():
    with pytest.raises(ValueError):
        build_field(8, 0x100)  # x^8 is reducible
    with pytest.raises(ValueError):
        build_field(1)
    with pytest.raises(ValueError):
        build_field(17)
    with pytest.raises(ValueError):
        build_field(8, 0x1F)  # wrong degree
    with pytest.raises(ValueError):
        # x^4+x^3+x^2+x+1 is irreducible but x has order 5, not 15
        build_field(4, 0b11111)


def test_solve_identity(gf256, rng):
    b = rng.integers(0, 256, size=6)
    assert np.array_equal(solve_linear(gf256, np.eye(6, dtype=np.int64), b), b)


def test_solve_conjugate_pair_matrix():
    f = build_field(8, 0x11D)
    A = np.array([[1, f.alpha], [1, 1]])
    x = solve_linear(f, A, np.array([0x0B, 0x02]))
    assert x.tolist() == [0x05, 0x07]


@pytest.mark.parametrize("size", [1, 2, 5, 17, 40])
def test_solve_random_systems(gf256, rng, size):
    for _ in range(5):
        A = rng.integers(0, 256, size=(size, size))
        if not is_invertible(gf256, A):
            continue
        x = rng.integers(0, 256, size=size)
        assert np.array_equal(solve_linear(gf256, A, gf256.matmul(A, x[:, None]).ravel()), x)
        inv = invert_matrix(gf256, A)
        assert np.array_equal(gf256.matmul(A, inv), np.eye(size, dtype=np.int64))


def test_singular_reports_rank(gf256):
    A = np.array([[1, 2, 3], [1, 2, 3], [0, 0, 7]])
    assert not is_invertible(gf256, A)
    assert rank(gf256, A) == 2
    with pytest.raises(SingularMatrixError) as info:
        solve_linear(gf256, A, np.array([1, 2, 3]))
    assert info.value.rank == 2


def test_invert_identity_and_pair(gf256):
    assert np.array_equal(invert_matrix(gf256, np.eye(4, dtype=np.int64)), np.eye(4, dtype=np.int64))
    assert is_invertible(gf256, np.array([[1, 2], [1, 1]]))


def test_field_is_hashable_and_shared(gf256):
    assert build_field(8) == gf256
    assert len({gf256, build_field(8)}) == 1
    pairs = list(itertools.islice(itertools.product(range(256), repeat=2), 1000))
    assert all(gf256.mul(a, b) == gf256.mul(b, a) for a, b in pairs)
