import itertools

import numpy as np
import pytest

from conjpiggy.code import apply_piggyback, encode, encode_base, make_params
from conjpiggy.decode import (
    FieldTooSmallError,
    NotDecodableError,
    decode_generic,
    decode_structured,
    pattern_is_decodable,
    plan_structured,
    symbol_coefficients,
    verify_mds,
)
from conjpiggy.galois import build_field

from conftest import dot_oracle


def test_symbol_coefficients_data_nodes_are_unit(p14):
    for node in (1, 7, 10):
        for col in range(1, 5):
            vec = symbol_coefficients(p14, node, col)
            assert np.flatnonzero(vec).tolist() == [(node - 1) * 4 + col - 1]
            assert vec.max() == 1


def test_symbol_coefficients_diagonal_parity(p14):
    for i in range(1, 5):
        vec = symbol_coefficients(p14, 10 + i, i).reshape(10, 4)
        assert not np.delete(vec, i - 1, axis=1).any()


def test_symbol_coefficients_match_encoder(p14, rng):
    cells = [(node, col) for node in range(1, 15) for col in range(1, 5)]
    for _ in range(100):
        data = rng.integers(0, 256, size=(10, 4))
        stripe = encode(p14, data)
        node, col = cells[rng.integers(len(cells))]
        assert dot_oracle(p14.field, symbol_coefficients(p14, node, col), data.ravel()) == stripe.node(node)[col - 1]


def test_piggyback_support_invariant(p14):
    # In G2, R(i, j) touches column-i data (i != j) only when i < j.
    for s in range(1, 11):
        for c in range(1, 5):
            data = np.zeros((10, 4), dtype=np.int64)
            data[s - 1, c - 1] = 1
            R = apply_piggyback(p14, encode_base(p14, data)).parity
            for i, j in zip(*np.nonzero(R)):
                i, j = int(i) + 1, int(j) + 1
                if j != c:
                    assert i == c and i < j


def _shares(stripe, erased):
    return stripe.shares(erased)


@pytest.mark.parametrize("erased", [(1, 2, 3, 4), (1, 5, 8, 10), (2, 7, 11, 13), (11, 12, 13, 14), (4, 12, 13, 14)])
def test_decoders_named_patterns(p14, rng, erased):
    data = rng.integers(0, 256, size=(10, 4))
    stripe = encode(p14, data)
    shares = _shares(stripe, erased)
    assert np.array_equal(decode_generic(p14, shares), data)
    assert np.array_equal(decode_structured(p14, shares), data)


def test_plan_for_mixed_pattern(p14):
    plan = plan_structured(p14, [x for x in range(1, 15) if x not in (2, 7, 11, 13)])
    assert plan.erased_data == (2, 7)
    assert plan.surviving_parity_rows == (2, 4)
    assert plan.mixed_columns == (1, 3)
    assert plan.tail_columns == ()
    assert plan.t == 2


def test_all_nodes_and_too_few(p14, rng):
    data = rng.integers(0, 256, size=(10, 4))
    stripe = encode(p14, data)
    assert np.array_equal(decode_generic(p14, stripe.shares()), data)
    assert np.array_equal(decode_structured(p14, stripe.shares()), data)
    few = {i: stripe.node(i) for i in range(1, 10)}
    with pytest.raises(ValueError):
        decode_generic(p14, few)
    with pytest.raises(ValueError):
        decode_structured(p14, few)


def test_random_patterns_agree(p14, rng):
    patterns = list(itertools.combinations(range(1, 15), 4))
    for idx in rng.choice(len(patterns), size=60, replace=False):
        data = rng.integers(0, 256, size=(10, 4))
        shares = encode(p14, data).shares(patterns[idx])
        assert np.array_equal(decode_structured(p14, shares), data)
        assert np.array_equal(decode_generic(p14, shares), data)


@pytest.mark.parametrize("n,k,L,m", [(6, 4, 2, 8), (9, 7, 2, 8), (12, 4, 2, 8), (7, 4, 3, 8), (8, 5, 3, 10)])
def test_structured_equals_generic_on_small_codes(rng, n, k, L, m):
    p = make_params(n, k, L, m, warn=False)
    for pattern in itertools.combinations(range(1, n + 1), n - k):
        if not pattern_is_decodable(p, pattern):
            continue
        data = rng.integers(0, p.field.order, size=(k, n - k))
        shares = encode(p, data).shares(pattern)
        assert np.array_equal(decode_structured(p, shares), data)
        assert np.array_equal(decode_generic(p, shares), data)


def test_verify_small_codes():
    rep = verify_mds(make_params(6, 4, 2, 8))
    assert (rep.patterns_checked, rep.failures, rep.is_mds) == (15, [], True)
    rep = verify_mds(make_params(14, 10, 3, 8), workers=4)
    assert rep.summary() == "1001 patterns, 0 failures"


def test_all_parity_erased_is_decodable(p14):
    assert pattern_is_decodable(p14, (11, 12, 13, 14))
    assert pattern_is_decodable(make_params(56, 48, 4, 8, warn=False), tuple(range(49, 57)))


def test_verify_cap():
    with pytest.raises(ValueError):
        verify_mds(make_params(56, 48, 4, 8, warn=False))


def test_non_mds_polynomial_is_caught(rng):
    p = make_params(14, 10, 3, build_field(8, 0x11D))
    rep = verify_mds(p)
    assert rep.failures == [(1, 9, 12, 13), (2, 5, 7, 13)]
    # decoded from the pattern, a nonzero kernel stripe is indistinguishable from zero
    data = rng.integers(0, 256, size=(10, 4))
    shares = encode(p, data).shares((1, 9, 12, 13))
    with pytest.raises(NotDecodableError):
        decode_generic(p, shares)
    with pytest.raises(FieldTooSmallError):
        decode_structured(p, shares)
    with pytest.raises(NotDecodableError):
        decode_structured(p, shares, fallback=True)
