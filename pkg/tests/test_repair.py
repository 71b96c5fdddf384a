import numpy as np
import pytest

from conjpiggy.analysis import msr_bound
from conjpiggy.code import encode, make_params
from conjpiggy.repair import (
    UnreadableNodeError,
    predicted_bandwidth,
    repair_data_node,
    repair_node,
    repair_parity_node,
)

WORKED = [25, 25, 25, 25, 28, 28, 28, 34, 34, 34, 13, 13, 19, 25]


def test_predicted_worked_example(p14):
    assert [predicted_bandwidth(p14, f) for f in range(1, 15)] == WORKED


def test_predicted_16_12_3():
    p = make_params(16, 12, 3, 8)
    got = [predicted_bandwidth(p, f) for f in range(1, 17)]
    assert got == [27] * 4 + [34] * 4 + [40] * 4 + [15, 15, 23, 27]


def test_predicted_out_of_range(p14):
    with pytest.raises(IndexError):
        predicted_bandwidth(p14, 0)
    with pytest.raises(IndexError):
        predicted_bandwidth(p14, 15)


@pytest.mark.parametrize(
    "n,k,L", [(14, 10, 3), (16, 12, 3), (9, 7, 2), (12, 4, 2), (20, 12, 5), (56, 48, 4), (6, 4, 2), (11, 6, 5)]
)
def test_every_node_exact_and_on_budget(rng, n, k, L):
    p = make_params(n, k, L, 8, warn=False)
    for _ in range(3):
        stripe = encode(p, rng.integers(0, 256, size=(k, n - k)))
        for f in range(1, n + 1):
            rep = repair_node(p, f, stripe.shares([f]))
            assert np.array_equal(rep.recovered, stripe.node(f))
            assert rep.bandwidth == rep.predicted == predicted_bandwidth(p, f)
            keys = [(node, col) for node, col, _ in rep.downloads]
            assert len(keys) == len(set(keys))
            assert f not in {node for node, _ in keys}
            if k > 2 * L:
                assert rep.bandwidth < k * (n - k)
            assert rep.bandwidth >= msr_bound(n, k)


def test_hundred_stripes_exact(p14, rng):
    for _ in range(100):
        stripe = encode(p14, rng.integers(0, 256, size=(10, 4)))
        for f in range(1, 15):
            assert np.array_equal(repair_node(p14, f, stripe.shares([f])).recovered, stripe.node(f))


def test_node1_download_set(p14, rng):
    stripe = encode(p14, rng.integers(0, 256, size=(10, 4)))
    got = {(n, c) for n, c, _ in repair_data_node(p14, 1, stripe.shares([1])).downloads}
    step1 = {(s, 4) for s in range(2, 11)} | {(14, 4)}
    pairs = {(14, v) for v in range(1, 4)} | {(10 + v, 4) for v in range(1, 4)}
    mates = {(s, v) for s in (2, 3, 4) for v in range(1, 4)}
    assert got == step1 | pairs | mates
    assert len(got) == 25


def test_node13_download_set(p14, rng):
    stripe = encode(p14, rng.integers(0, 256, size=(10, 4)))
    got = {(n, c) for n, c, _ in repair_parity_node(p14, 13, stripe.shares([13])).downloads}
    expected = (
        {(s, 3) for s in range(1, 11)}
        | {(s, 1) for s in (5, 6, 7)}
        | {(s, 2) for s in (5, 6, 7)}
        | {(11, 3), (12, 3), (14, 3)}
    )
    assert got == expected


def test_node8_bandwidth(p14, rng):
    stripe = encode(p14, rng.integers(0, 256, size=(10, 4)))
    assert repair_node(p14, 8, stripe.shares([8])).bandwidth == 34


def test_early_parity_nodes_meet_msr(p14):
    for j in range(1, p14.r - p14.L + 2):
        assert predicted_bandwidth(p14, p14.k + j) == msr_bound(14, 10) == 13


def test_zero_stripe_downloads_zero(p14):
    stripe = encode(p14, np.zeros((10, 4), dtype=np.int64))
    for f in range(1, 15):
        rep = repair_node(p14, f, stripe.shares([f]))
        assert not rep.recovered.any()
        assert all(v == 0 for _, _, v in rep.downloads)


def test_download_ledger_is_deterministic(p14, rng):
    data = rng.integers(0, 256, size=(10, 4))
    s = encode(p14, data)
    a = repair_node(p14, 9, s.shares([9])).sorted_downloads()
    b = repair_node(p14, 9, s.shares([9])).sorted_downloads()
    assert a == b


def test_dispatch_and_errors(p14, rng):
    stripe = encode(p14, rng.integers(0, 256, size=(10, 4)))
    assert repair_node(p14, 1, stripe.shares([1])).failed_node == 1
    assert repair_node(p14, 11, stripe.shares([11])).failed_node == 11
    with pytest.raises(IndexError):
        repair_node(p14, 15, stripe.shares())
    with pytest.raises(ValueError):
        repair_data_node(p14, 11, stripe.shares([11]))
    with pytest.raises(ValueError):
        repair_parity_node(p14, 3, stripe.shares([3]))
    with pytest.raises(UnreadableNodeError):
        repair_node(p14, 1, stripe.shares([1, 2]))


def test_below_rs_baseline_boundary():
    from conjpiggy.analysis import node_bandwidth

    def worst(k, r, L):
        return max(node_bandwidth(k, r, L, f) for f in range(1, k + r + 1))

    for r in range(2, 9):
        for L in range(2, r + 1):
            assert worst(2 * L + 1, r, L) < (2 * L + 1) * r
            assert worst(2 * L, r, L) >= 2 * L * r
    assert worst(4, 4, 4) == 19
