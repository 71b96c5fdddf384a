"""Single-node repair with an itemized download ledger.

Every stored symbol fetched from a helper node goes through a
:class:`_Fetcher`, which records ``(node, column, value)`` once and refuses
to read from the failed node. Values derived locally from symbols already
fetched cost nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import node_bandwidth
from .code import CodeParams, piggy_vector, unmix_pair

__all__ = [
    "RepairReport",
    "UnreadableNodeError",
    "predicted_bandwidth",
    "repair_data_node",
    "repair_parity_node",
    "repair_node",
]


class UnreadableNodeError(LookupError):
    """A helper node required by the fixed repair procedure is unavailable."""


@dataclass
class RepairReport:
    failed_node: int
    recovered: np.ndarray
    downloads: list[tuple[int, int, int]] = field(default_factory=list)
    predicted: int = 0

    @property
    def bandwidth(self) -> int:
        return len(self.downloads)

    @property
    def consistent(self) -> bool:
        return self.bandwidth == self.predicted

    def sorted_downloads(self) -> list[tuple[int, int, int]]:
        return sorted(self.downloads)


def _check_node(params: CodeParams, node: int) -> int:
    node = int(node)
    if not 1 <= node <= params.n:
        raise IndexError(f"node {node} out of range [1, {params.n}]")
    return node


def predicted_bandwidth(params: CodeParams, node: int) -> int:
    """Closed-form repair bandwidth (in symbols) of ``node``."""
    node = _check_node(params, node)
    return node_bandwidth(params.k, params.r, params.L, node)


class _Fetcher:
    def __init__(self, params: CodeParams, shares, failed: int):
        self.params = params
        self.shares = shares
        self.failed = failed
        self.log: dict[tuple[int, int], int] = {}

    def __call__(self, node: int, col: int) -> int:
        if node == self.failed:
            raise UnreadableNodeError(f"repair tried to read the failed node {node}")
        key = (node, col)
        if key not in self.log:
            try:
                row = self.shares[node]
            except KeyError:
                raise UnreadableNodeError(f"helper node {node} is not readable") from None
            self.log[key] = int(row[col - 1])
        return self.log[key]

    def data(self, s: int, col: int) -> int:
        return self(s, col)

    def parity(self, i: int, j: int) -> int:
        """Stored P(i, j), i.e. node k+i, column j."""
        return self(self.params.k + i, j)

    def ledger(self) -> list[tuple[int, int, int]]:
        return [(n, c, v) for (n, c), v in self.log.items()]


def _recover_tail_columns(params, fetch, f, cols):
    """Recover ``a_{f,c}`` for each ``c`` in ``cols`` from the rest of column
    ``c`` and the diagonal parity ``P(c,c) = P_c . a_c``. Returns the full
    columns as a dict ``c -> a_c``."""
    gf = params.field
    k = params.k
    full = {}
    for c in cols:
        col = np.zeros(k, dtype=np.int64)
        acc = fetch.parity(c, c)
        for s in range(1, k + 1):
            if s == f:
                continue
            col[s - 1] = fetch.data(s, c)
            acc ^= gf.mul(gf.alpha_pow(s * c), col[s - 1])
        col[f - 1] = gf.mul(gf.alpha_pow(-f * c), acc)
        full[c] = col
    return full


def _solve_from_group(params, fetch, f, v, group, piggy_value):
    """``a_{f,v}`` from ``q_{v,t} . a_v`` and the group-mates of ``f``."""
    gf = params.field
    acc = piggy_value
    for s in group:
        if s != f:
            acc ^= gf.mul(gf.alpha_pow(s * v), fetch.data(s, v))
    return gf.mul(gf.alpha_pow(-f * v), acc)


def repair_data_node(params: CodeParams, f: int, shares) -> RepairReport:
    """Rebuild data node ``f`` from ``shares`` (node -> stored row)."""
    f = _check_node(params, f)
    if f > params.k:
        raise ValueError(f"node {f} is not a data node")
    gf = params.field
    r, L = params.r, params.L
    P = params.parity_matrix
    fetch = _Fetcher(params, shares, f)
    i = params.group_of(f)
    group = params.group(i)
    out = np.zeros(r, dtype=np.int64)

    if i < L:
        # last i columns come straight from the base code
        tail = _recover_tail_columns(params, fetch, f, range(r + 1 - i, r + 1))
        for c, col in tail.items():
            out[c - 1] = col[f - 1]
        c = r + 1 - i
        for v in range(1, r - i + 1):
            r_vc, _ = unmix_pair(gf, fetch.parity(v, c), fetch.parity(c, v))
            # R(v, c) = P_v . a_c + q_{v,i} . a_v
            piggy = r_vc ^ gf.dot(P[v - 1], tail[c])
            out[v - 1] = _solve_from_group(params, fetch, f, v, group, piggy)
    else:
        tail_cols = range(r - L + 2, r + 1)
        tail = _recover_tail_columns(params, fetch, f, tail_cols)
        for c, col in tail.items():
            out[c - 1] = col[f - 1]
        for v in range(1, r - L + 2):
            # P_v . a_v minus every R(v, u) leaves q_{v,L} . a_v - P_v . sum(a_u)
            acc = fetch.parity(v, v)
            for u in tail_cols:
                r_vu, _ = unmix_pair(gf, fetch.parity(v, u), fetch.parity(u, v))
                acc ^= r_vu
            for u in tail_cols:
                acc ^= gf.dot(P[v - 1], tail[u])
            out[v - 1] = _solve_from_group(params, fetch, f, v, group, acc)

    return RepairReport(
        failed_node=f,
        recovered=out,
        downloads=fetch.ledger(),
        predicted=predicted_bandwidth(params, f),
    )


def repair_parity_node(params: CodeParams, f: int, shares) -> RepairReport:
    """Rebuild parity node ``f``.

    Column ``c = f - k`` of the data is fetched whole, giving ``P_u . a_c``
    for every ``u``. Piggybacks in column ``c`` (present only when
    ``c >= r-L+2``) need the data of one group in columns ``1..c-1``.
    """
    f = _check_node(params, f)
    k, r, L = params.k, params.r, params.L
    if f <= k:
        raise ValueError(f"node {f} is not a parity node")
    gf = params.field
    P = params.parity_matrix
    fetch = _Fetcher(params, shares, f)
    c = f - k

    a_c = np.array([fetch.data(s, c) for s in range(1, k + 1)], dtype=np.int64)
    pa = {u: gf.dot(P[u - 1], a_c) for u in range(1, r + 1)}

    piggy = {}
    if c >= r - L + 2:
        t = r + 1 - c
        group = params.group(t)
        for u in range(1, c):
            q = piggy_vector(params, u, t)
            piggy[u] = 0
            for s in group:
                piggy[u] ^= gf.mul(int(q[s - 1]), fetch.data(s, u))

    out = np.zeros(r, dtype=np.int64)
    out[c - 1] = pa[c]
    alpha_inv = gf.inv(gf.alpha)
    for u in range(1, r + 1):
        if u == c:
            continue
        r_uc = pa[u] ^ piggy.get(u, 0)
        stored = fetch.parity(u, c)
        if u < c:
            r_cu = gf.mul(alpha_inv, stored ^ r_uc)
            out[u - 1] = r_cu ^ r_uc
        else:
            r_cu = stored ^ r_uc
            out[u - 1] = r_cu ^ gf.mul(gf.alpha, r_uc)

    return RepairReport(
        failed_node=f,
        recovered=out,
        downloads=fetch.ledger(),
        predicted=predicted_bandwidth(params, f),
    )


def repair_node(params: CodeParams, f: int, shares) -> RepairReport:
    f = _check_node(params, f)
    if f <= params.k:
        return repair_data_node(params, f, shares)
    return repair_parity_node(params, f, shares)
