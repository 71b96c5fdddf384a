"""Reconstruct data from any ``k`` surviving nodes, and check MDS by search.

Two independent decoders are provided. :func:`decode_generic` linearizes
the code (:func:`symbol_coefficients`) and solves the ``kr x kr`` system;
:func:`decode_structured` peels the stripe column by column using the code
structure, solving only ``t x t`` systems where ``t`` is the number of
erased data nodes.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .code import CodeParams, parity_vector, piggy_vector, piggyback_source, unmix_pair
from .galois import SingularMatrixError, invert_matrix, rank, solve_linear

__all__ = [
    "NotDecodableError",
    "FieldTooSmallError",
    "MDSReport",
    "StructuredDecodePlan",
    "symbol_coefficients",
    "generator_matrix",
    "decode_generic",
    "decode_structured",
    "plan_structured",
    "pattern_is_decodable",
    "verify_mds",
]

DEFAULT_PATTERN_CAP = 10**6


class NotDecodableError(ArithmeticError):
    """The surviving nodes do not determine the data."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class FieldTooSmallError(ArithmeticError):
    """A per-column system of the structured decoder is singular."""

    def __init__(self, message, column):
        super().__init__(message)
        self.column = column


def symbol_coefficients(params: CodeParams, node: int, col: int) -> np.ndarray:
    """Coefficients of the G3 symbol at ``(node, col)`` over the data.

    The data is flattened row-major: ``a_{s,c}`` sits at ``(s-1)*r + c-1``.
    """
    k, r = params.k, params.r
    if not 1 <= node <= params.n:
        raise IndexError(f"node {node} out of range [1, {params.n}]")
    if not 1 <= col <= r:
        raise IndexError(f"column {col} out of range [1, {r}]")
    if node <= k:
        e = np.zeros(k * r, dtype=np.int64)
        e[(node - 1) * r + col - 1] = 1
        return e
    f = params.field

    def r_coeffs(i, j):
        # R(i,j) = P_i . a_j (+ q_{i,t} . a_i)
        c = np.zeros((k, r), dtype=np.int64)
        c[:, j - 1] = parity_vector(params, i)
        t = piggyback_source(params, i, j)
        if t is not None:
            c[:, i - 1] ^= piggy_vector(params, i, t)
        return c.reshape(-1)

    i, j = node - k, col
    if i == j:
        return r_coeffs(i, j)
    if i < j:
        return r_coeffs(i, j) ^ f.vmul(f.alpha, r_coeffs(j, i))
    return r_coeffs(i, j) ^ r_coeffs(j, i)


@lru_cache(maxsize=64)
def _generator(params: CodeParams) -> np.ndarray:
    G = np.vstack(
        [
            symbol_coefficients(params, node, col)
            for node in range(1, params.n + 1)
            for col in range(1, params.r + 1)
        ]
    )
    G.flags.writeable = False
    return G


def generator_matrix(params: CodeParams) -> np.ndarray:
    """``nr x kr`` matrix; row ``(node-1)*r + col-1`` is :func:`symbol_coefficients`."""
    return _generator(params).copy()


def _normalize_shares(params: CodeParams, shares) -> dict[int, np.ndarray]:
    out = {}
    for node, row in shares.items():
        node = int(node)
        if not 1 <= node <= params.n:
            raise IndexError(f"node {node} out of range [1, {params.n}]")
        row = np.asarray(row)
        if row.shape != (params.r,):
            raise ValueError(f"node {node} must supply {params.r} symbols, got shape {row.shape}")
        out[node] = params.field.asarray(row)
    return out


@lru_cache(maxsize=4096)
def _system_inverse(params: CodeParams, nodes: tuple[int, ...]) -> np.ndarray:
    r = params.r
    G = _generator(params)
    rows = [(node - 1) * r + c for node in nodes for c in range(r)]
    try:
        inv = invert_matrix(params.field, G[rows])
    except SingularMatrixError as exc:
        raise NotDecodableError(
            f"nodes {list(nodes)} do not determine the data (rank {exc.rank} < {params.k * r})",
            nodes,
        ) from None
    inv.flags.writeable = False
    return inv


def decode_generic(params: CodeParams, shares) -> np.ndarray:
    """Recover the ``k x r`` data from the first ``k`` supplied nodes.

    ``shares`` maps 1-based node index to that node's ``r`` symbols.
    """
    shares = _normalize_shares(params, shares)
    if len(shares) < params.k:
        raise ValueError(f"need at least k={params.k} nodes, got {len(shares)}")
    nodes = tuple(sorted(shares)[: params.k])
    y = np.concatenate([shares[i] for i in nodes])
    x = params.field.matmul(_system_inverse(params, nodes), y)
    return x.reshape(params.k, params.r)


@dataclass(frozen=True)
class StructuredDecodePlan:
    """Erasure bookkeeping for the structured decoder (1-based indices)."""

    erased_data: tuple[int, ...]
    surviving_parity_rows: tuple[int, ...]
    mixed_columns: tuple[int, ...]
    tail_columns: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.erased_data)


def plan_structured(params: CodeParams, nodes) -> StructuredDecodePlan:
    """Plan for decoding from ``nodes``; surplus parity nodes (highest
    index first) are dropped so exactly ``k`` nodes are used."""
    k, r = params.k, params.r
    nodes = sorted(set(int(x) for x in nodes))
    if len(nodes) < k:
        raise ValueError(f"need at least k={k} nodes, got {len(nodes)}")
    data_alive = [x for x in nodes if x <= k]
    parity_alive = [x - k for x in nodes if x > k]
    erased_data = tuple(x for x in range(1, k + 1) if x not in set(data_alive))
    t = len(erased_data)
    rows = tuple(parity_alive[:t])
    top = rows[-1] if rows else 0
    mixed = tuple(v for v in range(1, top + 1) if v not in rows)
    tail = tuple(range(top + 1, r + 1))
    return StructuredDecodePlan(erased_data, rows, mixed, tail)


def decode_structured(params: CodeParams, shares, fallback: bool = False) -> np.ndarray:
    """Recover the data column by column from the code structure.

    With ``t`` erased data nodes and surviving parity rows
    ``i_1 < ... < i_t``: (a) unmix the ``t^2`` symbols among those rows,
    (b) solve columns ``i_1, ..., i_t`` in order, peeling piggybacks whose
    source column is already known, (c) solve columns after ``i_t``, and
    (d) solve the remaining columns before ``i_t``, whose systems carry
    piggyback terms on the unknown column.

    Raises :class:`FieldTooSmallError` if a column system is singular,
    unless ``fallback`` is set, in which case :func:`decode_generic` is used.
    """
    shares = _normalize_shares(params, shares)
    try:
        return _decode_structured(params, shares)
    except FieldTooSmallError:
        if not fallback:
            raise
        return decode_generic(params, shares)


def _decode_structured(params: CodeParams, shares) -> np.ndarray:
    f = params.field
    k, r = params.k, params.r
    plan = plan_structured(params, shares)
    D = plan.erased_data
    I = plan.surviving_parity_rows
    a = np.zeros((k, r), dtype=np.int64)
    for s in range(1, k + 1):
        if s in shares:
            a[s - 1] = shares[s]
    if not D:
        return a
    P = params.parity_matrix
    known = np.ones(k, dtype=bool)
    known[[s - 1 for s in D]] = False
    erased_idx = [s - 1 for s in D]

    def stored(i, j):
        return int(shares[k + i][j - 1])

    def pdot(i, col):
        return f.dot(P[i - 1], a[:, col - 1])

    def piggy(i, j):
        t = piggyback_source(params, i, j)
        if t is None:
            return 0
        return f.dot(piggy_vector(params, i, t), a[:, i - 1])

    def solve_column(col, coeffs, values):
        # subtract surviving data, solve for the erased rows of this column
        coeffs = np.asarray(coeffs, dtype=np.int64)
        rhs = np.array(values, dtype=np.int64)
        rhs ^= f.matmul(coeffs[:, known], a[known, col - 1])
        try:
            x = solve_linear(f, coeffs[:, erased_idx], rhs)
        except SingularMatrixError:
            raise FieldTooSmallError(
                f"column {col}: {len(D)}x{len(D)} system singular for erased data {list(D)}",
                column=col,
            ) from None
        a[erased_idx, col - 1] = x

    # (a) R(i_u, i_v) among surviving parity rows
    R = {}
    for u, iu in enumerate(I):
        R[iu, iu] = stored(iu, iu)
        for iv in I[u + 1 :]:
            R[iu, iv], R[iv, iu] = unmix_pair(f, stored(iu, iv), stored(iv, iu))

    # (b) columns i_1 < ... < i_t; piggybacks in R(i_u, i_v) come from
    # column i_u < i_v, already solved
    for c in I:
        values = [R[iu, c] ^ piggy(iu, c) for iu in I]
        solve_column(c, P[[iu - 1 for iu in I]], values)

    # (c) columns after i_t: R(v, i_u) = P_v . a_{i_u} carries no piggyback
    for v in plan.tail_columns:
        values = []
        for iu in I:
            r_vi = pdot(v, iu)
            values.append(stored(iu, v) ^ f.mul(f.alpha, r_vi) ^ piggy(iu, v))
        solve_column(v, P[[iu - 1 for iu in I]], values)

    # (d) columns before i_t that are not surviving parity rows
    for v in plan.mixed_columns:
        coeffs, values = [], []
        for iu in I:
            if iu < v:
                r_vi = pdot(v, iu)
                values.append(stored(iu, v) ^ f.mul(f.alpha, r_vi) ^ piggy(iu, v))
                coeffs.append(P[iu - 1])
            else:
                # P(i_u, v) = P_{i_u} . a_v + P_v . a_{i_u} + q_{v,t} . a_v
                values.append(stored(iu, v) ^ pdot(v, iu))
                row = P[iu - 1].copy()
                t = piggyback_source(params, v, iu)
                if t is not None:
                    row ^= piggy_vector(params, v, t)
                coeffs.append(row)
        solve_column(v, coeffs, values)
    return a


def pattern_is_decodable(params: CodeParams, erased) -> bool:
    """Whether the data is determined once the nodes in ``erased`` are lost.

    Surviving data rows are unit vectors, so the full ``kr x kr`` system is
    invertible exactly when the surviving parity symbols, restricted to the
    unknowns of the erased data rows, form an invertible ``tr x tr`` block.
    """
    k, r = params.k, params.r
    erased = set(erased)
    survivors = [x for x in range(1, params.n + 1) if x not in erased]
    if len(survivors) < k:
        return False
    D = [s for s in range(1, k + 1) if s in erased]
    if not D:
        return True
    parity_alive = [x for x in survivors if x > k]
    if len(parity_alive) < len(D):
        return False
    G = _generator(params)
    rows = [(x - 1) * r + c for x in parity_alive for c in range(r)]
    cols = [(s - 1) * r + c for s in D for c in range(r)]
    return rank(params.field, G[np.ix_(rows, cols)]) == len(cols)


@dataclass
class MDSReport:
    patterns_checked: int
    failures: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def is_mds(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return f"{self.patterns_checked} patterns, {len(self.failures)} failures"


def verify_mds(params: CodeParams, cap: int = DEFAULT_PATTERN_CAP, workers: int = 1) -> MDSReport:
    """Check every ``r``-node erasure pattern for decodability."""
    total = math.comb(params.n, params.r)
    if total > cap:
        raise ValueError(f"{total} erasure patterns exceed the cap of {cap}")
    patterns = itertools.combinations(range(1, params.n + 1), params.r)

    def check(p):
        return None if pattern_is_decodable(params, p) else p

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, patterns, chunksize=64))
    else:
        results = [check(p) for p in patterns]
    failures = sorted(p for p in results if p is not None)
    return MDSReport(patterns_checked=total, failures=failures)
