"""Conjugate-piggybacking code parameters and the three-stage encoder.

A stripe is an ``n x r`` array: rows are nodes, columns are the ``r``
instances of the base ``(n, k, 1)`` systematic code. Rows ``1..k`` hold the
data, rows ``k+1..k+r`` the parities. Node, column and group indices are
1-based in every public function; arrays are of course 0-based, so
``stripe[node - 1, col - 1]`` is the symbol at ``(node, col)``.

Encoding runs three linear stages:

* ``G1``: column ``j`` is a codeword of the base code, parity ``k+i``
  holding ``P_i . a_j`` with ``P_i = (alpha^i, alpha^2i, ..., alpha^ki)``.
* ``G2``: piggybacks ``q_{j,t} . a_j`` are added to parity
  ``(k+j, r-t+1)`` for ``t < L`` and ``j <= r-t``.
* ``G3``: each symmetric pair of parity symbols is mixed by the invertible
  map ``(x, y) -> (x + alpha*y, x + y)``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .galois import GaloisField, build_field

__all__ = [
    "CodeParams",
    "CodedStripe",
    "FieldBoundWarning",
    "Stage",
    "group_sizes",
    "make_params",
    "parity_vector",
    "piggy_vector",
    "piggyback_assignments",
    "piggyback_source",
    "encode_base",
    "apply_piggyback",
    "conjugate_transform",
    "inverse_conjugate",
    "encode",
]


class FieldBoundWarning(UserWarning):
    """The field order does not exceed k*r^2, so MDS is not guaranteed
    analytically and has to be checked by search."""


class Stage(str, enum.Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"


def group_sizes(k: int, L: int) -> tuple[int, ...]:
    """Split ``k`` data nodes into ``L`` contiguous groups, larger ones first."""
    base, extra = divmod(k, L)
    return tuple(base + 1 if i <= extra else base for i in range(1, L + 1))


@dataclass(frozen=True)
class CodeParams:
    """Validated ``(n, k, L)`` over a given field. Build with :func:`make_params`."""

    n: int
    k: int
    L: int
    field: GaloisField

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def subpacketization(self) -> int:
        return self.r

    @cached_property
    def group_sizes(self) -> tuple[int, ...]:
        return group_sizes(self.k, self.L)

    @cached_property
    def group_bounds(self) -> tuple[tuple[int, int], ...]:
        """Inclusive 1-based ``(first, last)`` data node of every group."""
        bounds, start = [], 1
        for size in self.group_sizes:
            bounds.append((start, start + size - 1))
            start += size
        return tuple(bounds)

    def group(self, t: int) -> range:
        """Data nodes of group ``t`` (1-based)."""
        if not 1 <= t <= self.L:
            raise IndexError(f"group {t} out of range [1, {self.L}]")
        lo, hi = self.group_bounds[t - 1]
        return range(lo, hi + 1)

    def group_of(self, node: int) -> int:
        if not 1 <= node <= self.k:
            raise IndexError(f"data node {node} out of range [1, {self.k}]")
        for t, (lo, hi) in enumerate(self.group_bounds, start=1):
            if lo <= node <= hi:
                return t
        raise AssertionError("unreachable")

    @property
    def meets_field_bound(self) -> bool:
        """Whether field order > k*r^2, the sufficient condition for MDS."""
        return self.field.order > self.k * self.r**2

    @cached_property
    def parity_matrix(self) -> np.ndarray:
        """``r x k`` array whose row ``i-1`` is ``P_i``."""
        i = np.arange(1, self.r + 1)[:, None]
        d = np.arange(1, self.k + 1)[None, :]
        return self.field.exp_table[(i * d) % self.field.group_order]

    def describe(self) -> str:
        f = self.field
        bound = "holds" if self.meets_field_bound else "fails (verify by search)"
        return (
            f"C(n={self.n}, k={self.k}, L={self.L}) over GF(2^{f.m}) poly={f.reduction_poly:#x}, "
            f"groups={self.group_sizes}, field bound 2^m > kr^2={self.k * self.r**2}: {bound}"
        )


def make_params(n: int, k: int, L: int, field: GaloisField | int = 8, warn: bool = True) -> CodeParams:
    """Validate ``(n, k, L)`` and bind it to a field.

    ``field`` may be a :class:`GaloisField` or an extension degree ``m``.
    A :class:`FieldBoundWarning` is emitted when ``2^m <= k r^2``.
    """
    if not isinstance(field, GaloisField):
        field = build_field(int(field))
    n, k, L = int(n), int(k), int(L)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    r = n - k
    if not 2 <= L <= r:
        raise ValueError(f"L must satisfy 2 <= L <= r={r}, got {L}")
    if L > k:
        raise ValueError(f"L={L} exceeds k={k}; some group would be empty")
    if field.order < n:
        raise ValueError(f"GF(2^{field.m}) has fewer than n={n} elements")
    params = CodeParams(n=n, k=k, L=L, field=field)
    if warn and not params.meets_field_bound:
        warnings.warn(
            f"field order {field.order} <= k*r^2 = {k * r * r}; MDS must be verified by search",
            FieldBoundWarning,
            stacklevel=2,
        )
    return params


def _check_parity_index(params: CodeParams, i: int) -> None:
    if not 1 <= i <= params.r:
        raise IndexError(f"parity index {i} out of range [1, {params.r}]")


def parity_vector(params: CodeParams, i: int) -> np.ndarray:
    """``P_i``: entry ``d`` (1-based) is ``alpha^(d*i)``."""
    _check_parity_index(params, i)
    return params.parity_matrix[i - 1].copy()


def piggy_vector(params: CodeParams, i: int, t: int) -> np.ndarray:
    """``q_{i,t}``: ``P_i`` restricted to group ``t``, zero elsewhere."""
    _check_parity_index(params, i)
    g = params.group(t)
    q = np.zeros(params.k, dtype=np.int64)
    q[g.start - 1 : g.stop - 1] = params.parity_matrix[i - 1, g.start - 1 : g.stop - 1]
    return q


def piggyback_assignments(params: CodeParams) -> list[tuple[int, int, int]]:
    """``(row j, target column, group t)`` for every piggyback.

    Parity ``(k+j, r-t+1)`` receives ``q_{j,t} . a_j``.
    """
    r = params.r
    return [(j, r - t + 1, t) for t in range(1, params.L) for j in range(1, r - t + 1)]


def piggyback_source(params: CodeParams, i: int, j: int) -> int | None:
    """Group ``t`` whose piggyback sits in ``R(i, j)``, or None.

    Piggybacks live only in columns ``j >= r-L+2`` and strictly above the
    diagonal (``i < j``), with ``t = r + 1 - j``.
    """
    r = params.r
    if i < j and j >= r - params.L + 2:
        return r + 1 - j
    return None


def _check_data(params: CodeParams, data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.shape != (params.k, params.r):
        raise ValueError(f"data must have shape ({params.k}, {params.r}), got {arr.shape}")
    return params.field.asarray(arr)


@dataclass(frozen=True, eq=False)
class CodedStripe:
    """An ``n x r`` stripe tagged with the encoding stage it is in."""

    params: CodeParams
    symbols: np.ndarray
    stage: Stage

    def __post_init__(self):
        sym = np.array(self.symbols, dtype=np.int64)
        p = self.params
        if sym.shape != (p.n, p.r):
            raise ValueError(f"stripe must have shape ({p.n}, {p.r}), got {sym.shape}")
        sym.flags.writeable = False
        object.__setattr__(self, "symbols", sym)
        object.__setattr__(self, "stage", Stage(self.stage))

    @property
    def data(self) -> np.ndarray:
        return self.symbols[: self.params.k]

    @property
    def parity(self) -> np.ndarray:
        """The ``r x r`` parity region; entry ``[i-1, j-1]`` is R(i,j) or P(i,j)."""
        return self.symbols[self.params.k :]

    def node(self, node: int) -> np.ndarray:
        if not 1 <= node <= self.params.n:
            raise IndexError(f"node {node} out of range [1, {self.params.n}]")
        return self.symbols[node - 1]

    def shares(self, exclude=()) -> dict[int, np.ndarray]:
        """Map node -> stored row, skipping ``exclude``."""
        skip = set(exclude)
        return {i: self.symbols[i - 1] for i in range(1, self.params.n + 1) if i not in skip}

    def __eq__(self, other):
        if not isinstance(other, CodedStripe):
            return NotImplemented
        return (
            self.params == other.params
            and self.stage == other.stage
            and np.array_equal(self.symbols, other.symbols)
        )


def _require_stage(stripe: CodedStripe, stage: Stage) -> None:
    if stripe.stage != stage:
        raise ValueError(f"expected a {stage.value} stripe, got {stripe.stage.value}")


def encode_base(params: CodeParams, data) -> CodedStripe:
    """Stage G1: ``r`` independent codewords of the base systematic code."""
    a = _check_data(params, data)
    parity = params.field.matmul(params.parity_matrix, a)
    return CodedStripe(params, np.vstack([a, parity]), Stage.G1)


def apply_piggyback(params: CodeParams, g1: CodedStripe) -> CodedStripe:
    _require_stage(g1, Stage.G1)
    f = params.field
    sym = np.array(g1.symbols)
    a = sym[: params.k]
    for j, col, t in piggyback_assignments(params):
        sym[params.k + j - 1, col - 1] ^= f.dot(piggy_vector(params, j, t), a[:, j - 1])
    return CodedStripe(params, sym, Stage.G2)


def _mix(f: GaloisField, R: np.ndarray) -> np.ndarray:
    upper = np.triu(np.ones(R.shape, dtype=bool), 1)
    lower = upper.T
    RT = R.T
    P = R.copy()
    P[upper] ^= f.vmul(f.alpha, RT[upper])
    P[lower] ^= RT[lower]
    return P


def conjugate_transform(params: CodeParams, g2: CodedStripe) -> CodedStripe:
    """Stage G3: ``P(i,j) = R(i,j) + alpha R(j,i)`` above the diagonal,
    ``R(i,j) + R(j,i)`` below it, unchanged on it."""
    _require_stage(g2, Stage.G2)
    sym = np.array(g2.symbols)
    sym[params.k :] = _mix(params.field, sym[params.k :])
    return CodedStripe(params, sym, Stage.G3)


def unmix_pair(f: GaloisField, p_ij: int, p_ji: int) -> tuple[int, int]:
    """Recover ``(R(i,j), R(j,i))`` for ``i < j`` from ``(P(i,j), P(j,i))``.

    Inverse of ``[[1, alpha], [1, 1]]``, whose determinant is ``1 + alpha``.
    """
    det_inv = f.inv(1 ^ f.alpha)
    r_ji = f.mul(p_ij ^ p_ji, det_inv)
    r_ij = p_ji ^ r_ji
    return r_ij, r_ji


def inverse_conjugate(params: CodeParams, g3: CodedStripe) -> CodedStripe:
    _require_stage(g3, Stage.G3)
    f = params.field
    sym = np.array(g3.symbols)
    P = sym[params.k :]
    R = P.copy()
    upper = np.triu(np.ones(P.shape, dtype=bool), 1)
    PT = P.T
    det_inv = f.inv(1 ^ f.alpha)
    # R(j,i) = (P(i,j) + P(j,i)) / (1 + alpha), R(i,j) = P(j,i) + R(j,i)
    r_low = f.vmul(P[upper] ^ PT[upper], det_inv)
    R.T[upper] = r_low
    R[upper] = PT[upper] ^ r_low
    sym[params.k :] = R
    return CodedStripe(params, sym, Stage.G2)


def encode(params: CodeParams, data) -> CodedStripe:
    """Encode a ``k x r`` data array into the final G3 stripe."""
    return conjugate_transform(params, apply_piggyback(params, encode_base(params, data)))
