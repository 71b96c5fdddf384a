"""Arithmetic and dense linear algebra over GF(2^m).

Field elements are plain ``int`` values in ``[0, 2**m)``; vectors and
matrices are numpy integer arrays. Multiplication goes through exp/log
tables, which also vectorize over arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_POLYS",
    "GaloisField",
    "SingularMatrixError",
    "build_field",
    "gf_add",
    "gf_mul",
    "gf_inv",
    "gf_pow",
    "solve_linear",
    "invert_matrix",
    "is_invertible",
    "rank",
]

# Primitive polynomials with x (= 2) as generator. For m=8 the usual 0x11D
# is avoided: it leaves C(14, 10, 3) two erasure patterns short of MDS.
DEFAULT_POLYS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x165,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


class SingularMatrixError(ArithmeticError):
    """Raised when a linear system over the field has no unique solution."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


def _poly_mod(a: int, b: int) -> int:
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every GF(2) polynomial of degree <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if _poly_mod(poly, d) == 0:
            return False
    return True


@dataclass(frozen=True, eq=False)
class GaloisField:
    """GF(2^m) defined by ``reduction_poly`` with generator ``alpha``.

    Use :func:`build_field` to construct; it validates the polynomial and
    the generator. Instances are immutable and safe to share.
    """

    m: int
    reduction_poly: int
    alpha: int = 2
    exp_table: np.ndarray = field(repr=False, default=None)
    log_table: np.ndarray = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return 1 << self.m

    @property
    def group_order(self) -> int:
        return (1 << self.m) - 1

    @property
    def dtype(self):
        return np.uint8 if self.m <= 8 else np.uint16

    def __eq__(self, other):
        if not isinstance(other, GaloisField):
            return NotImplemented
        return (self.m, self.reduction_poly, self.alpha) == (
            other.m,
            other.reduction_poly,
            other.alpha,
        )

    def __hash__(self):
        return hash((self.m, self.reduction_poly, self.alpha))

    def check(self, a: int) -> int:
        a = int(a)
        if not 0 <= a < self.order:
            raise ValueError(f"{a} is not an element of GF(2^{self.m})")
        return a

    # scalar ops

    def add(self, a: int, b: int) -> int:
        return int(a) ^ int(b)

    def mul(self, a: int, b: int) -> int:
        a, b = int(a), int(b)
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        a = int(a)
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(self.exp_table[self.group_order - int(self.log_table[a])])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        a = int(a)
        if a == 0:
            if e <= 0:
                raise ZeroDivisionError("0 cannot be raised to a non-positive power")
            return 0
        return int(self.exp_table[(int(self.log_table[a]) * e) % self.group_order])

    def alpha_pow(self, e: int) -> int:
        """alpha**e for any integer e."""
        return int(self.exp_table[e % self.group_order])

    # array ops

    def asarray(self, a) -> np.ndarray:
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValueError(f"values out of range for GF(2^{self.m})")
        return arr.astype(np.int64)

    def vmul(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        # log(0) is a sentinel that lands in the zero tail of exp_table
        return self.exp_table[self.log_table[a] + self.log_table[b]]

    def dot(self, a, b) -> int:
        return int(np.bitwise_xor.reduce(self.vmul(a, b), axis=None)) if len(a) else 0

    def matmul(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        vec = B.ndim == 1
        if vec:
            B = B[:, None]
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
        if A.shape[1] == 0:
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        else:
            out = np.bitwise_xor.reduce(self.vmul(A[:, :, None], B[None, :, :]), axis=1)
        return out[:, 0] if vec else out


def _generate_tables(m: int, poly: int, alpha: int):
    q1 = (1 << m) - 1
    exp = np.zeros(4 * q1 + 1, dtype=np.int64)
    log = np.zeros(1 << m, dtype=np.int64)
    x = 1
    for i in range(q1):
        if i > 0 and x == 1:
            return None
        exp[i] = x
        log[x] = i
        # x *= alpha, shift-and-add
        acc, a, b = 0, x, alpha
        while b:
            if b & 1:
                acc ^= a
            b >>= 1
            a <<= 1
            if a >> m:
                a ^= poly
        x = acc
    if x != 1:
        return None
    exp[q1 : 2 * q1] = exp[:q1]
    # any sum involving log[0] is >= 2*q1, where exp is zero
    log[0] = 2 * q1
    exp.flags.writeable = False
    log.flags.writeable = False
    return exp, log


def build_field(m: int, reduction_poly: int | None = None, alpha: int = 2) -> GaloisField:
    """Build GF(2^m) and verify that ``alpha`` is a primitive element.

    >>> f = build_field(8)
    >>> hex(f.reduction_poly), f.alpha
    ('0x165', 2)
    """
    if not isinstance(m, (int, np.integer)) or not 2 <= m <= 16:
        raise ValueError(f"extension degree m must be in [2, 16], got {m!r}")
    m = int(m)
    if reduction_poly is None:
        reduction_poly = DEFAULT_POLYS[m]
    reduction_poly = int(reduction_poly)
    if reduction_poly.bit_length() - 1 != m:
        raise ValueError(f"reduction polynomial {reduction_poly:#x} does not have degree {m}")
    if not is_irreducible(reduction_poly):
        raise ValueError(f"reduction polynomial {reduction_poly:#x} is reducible over GF(2)")
    if not 1 < alpha < (1 << m):
        raise ValueError(f"generator {alpha} out of range")
    tables = _generate_tables(m, reduction_poly, alpha)
    if tables is None:
        raise ValueError(f"{alpha} is not primitive modulo {reduction_poly:#x}")
    exp, log = tables
    return GaloisField(m=m, reduction_poly=reduction_poly, alpha=alpha, exp_table=exp, log_table=log)


def gf_add(f: GaloisField, a: int, b: int) -> int:
    return f.add(f.check(a), f.check(b))


def gf_mul(f: GaloisField, a: int, b: int) -> int:
    return f.mul(f.check(a), f.check(b))


def gf_inv(f: GaloisField, a: int) -> int:
    return f.inv(f.check(a))


def gf_pow(f: GaloisField, a: int, e: int) -> int:
    return f.pow(f.check(a), e)


def _eliminate(f: GaloisField, M: np.ndarray, ncols: int):
    """Reduce ``M`` in place to reduced row echelon form on its first
    ``ncols`` columns. Returns the pivot columns."""
    rows = M.shape[0]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
        M[r] = f.vmul(M[r], f.inv(int(M[r, c])))
        factors = M[:, c].copy()
        factors[r] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            M[hit] ^= f.vmul(factors[hit, None], M[r][None, :])
        pivots.append(c)
        r += 1
    return pivots


def rank(f: GaloisField, A) -> int:
    M = np.array(A, dtype=np.int64, copy=True)
    if M.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return len(_eliminate(f, M, M.shape[1]))


def solve_linear(f: GaloisField, A, b) -> np.ndarray:
    """Solve ``A x = b`` by Gauss-Jordan elimination.

    ``b`` may be a vector or a matrix of right-hand sides (one per column).
    Pivots are the first nonzero entry scanning down each column.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    vec = b.ndim == 1
    B = b[:, None] if vec else b
    if B.shape[0] != n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {n}")
    M = np.concatenate([A, B], axis=1)
    piv = _eliminate(f, M, n)
    if len(piv) < n:
        raise SingularMatrixError(f"singular {n}x{n} matrix (rank {len(piv)})", rank=len(piv))
    x = M[:, n:]
    return x[:, 0] if vec else x


def invert_matrix(f: GaloisField, A) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    return solve_linear(f, A, np.eye(A.shape[0], dtype=np.int64))


def is_invertible(f: GaloisField, A) -> bool:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    return rank(f, A) == A.shape[0]
