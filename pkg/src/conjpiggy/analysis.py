"""Closed-form repair-bandwidth ratios and comparator bounds.

Ratios of the proposed code are exact :class:`~fractions.Fraction` values.
Comparator bounds involving square roots are floats. Passing ``k=None``
to a comparator function evaluates its ``k -> infinity`` limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

from .code import CodeParams, group_sizes

__all__ = [
    "BandwidthProfile",
    "ComparatorBound",
    "node_bandwidth",
    "exact_profile",
    "gamma_sys_closed",
    "gamma_par_closed",
    "gamma_sys_limit",
    "optimal_L",
    "msr_bound",
    "comparator_bounds",
    "first_code23_ratio",
    "field_size_thresholds",
    "oop_margins",
    "c1_parity_margin",
    "first_code23_margin",
    "render",
]

TOL = 1e-9


def _klr(params_or_k, r=None, L=None):
    if isinstance(params_or_k, CodeParams):
        return params_or_k.k, params_or_k.r, params_or_k.L
    if r is None or L is None:
        raise TypeError("pass CodeParams or k, r, L")
    k, r, L = int(params_or_k), int(r), int(L)
    if k < 1 or r < 1 or not 1 <= L <= min(k, r):
        raise ValueError(f"invalid (k={k}, r={r}, L={L})")
    return k, r, L


def render(x, places: int) -> str:
    """Decimal rendering with round-half-even on the exact value."""
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


def node_bandwidth(k: int, r: int, L: int, node: int) -> int:
    """Symbols downloaded to repair ``node`` (1-based) of C(k+r, k, L)."""
    sizes = group_sizes(k, L)
    if not 1 <= node <= k + r:
        raise IndexError(f"node {node} out of range [1, {k + r}]")
    if node <= k:
        i, first = 1, 1
        while node >= first + sizes[i - 1]:
            first += sizes[i - 1]
            i += 1
        if i < L:
            return k * i + (r - i) * (sizes[i - 1] + 1)
        return k * (L - 1) + (r - L + 1) * sizes[L - 1] + 2 * (L - 1) * (r - L + 1)
    if node <= k + r - L + 1:
        return k + r - 1
    return k + r - 1 + sizes[k + r + 1 - node - 1] * (node - k - 1)


@dataclass(frozen=True)
class BandwidthProfile:
    k: int
    r: int
    L: int
    per_node: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.k + self.r

    @property
    def avg_data(self) -> Fraction:
        return Fraction(sum(self.per_node[: self.k]), self.k)

    @property
    def avg_parity(self) -> Fraction:
        return Fraction(sum(self.per_node[self.k :]), self.r)

    @property
    def avg_all(self) -> Fraction:
        return Fraction(sum(self.per_node), self.n)

    @property
    def gamma_sys(self) -> Fraction:
        return self.avg_data / (self.k * self.r)

    @property
    def gamma_par(self) -> Fraction:
        return self.avg_parity / (self.k * self.r)

    @property
    def gamma_all(self) -> Fraction:
        return self.avg_all / (self.k * self.r)

    @property
    def rs_reduction(self) -> Fraction:
        return 1 - self.gamma_all

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)


def exact_profile(params_or_k, r=None, L=None) -> BandwidthProfile:
    """Per-node bandwidths and ratios by enumerating every single failure."""
    k, r, L = _klr(params_or_k, r, L)
    per_node = tuple(node_bandwidth(k, r, L, x) for x in range(1, k + r + 1))
    return BandwidthProfile(k, r, L, per_node)


def _require_divides(k, L):
    if k % L:
        raise ValueError(f"closed form needs L | k (k={k}, L={L}); use exact_profile")


def gamma_sys_closed(params_or_k, r=None, L=None) -> Fraction:
    k, r, L = _klr(params_or_k, r, L)
    _require_divides(k, L)
    F = Fraction
    return (
        F(L, 2 * r)
        + F(1, L)
        - F(3, 2 * L * r)
        + F(1, L * L * r)
        + (F(-5, 2) * L * L + 3 * L * r + F(9, 2) * L - 3 * r - 2) / (k * L * r)
    )


def gamma_par_closed(params_or_k, r=None, L=None) -> Fraction:
    k, r, L = _klr(params_or_k, r, L)
    _require_divides(k, L)
    return Fraction(k + r - 1, k * r) + Fraction((L - 1) * (2 * r - L), 2 * L * r * r)


def gamma_sys_limit(r, L):
    """Data-node ratio as ``k -> infinity``; ``L`` may be a real number."""
    if isinstance(L, int):
        L = Fraction(L)
    return L / (2 * r) + 1 / L - 3 / (2 * L * r) + 1 / (L * L * r)


def _gamma_par_limit(r, L):
    return 1 / r + (L - 1) * (2 * r - L) / (2 * L * r * r)


def optimal_L(r: int, k: int | None = None) -> int:
    """Best group count among the two integers around ``sqrt(2r - 1)``.

    Without ``k`` the asymptotic data-node ratio decides; with ``k`` the
    exact all-node ratio does. Ties go to the smaller ``L``.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    root = math.sqrt(2 * r - 1)
    hi = min(k, r) if k is not None else r
    candidates = sorted({min(max(c, 2), hi) for c in (math.floor(root), math.ceil(root))})
    if k is None:
        score = lambda L: gamma_sys_limit(r, L)  # noqa: E731
    else:
        if k < 2:
            raise ValueError("k must be at least 2")
        score = lambda L: exact_profile(k, r, L).gamma_all  # noqa: E731
    return min(candidates, key=lambda L: (score(L), L))


def msr_bound(n: int, k: int, ell: int | None = None) -> Fraction:
    """Minimum repair bandwidth ``(n-1) ell / (n-k)``; ``ell`` defaults to ``r``."""
    r = n - k
    ell = r if ell is None else ell
    return Fraction((n - 1) * ell, r)


@dataclass(frozen=True)
class ComparatorBound:
    code: str
    kind: str
    value: float
    params: dict = field(default_factory=dict)

    def __str__(self):
        extra = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.code:<12} {self.kind:<7} {self.value:.4f}  {extra}"


def first_code23_ratio(m: int, L: int, r: int, k: int | None = None) -> float:
    """All-node ratio of the first code in the 2023 piggybacking family."""
    core = m * m - m * (L + 1) + (L + 1) * (2 * L + 1) / 6
    if k is None:
        return (L + 1) / (2 * m) + core / (L * m * (r - 1))
    return (k + r) * core / (L * m * k * (r - 1)) + (L + 1) / (2 * m) + (m - L) / (m * k)


def _first_code23_min(r, k):
    best = None
    for m in range(2, r):
        for L in range(1, m):
            v = first_code23_ratio(m, L, r, k)
            if best is None or v < best[0]:
                best = (v, m, L)
    return best


def comparator_bounds(k: int | None, r: int) -> list[ComparatorBound]:
    """Evaluate the published bound formulas of related piggybacking codes
    next to the proposed code (``L = sqrt(2r-1)`` taken as a real)."""
    if r < 2:
        raise ValueError("r must be at least 2")
    if k is not None and k < 1:
        raise ValueError("k must be positive")
    inf = k is None
    s = math.sqrt
    out = []

    def add(code, kind, value, **params):
        out.append(ComparatorBound(code, kind, float(value), dict(params)))

    rsr_par = 1 / r + ((r - 1) / (2 * r) if inf else (r - 1) * (k + r - 1) / (2 * k * r))
    add("RSR-I", "data", (r + 1) / (2 * r))
    add("RSR-I", "parity", rsr_par)
    add("RSR-II", "data", (r + 1) / (2 * r - 3))
    add("RSR-II", "parity", rsr_par)
    add("REPB", "data", 2 / (s(r) + 1))
    add("REPB", "parity", 1.0)

    q = s(r - 1)
    add("OOP", "data", (2 * q + 1) / (2 * q + r))
    oop_par = (q + 1) / r + (0 if inf else ((r - 1) ** 2 - s((r - 1) ** 3)) / (k * r))
    add("OOP", "parity", oop_par)

    Ls = s(2 * r - 1)
    add("C0", "data", Ls / (2 * r) + 1 / Ls - 1 / (2 * Ls * r), L_star=round(Ls, 6))
    if inf:
        c0_par = 1 / r + (r - 1) * (Ls + 1) / r**2
    else:
        c0_par = (
            (k + r) / (k * r)
            + 2 * (r - Ls - 1) ** 2 / (k * (4 * r - 3 - Ls))
            + (k * r - k - r) * (Ls + 1) / (k * r * r)
        )
    add("C0", "parity", c0_par, L_star=round(Ls, 6))

    add("C1", "data", gamma_sys_limit(r, Ls), L_star2=round(Ls, 6))
    c1_par = Ls / r + (r - Ls) / r**2
    if not inf:
        denom = ((Ls - 2) * (Ls - 1) + 2 * r - 4) * k * r * r
        c1_par += (r - Ls) * (r - 1) / (k * r * r) + 2 * (r - Ls) ** 2 * (r - 1) ** 2 / denom
    add("C1", "parity", c1_par, L_star2=round(Ls, 6))

    if r >= 3:
        v, m, L = _first_code23_min(r, k)
        add("FirstCode23", "all", v, m=m, L=L)

    data = gamma_sys_limit(r, Ls)
    par = _gamma_par_limit(r, Ls)
    if not inf:
        # finite-k term that matches per-node enumeration exactly
        data += (-2.5 * Ls * Ls + 3 * Ls * r + 4.5 * Ls - 3 * r - 2) / (k * Ls * r)
        par = (k + r - 1) / (k * r) + (Ls - 1) * (2 * r - Ls) / (2 * Ls * r * r)
    add("Proposed", "data", data, L=round(Ls, 6))
    add("Proposed", "parity", par, L=round(Ls, 6))
    all_nodes = data if inf else (k * data + r * par) / (k + r)
    add("Proposed", "all", all_nodes, L=round(Ls, 6))
    return out


def _lookup(bounds, code, kind):
    for b in bounds:
        if b.code == code and b.kind == kind:
            return b.value
    raise KeyError((code, kind))


def oop_margins(r: int) -> tuple[float, float]:
    """OOP bound minus proposed bound (data, parity) as ``k -> infinity``."""
    b = comparator_bounds(None, r)
    return (
        _lookup(b, "OOP", "data") - _lookup(b, "Proposed", "data"),
        _lookup(b, "OOP", "parity") - _lookup(b, "Proposed", "parity"),
    )


def c1_parity_margin(r: int) -> float:
    """C1 parity bound minus proposed parity bound as ``k -> infinity``."""
    b = comparator_bounds(None, r)
    return _lookup(b, "C1", "parity") - _lookup(b, "Proposed", "parity")


def first_code23_margin(r: int) -> float:
    """Grid minimum of the 2023 code minus the proposed all-node bound."""
    b = comparator_bounds(None, r)
    return _lookup(b, "FirstCode23", "all") - _lookup(b, "Proposed", "all")


def field_size_thresholds(n: int, k: int, ell: int | None = None, alpha_star: int | None = None) -> dict:
    """Minimum field sizes for MDS of related constructions.

    ``ell`` is the HashTag sub-packetization (default ``r``); the ET-RS
    entry needs its partition parameter ``alpha_star`` and is omitted
    without it.
    """
    r = n - k
    ell = r if ell is None else ell
    out = {
        "proposed": k * r * r,
        "piggybacking": n,
        "piggybacking+": n,
        "BPD": math.comb(n - 1, k - 1) + 2,
        "HTEC": math.comb(n, k) * r * ell,
    }
    if alpha_star is not None:
        out["ET-RS"] = 2 * (
            math.comb(n - 1, k - 1)
            - math.comb(-(-n // alpha_star) - 1, -(-k // alpha_star) - 1)
        )
    return out
