"""Conjugate-piggybacking MDS array codes over GF(2^m)."""

from .analysis import (
    BandwidthProfile,
    comparator_bounds,
    exact_profile,
    gamma_par_closed,
    gamma_sys_closed,
    node_bandwidth,
    optimal_L,
)
from .code import CodedStripe, CodeParams, encode, make_params
from .decode import (
    FieldTooSmallError,
    NotDecodableError,
    decode_generic,
    decode_structured,
    verify_mds,
)
from .estimator import ConjugatePiggybackCode
from .galois import GaloisField, SingularMatrixError, build_field
from .repair import RepairReport, predicted_bandwidth, repair_node
from .sim import SimConfig, simulate, sweep_rate

__all__ = [
    "BandwidthProfile",
    "CodeParams",
    "CodedStripe",
    "ConjugatePiggybackCode",
    "FieldTooSmallError",
    "GaloisField",
    "NotDecodableError",
    "RepairReport",
    "SimConfig",
    "SingularMatrixError",
    "build_field",
    "comparator_bounds",
    "decode_generic",
    "decode_structured",
    "encode",
    "exact_profile",
    "gamma_par_closed",
    "gamma_sys_closed",
    "make_params",
    "node_bandwidth",
    "optimal_L",
    "predicted_bandwidth",
    "repair_node",
    "simulate",
    "sweep_rate",
    "verify_mds",
]
