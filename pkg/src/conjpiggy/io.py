"""Text formats for stripes and repair reports, and byte <-> symbol packing.

Stripe file::

    {"format": "conjpiggy-stripe", "version": 1, "n": 14, ...}
    0a 3f 00 c1
    ...

The header is one JSON line; each following line is one node (row 1
first) as space-separated fixed-width hex symbols.
"""

from __future__ import annotations

import json

import numpy as np

from .code import CodedStripe, Stage, make_params
from .galois import build_field
from .repair import RepairReport

__all__ = [
    "STRIPE_FORMAT",
    "dump_stripe",
    "load_stripe",
    "dump_report",
    "load_report",
    "symbol_width",
    "bytes_to_symbols",
    "symbols_to_bytes",
]

STRIPE_FORMAT = "conjpiggy-stripe"
REPORT_FORMAT = "conjpiggy-repair"
VERSION = 1


def symbol_width(m: int) -> int:
    """Hex digits per symbol: 2 up to m=8, else 4."""
    return 2 if m <= 8 else 4


def _hex_row(row, width) -> str:
    return " ".join(f"{int(v):0{width}x}" for v in row)


def dump_stripe(stripe: CodedStripe, orig_len: int | None = None) -> str:
    p = stripe.params
    f = p.field
    header = {
        "format": STRIPE_FORMAT,
        "version": VERSION,
        "n": p.n,
        "k": p.k,
        "L": p.L,
        "m": f.m,
        "poly": f"{f.reduction_poly:#x}",
        "alpha": f.alpha,
        "stage": stripe.stage.value,
        "orig_len": orig_len,
        "indexing": "row i is node i (1-based)",
    }
    width = symbol_width(f.m)
    lines = [json.dumps(header)]
    lines += [_hex_row(row, width) for row in stripe.symbols]
    return "\n".join(lines) + "\n"


def _parse_hex_row(line: str, expected: int, limit: int, lineno: int) -> list[int]:
    toks = line.split()
    if len(toks) != expected:
        raise ValueError(f"line {lineno}: expected {expected} symbols, got {len(toks)}")
    try:
        vals = [int(t, 16) for t in toks]
    except ValueError:
        raise ValueError(f"line {lineno}: malformed hex symbol") from None
    if any(v >= limit for v in vals):
        raise ValueError(f"line {lineno}: symbol outside the field")
    return vals


def load_stripe(text: str) -> tuple[CodedStripe, dict]:
    """Parse :func:`dump_stripe` output. Returns the stripe and its header."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty stripe file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad stripe header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != STRIPE_FORMAT:
        raise ValueError("not a stripe file")
    if header.get("version") != VERSION:
        raise ValueError(f"unsupported stripe version {header.get('version')}")
    try:
        n, k, L, m = (int(header[key]) for key in ("n", "k", "L", "m"))
        poly = int(str(header["poly"]), 16)
        alpha = int(header.get("alpha", 2))
        stage = Stage(header["stage"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad stripe header: {exc}") from None
    field = build_field(m, poly, alpha)
    params = make_params(n, k, L, field, warn=False)
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError(f"expected {n} rows, got {len(rows)}")
    sym = [_parse_hex_row(line, params.r, field.order, i + 2) for i, line in enumerate(rows)]
    return CodedStripe(params, np.array(sym, dtype=np.int64), stage), header


def dump_report(report: RepairReport, m: int = 8) -> str:
    width = symbol_width(m)
    lines = [
        f"# {REPORT_FORMAT} v{VERSION}",
        f"failed_node {report.failed_node}",
        f"bandwidth {report.bandwidth}",
        f"predicted {report.predicted}",
        f"recovered {_hex_row(report.recovered, width)}",
        "downloads node col value",
    ]
    lines += [f"{n} {c} {v:0{width}x}" for n, c, v in report.sorted_downloads()]
    return "\n".join(lines) + "\n"


def load_report(text: str) -> RepairReport:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 6 or not lines[0].startswith(f"# {REPORT_FORMAT}"):
        raise ValueError("not a repair report")
    fields = {}
    for line in lines[1:5]:
        key, _, rest = line.partition(" ")
        fields[key] = rest
    try:
        failed = int(fields["failed_node"])
        bandwidth = int(fields["bandwidth"])
        predicted = int(fields["predicted"])
        recovered = np.array([int(t, 16) for t in fields["recovered"].split()], dtype=np.int64)
        downloads = []
        for line in lines[6:]:
            n, c, v = line.split()
            downloads.append((int(n), int(c), int(v, 16)))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed repair report: {exc}") from None
    if len(downloads) != bandwidth:
        raise ValueError(f"report lists {len(downloads)} downloads but bandwidth {bandwidth}")
    return RepairReport(failed, recovered, downloads, predicted)


def bytes_to_symbols(data: bytes, m: int) -> np.ndarray:
    """One symbol per byte for m <= 8, little-endian 16-bit units otherwise."""
    if m <= 8:
        arr = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
        if m < 8 and arr.size and arr.max() >= 1 << m:
            raise ValueError(f"byte value does not fit GF(2^{m})")
        return arr
    if len(data) % 2:
        raise ValueError("input length must be a multiple of 2 bytes for m > 8")
    arr = np.frombuffer(data, dtype="<u2").astype(np.int64)
    if m < 16 and arr.size and arr.max() >= 1 << m:
        raise ValueError(f"16-bit unit does not fit GF(2^{m})")
    return arr


def symbols_to_bytes(symbols, m: int) -> bytes:
    arr = np.asarray(symbols, dtype=np.int64).ravel()
    if m <= 8:
        return arr.astype(np.uint8).tobytes()
    return arr.astype("<u2").tobytes()
