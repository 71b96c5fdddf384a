"""``conjpiggy`` command-line tool.

Exit codes: 0 ok, 2 usage error, 3 data error (bad file, wrong length,
inconsistent stripe), 4 math error (singular system, MDS failure,
bandwidth mismatch).
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import io as stripe_io
from .analysis import comparator_bounds, exact_profile, field_size_thresholds, optimal_L, render
from .code import Stage, encode, make_params
from .decode import decode_generic, decode_structured, verify_mds
from .repair import repair_node
from .sim import TABLE3_GRID, SimConfig, rows_to_csv, simulate, sweep_rate, sweep_to_csv

EXIT_DATA = 3
EXIT_MATH = 4


class DataError(click.ClickException):
    exit_code = EXIT_DATA


class MathError(click.ClickException):
    exit_code = EXIT_MATH


def _guard(fn):
    """Map library exceptions onto exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ArithmeticError as exc:
            raise MathError(str(exc)) from exc
        except (ValueError, IndexError, LookupError, OSError) as exc:
            raise DataError(str(exc)) from exc

    return wrapper


def _code_options(fn):
    for opt in reversed(
        [
            click.option("--n", "n", type=int, default=14, show_default=True, help="Code length."),
            click.option("--k", "k", type=int, default=10, show_default=True, help="Data nodes."),
            click.option("--L", "L", type=int, default=3, show_default=True, help="Piggyback groups."),
            click.option("--m", "m", type=click.IntRange(2, 16), default=8, show_default=True,
                         help="Field GF(2^m)."),
        ]
    ):
        fn = opt(fn)
    return fn


def _params(n, k, L, m):
    try:
        return make_params(n, k, L, m, warn=False)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _node_list(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return sorted({int(tok) for tok in text.replace(" ", "").split(",") if tok})
    except ValueError:
        raise click.UsageError(f"bad node list {text!r}; expected e.g. 1,5,12") from None


def _write_text(out, text: str):
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_stripe(path):
    with click.open_file(path, "r", encoding="utf-8") as fh:
        return stripe_io.load_stripe(fh.read())


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Conjugate-piggybacking MDS array codes."""


@main.command("encode")
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@_code_options
@click.option("--pad", is_flag=True, help="Zero-pad short input up to k*r symbols.")
@click.option("--seed", type=int, default=None, help="Ignored; accepted for flag uniformity.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Stripe file (default stdout).")
@_guard
def encode_cmd(input_path, n, k, L, m, pad, seed, out):
    """Encode INPUT into a stripe file.

    The input must hold exactly k*r symbols. At m <= 8 a symbol is one
    byte; for m > 8 it is a little-endian 2-byte unit, so the input length
    must be even. Symbols fill the k x r data array node by node.
    """
    params = _params(n, k, L, m)
    with click.open_file(input_path, "rb") as fh:
        raw = fh.read()
    symbols = stripe_io.bytes_to_symbols(raw, m)
    need = params.k * params.r
    if symbols.size > need or (symbols.size < need and not pad):
        raise DataError(f"input holds {symbols.size} symbols, need exactly {need} (use --pad for shorter input)")
    data = np.zeros(need, dtype=np.int64)
    data[: symbols.size] = symbols
    stripe = encode(params, data.reshape(params.k, params.r))
    _write_text(out, stripe_io.dump_stripe(stripe, orig_len=len(raw)))
    bound = "holds" if params.meets_field_bound else "fails, verify by search"
    click.echo(
        f"encoded {len(raw)} bytes: n={n} k={k} L={L} r={params.r} over GF(2^{m}) "
        f"poly={params.field.reduction_poly:#x}; field bound 2^m > kr^2: {bound}",
        err=out is None,
    )


@main.command("decode")
@click.argument("stripe_path", metavar="STRIPE", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.option("--erase", default="", help="Comma-separated nodes to treat as lost, e.g. 1,5,12.")
@click.option("--decoder", type=click.Choice(["structured", "generic"]), default="structured", show_default=True)
@click.option("--fallback/--no-fallback", default=True, show_default=True,
              help="Fall back to the generic solver when a structured column solve is singular.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
@_guard
def decode_cmd(stripe_path, erase, decoder, fallback, out):
    """Recover the original bytes from STRIPE with --erase nodes removed."""
    stripe, header = _read_stripe(stripe_path)
    params = stripe.params
    if stripe.stage != Stage.G3:
        raise DataError(f"stripe is at stage {stripe.stage.value}, expected G3")
    erased = _node_list(erase)
    if any(not 1 <= x <= params.n for x in erased):
        raise click.UsageError(f"--erase nodes must lie in [1, {params.n}]")
    if len(erased) > params.r:
        raise DataError(f"{len(erased)} erasures exceed r={params.r}")
    shares = stripe.shares(erased)
    if decoder == "generic":
        data = decode_generic(params, shares)
    else:
        data = decode_structured(params, shares, fallback=fallback)
    payload = stripe_io.symbols_to_bytes(data, params.field.m)
    orig_len = header.get("orig_len")
    if orig_len is not None:
        payload = payload[: int(orig_len)]
    if out is None:
        click.get_binary_stream("stdout").write(payload)
    else:
        with open(out, "wb") as fh:
            fh.write(payload)
        click.echo(f"decoded {len(payload)} bytes with nodes {erased or 'none'} erased")


@main.command("repair")
@click.argument("stripe_path", metavar="STRIPE", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.option("--fail", "failed", type=int, required=True, help="Node to rebuild (1-based).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the repair report here.")
@_guard
def repair_cmd(stripe_path, failed, out):
    """Rebuild one node of STRIPE and report the symbols downloaded.

    Exits 4 if the measured bandwidth differs from the closed form, and 3
    if the rebuilt node disagrees with the copy in the file.
    """
    stripe, _ = _read_stripe(stripe_path)
    params = stripe.params
    if not 1 <= failed <= params.n:
        raise click.BadParameter(f"must lie in [1, {params.n}]", param_hint="--fail")
    if stripe.stage != Stage.G3:
        raise DataError(f"stripe is at stage {stripe.stage.value}, expected G3")
    report = repair_node(params, failed, stripe.shares([failed]))
    if out is not None:
        _write_text(out, stripe_io.dump_report(report, params.field.m))
    match = bool(np.array_equal(report.recovered, stripe.node(failed)))
    click.echo(
        f"node {failed}: bandwidth {report.bandwidth}, predicted {report.predicted}, "
        f"matches stored: {'yes' if match else 'no'}"
    )
    if not report.consistent:
        raise MathError(f"measured bandwidth {report.bandwidth} != predicted {report.predicted}")
    if not match:
        raise DataError(f"rebuilt node {failed} differs from the stored copy")


@main.command("verify")
@_code_options
@click.option("--cap", type=int, default=10**6, show_default=True, help="Refuse more erasure patterns than this.")
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True)
@click.option("--show", type=int, default=10, show_default=True, help="Failures to list.")
@_guard
def verify_cmd(n, k, L, m, cap, workers, show):
    """Check every r-node erasure pattern for decodability."""
    params = _params(n, k, L, m)
    try:
        report = verify_mds(params, cap=cap, workers=workers)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(report.summary())
    for pattern in report.failures[:show]:
        click.echo("  not decodable: erased " + ",".join(map(str, pattern)))
    if not report.is_mds:
        raise MathError(f"not MDS over GF(2^{m}) with poly {params.field.reduction_poly:#x}")


@main.command("analyze")
@click.option("--r", "r", type=click.IntRange(2), required=True, help="Parity nodes.")
@click.option("--k", "k", type=click.IntRange(1), default=None, help="Data nodes (omit for k -> infinity).")
@click.option("--L", "L", type=int, default=None, help="Groups for the exact profile (default: optimal).")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of a table.")
@_guard
def analyze_cmd(r, k, L, as_json):
    """Optimal L, exact repair ratios and comparator lower bounds."""
    best = optimal_L(r, k)
    L = best if L is None else L
    if k is not None and not 2 <= L <= min(r, k):
        raise click.UsageError(f"L must satisfy 2 <= L <= min(r, k) = {min(r, k)}")
    bounds = comparator_bounds(k, r)
    profile = exact_profile(k, r, L) if k is not None else None
    if as_json:
        doc = {
            "r": r,
            "k": k,
            "optimal_L": best,
            "bounds": [{"code": b.code, "kind": b.kind, "value": b.value} for b in bounds],
        }
        if profile is not None:
            doc["profile"] = {
                "L": L,
                "per_node": list(profile.per_node),
                "gamma_sys": float(profile.gamma_sys),
                "gamma_par": float(profile.gamma_par),
                "gamma_all": float(profile.gamma_all),
                "rs_reduction": float(profile.rs_reduction),
            }
            doc["field_thresholds"] = field_size_thresholds(k + r, k)
        click.echo(json.dumps(doc, indent=2, default=str))
        return
    click.echo(f"optimal L = {best}")
    if profile is not None:
        click.echo(
            f"(k={k}, r={r}, L={L}): gamma_sys={render(profile.gamma_sys, 4)} "
            f"gamma_par={render(profile.gamma_par, 4)} gamma_all={render(profile.gamma_all, 4)} "
            f"reduction={render(profile.rs_reduction * 100, 1)}%"
        )
    scope = "k -> infinity" if k is None else f"k = {k}"
    click.echo(f"lower bounds on average repair ratio ({scope}):")
    click.echo(f"  {'code':<12} {'nodes':<7} value")
    for b in bounds:
        click.echo(f"  {b.code:<12} {b.kind:<7} {b.value:.4f}")


def _parse_grid_row(text):
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError:
        parts = []
    if len(parts) not in (3, 4):
        raise click.UsageError(f"--row expects k,r,L[,m], got {text!r}")
    return tuple(parts) if len(parts) == 4 else (*parts, 8)


@main.command("simulate")
@click.option("--table3", is_flag=True, help="Use the built-in seven-row grid.")
@click.option("--row", "rows", multiple=True, metavar="K,R,L[,M]", help="Grid entry; repeatable.")
@click.option("--mode", type=click.Choice(["formula", "execute"]), default="formula", show_default=True)
@click.option("--trials", type=click.IntRange(1), default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--verify/--no-verify", default=True, show_default=True,
              help="Gate execute-mode rows on the exhaustive MDS search.")
@click.option("--workers", type=click.IntRange(1), default=1, show_default=True)
@click.option("--sweep", default=None, metavar="KMIN:KMAX",
              help="Emit plot data for k in KMIN..KMAX at --r/--L instead.")
@click.option("--r", "sweep_r", type=int, default=4, show_default=True, help="r for --sweep.")
@click.option("--L", "sweep_L", type=int, default=3, show_default=True, help="L for --sweep.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (default stdout).")
@_guard
def simulate_cmd(table3, rows, mode, trials, seed, verify, workers, sweep, sweep_r, sweep_L, out):
    """Repair traffic under uniform single-node failures, as CSV."""
    if sweep is not None:
        try:
            lo, hi = (int(x) for x in sweep.split(":"))
        except ValueError:
            raise click.UsageError("--sweep expects KMIN:KMAX") from None
        try:
            data = sweep_rate(sweep_r, range(lo, hi + 1), sweep_L)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        _write_text(out, sweep_to_csv(data))
        return
    if table3 and rows:
        raise click.UsageError("--table3 and --row are mutually exclusive")
    grid = list(TABLE3_GRID) if table3 else [_parse_grid_row(x) for x in rows]
    if not grid:
        raise click.UsageError("give --table3 or at least one --row")
    try:
        config = SimConfig(grid, mode=mode, trials=trials, seed=seed, verify=verify, workers=workers)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    result = simulate(config)
    _write_text(out, rows_to_csv(result, seed=seed))
    aborted = [r for r in result if r.note]
    for r in aborted:
        click.echo(f"row (k={r.k}, r={r.r}, L={r.L}): {r.note}", err=True)
    if any(r.consistent is False for r in result):
        sys.exit(EXIT_MATH)


if __name__ == "__main__":
    main()
