"""Command-line interface: ``renormcf SUBCOMMAND --spec ... [options]``."""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import __version__
from .numerics import get_precision, working_precision
from .report import build_report, error_payload, exit_status, to_csv, to_json


def _fraction(ctx, param, value):
    if value is None:
        return Fraction(0)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"expected an integer or P/Q, got {value!r}") from None


def _common(func):
    options = [
        click.option("--spec", "spec", required=True, help="Number spec, e.g. cf:2;(2), rat:2/5, rec:pow2sq, golden."),
        click.option("--depth", type=click.IntRange(min=1), default=10, show_default=True,
                     help="Indices (or blocks, for orbit and sum) to compute."),
        click.option("--precision", type=click.IntRange(min=64), default=None,
                     help="Working precision in bits [default: $RENORM_CF_PRECISION or 256]."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                     help="Output file (default stdout)."),
    ]
    for opt in reversed(options):
        func = opt(func)
    return func


def _run(subcommand: str, spec: str, depth: int, precision, fmt: str, out, **kw) -> None:
    prec = precision if precision is not None else get_precision()
    if prec < 64:
        raise click.BadParameter("precision must be at least 64 bits", param_hint="--precision")
    with working_precision(prec):
        rep = build_report(subcommand, spec, depth, version=__version__, **kw)
    text = to_json(rep) if fmt == "json" else to_csv(rep)
    if rep.error is not None and not rep.rows and exit_status(rep.error) == 2:
        text = ""
    if text:
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
    if rep.error is not None:
        click.echo(json.dumps(error_payload(rep)), err=True)
        sys.exit(exit_status(rep.error))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="renormcf")
def main() -> None:
    """Validated continued-fraction and renormalization reports."""


@main.command()
@_common
def expand(spec, depth, precision, fmt, out):
    """Entries a_j and convergents p_j/q_j for j = 0..depth."""
    _run("expand", spec, depth, precision, fmt, out)


@main.command()
@_common
def criterion(spec, depth, precision, fmt, out):
    """log q_{j+1}/q_j for j = 1..depth, with the trend verdict in the metadata."""
    _run("criterion", spec, depth, precision, fmt, out)


@main.command()
@_common
def brjuno(spec, depth, precision, fmt, out):
    """Terms log q_{j+1}/q_j and their partial sums for j = 0..depth."""
    _run("brjuno", spec, depth, precision, fmt, out)


@main.command()
@_common
def lemma(spec, depth, precision, fmt, out):
    """The criterion next to its three equivalent sequences and the sandwich bounds."""
    _run("lemma", spec, depth, precision, fmt, out)


@main.command()
@_common
@click.option("--steps", is_flag=True, help="One row per orbit step instead of per block.")
def orbit(spec, depth, precision, fmt, out, steps):
    """Backward orbit of k0 under T^-1, block by block."""
    _run("orbit", spec, depth, precision, fmt, out, steps=steps)


@main.command(name="sum")
@_common
@click.option("--a0", callback=_fraction, default=None, help="Initial a (integer or P/Q).")
@click.option("--A0", "A0", callback=_fraction, default=None, help="Initial A (integer or P/Q).")
def sum_(spec, depth, precision, fmt, out, a0, A0):
    """Direct and reordered partial sums, tail terms and the residual A0 - k0 a0 - S."""
    _run("sum", spec, depth, precision, fmt, out, a0=a0, A0=A0)


if __name__ == "__main__":
    main()
