from pathlib import Path

import typer

from ..utils.constants import DEFAULT_TARGET_BLER
from ..utils.errors import call_or_exit
from ..utils.styling import bold, green, yellow
from .sim_harness import interpolate_threshold, read_result_csv


def threshold(
    results: list[Path] = typer.Argument(..., help="Sweep CSV files written by `sweep`"),
    target: float = typer.Option(DEFAULT_TARGET_BLER, "--target", "-t", help="Target BLER"),
):
    """
    Interpolate the CNR at which each sweep reaches the target BLER.

    With several files, gaps are reported relative to the first one.
    """
    thresholds: list[float] = []
    for path in results:
        result = call_or_exit(read_result_csv, path)
        cnr = call_or_exit(interpolate_threshold, result, target)
        thresholds.append(cnr)
        typer.echo(green(f"{path.name}: {cnr:.2f} dB @ BLER {target:g}"))

    if len(thresholds) > 1:
        typer.echo(bold(f"Gaps relative to {results[0].name}:"))
        for path, cnr in zip(results[1:], thresholds[1:], strict=True):
            typer.echo(yellow(f"  {path.name}: {cnr - thresholds[0]:+.2f} dB"))
