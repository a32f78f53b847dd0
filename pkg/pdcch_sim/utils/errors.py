"""Exception hierarchy shared by the simulator modules, plus the CLI-side wrapper.

Library code raises these; commands never catch them individually. Every command routes
its simulator calls through ``call_or_exit`` so a bad scenario or an infeasible geometry
renders the same ``❌ <message>`` line and exit code 1 everywhere.
"""

from collections.abc import Callable
from typing import TypeVar

import typer

from .styling import red

T = TypeVar("T")


class SimulatorError(ValueError):
    """Base class for every error raised by the simulator modules."""


class FormatError(SimulatorError):
    """A bit/LLR/symbol sequence has the wrong length or shape."""


class ConfigurationError(SimulatorError):
    """A parameter combination is invalid or geometrically infeasible."""


class UnsupportedError(ConfigurationError):
    """A parameter lies outside the range the simulator implements."""


class RangeError(SimulatorError):
    """A requested target lies outside the measured data."""


def call_or_exit(func: Callable[..., T], *args: object, **kwargs: object) -> T:
    """Invoke a simulator function, exiting cleanly on ``SimulatorError``."""
    try:
        return func(*args, **kwargs)
    except SimulatorError as e:
        typer.echo(red(f"❌ {e}"))
        raise typer.Exit(code=1)
