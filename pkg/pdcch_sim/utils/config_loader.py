"""Scenario YAML loading and conversion into a ``SimConfig``.

Shared by every command that takes a ``--config`` scenario file. Parsing errors carry the key
path that failed (``ScenarioError.loc``) so ``validate`` can point at the offending snippet.
"""

from pathlib import Path
from typing import Any

import numpy as np
import typer
import yaml

from ..src.dci_codec import Standard
from ..src.link_chain import ChainConfig, EstimationMode
from ..src.phy_channel import ChannelProfile
from ..src.resource_map import DmrsAccounting
from ..src.sim_harness import SimConfig
from .constants import (
    DEFAULT_BANDWIDTH_MHZ,
    DEFAULT_CARRIER_FREQ_HZ,
    DEFAULT_DCI_BITS,
    DEFAULT_LIST_SIZE,
    DEFAULT_MASTER_SEED,
    DEFAULT_MAX_BLOCKS,
    DEFAULT_MIN_BLOCK_ERRORS,
    DEFAULT_WAVA_ITERATIONS,
)
from .errors import ConfigurationError, SimulatorError
from .styling import indent_message, red, yellow

TOP_LEVEL_KEYS = {
    "name",
    "standard",
    "aggregation_level",
    "dci_bits",
    "bandwidth_mhz",
    "channel",
    "estimation",
    "cnr_db",
    "stop",
    "master_seed",
    "rnti_masking",
    "dmrs_accounting",
    "coreset_symbols",
    "list_size",
    "wava_iterations",
    "noiseless",
}
CHANNEL_KEYS = {"model", "delay_spread_ns", "speed_kmh", "carrier_freq_mhz", "pdp_csv"}
STOP_KEYS = {"min_block_errors", "max_blocks"}
GRID_KEYS = {"start", "stop", "step"}


class ScenarioError(ConfigurationError):
    """A scenario key is missing, unknown or holds an invalid value."""

    def __init__(self, loc: list[str], msg: str):
        self.loc = loc
        super().__init__(f"{'.'.join(loc)}: {msg}" if loc else msg)


def load_yaml(file: Path) -> tuple[dict | None, str | None]:
    """Read a YAML file and return ``(data, None)`` or ``(None, error_message)``."""
    try:
        with file.open("r") as f:
            data = yaml.safe_load(f)
        return data, None
    except Exception as e:
        return None, str(e)


def _check_keys(section: dict, allowed: set[str], loc: list[str]) -> None:
    for key in section:
        if key not in allowed:
            raise ScenarioError([*loc, str(key)], f"unknown key; expected one of {sorted(allowed)}")


def _section(data: dict, key: str, allowed: set[str]) -> dict:
    value = data.get(key) or {}
    if not isinstance(value, dict):
        raise ScenarioError([key], "must be a mapping")
    _check_keys(value, allowed, [key])
    return value


def _number(value: Any, loc: list[str]) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ScenarioError(loc, f"expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, loc: list[str]) -> int:
    number = _number(value, loc)
    if number != int(number):
        raise ScenarioError(loc, f"expected an integer, got {value!r}")
    return int(number)


def _flag(value: Any, loc: list[str]) -> bool:
    if not isinstance(value, bool):
        raise ScenarioError(loc, f"expected true/false, got {value!r}")
    return value


def _choice(enum: Any, value: Any, loc: list[str]) -> Any:
    try:
        return enum(str(value).lower())
    except ValueError:
        choices = ", ".join(e.value for e in enum)
        raise ScenarioError(loc, f"{value!r} is not one of {choices}") from None


def parse_cnr_grid(value: Any) -> tuple[float, ...]:
    """A list of dB points, or ``{start, stop, step}`` with ``stop`` included."""
    if isinstance(value, dict):
        _check_keys(value, GRID_KEYS, ["cnr_db"])
        missing = sorted(GRID_KEYS - value.keys())
        if missing:
            raise ScenarioError(["cnr_db", missing[0]], "required")
        start = _number(value["start"], ["cnr_db", "start"])
        stop = _number(value["stop"], ["cnr_db", "stop"])
        step = _number(value["step"], ["cnr_db", "step"])
        if step <= 0:
            raise ScenarioError(["cnr_db", "step"], "must be positive")
        points = np.arange(start, stop + step / 2, step)
        return tuple(round(float(p), 6) for p in points)
    if isinstance(value, list):
        return tuple(_number(v, ["cnr_db", str(i)]) for i, v in enumerate(value))
    raise ScenarioError(["cnr_db"], "must be a list or a {start, stop, step} mapping")


def _channel(data: dict, base_dir: Path | None) -> ChannelProfile:
    section = _section(data, "channel", CHANNEL_KEYS)
    spread = section.get("delay_spread_ns")
    carrier_mhz = section.get("carrier_freq_mhz", DEFAULT_CARRIER_FREQ_HZ / 1e6)
    try:
        profile = ChannelProfile.named(
            str(section.get("model", "awgn")).replace("_", "-"),
            None if spread is None else _number(spread, ["channel", "delay_spread_ns"]) * 1e-9,
            _number(section.get("speed_kmh", 0.0), ["channel", "speed_kmh"]),
            _number(carrier_mhz, ["channel", "carrier_freq_mhz"]) * 1e6,
        )
    except ScenarioError:
        raise
    except SimulatorError as e:
        raise ScenarioError(["channel", "model"], str(e)) from e
    pdp_csv = section.get("pdp_csv")
    if pdp_csv is not None:
        path = Path(str(pdp_csv))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            profile = profile.with_pdp_csv(path)
        except SimulatorError as e:
            raise ScenarioError(["channel", "pdp_csv"], str(e)) from e
    return profile


def parse_sim_config(data: Any, base_dir: Path | None = None) -> SimConfig:
    """Convert parsed YAML into a ``SimConfig``; ``base_dir`` anchors relative PDP paths."""
    if not isinstance(data, dict):
        raise ScenarioError([], "scenario must be a mapping of keys to values")
    _check_keys(data, TOP_LEVEL_KEYS, [])
    for key in ("standard", "aggregation_level", "cnr_db"):
        if key not in data:
            raise ScenarioError([key], "required")

    def opt_int(key: str, default: int) -> int:
        return _integer(data.get(key, default), [key])

    coreset_symbols = data.get("coreset_symbols")
    bandwidth = data.get("bandwidth_mhz", DEFAULT_BANDWIDTH_MHZ)
    stop = _section(data, "stop", STOP_KEYS)
    try:
        chain = ChainConfig(
            standard=_choice(Standard, data["standard"], ["standard"]),
            aggregation_level=opt_int("aggregation_level", 0),
            dci_bits=opt_int("dci_bits", DEFAULT_DCI_BITS),
            bandwidth_mhz=_number(bandwidth, ["bandwidth_mhz"]),
            coreset_symbols=None
            if coreset_symbols is None
            else _integer(coreset_symbols, ["coreset_symbols"]),
            dmrs_accounting=_choice(
                DmrsAccounting,
                data.get("dmrs_accounting", DmrsAccounting.FORMULA.value),
                ["dmrs_accounting"],
            ),
            channel=_channel(data, base_dir),
            estimation=_choice(
                EstimationMode,
                data.get("estimation", EstimationMode.IDEAL.value),
                ["estimation"],
            ),
            rnti_masking=_flag(data.get("rnti_masking", False), ["rnti_masking"]),
            list_size=opt_int("list_size", DEFAULT_LIST_SIZE),
            wava_iterations=opt_int("wava_iterations", DEFAULT_WAVA_ITERATIONS),
        )
        return SimConfig(
            chain=chain,
            cnr_grid=parse_cnr_grid(data["cnr_db"]),
            min_block_errors=_integer(
                stop.get("min_block_errors", DEFAULT_MIN_BLOCK_ERRORS),
                ["stop", "min_block_errors"],
            ),
            max_blocks=_integer(stop.get("max_blocks", DEFAULT_MAX_BLOCKS), ["stop", "max_blocks"]),
            master_seed=opt_int("master_seed", DEFAULT_MASTER_SEED),
            noiseless=_flag(data.get("noiseless", False), ["noiseless"]),
            name=str(data.get("name", "")),
        )
    except ScenarioError:
        raise
    except SimulatorError as e:
        raise ScenarioError([], str(e)) from e


def load_sim_config(path: Path) -> tuple[SimConfig, dict]:
    """Load and parse a scenario file, exiting cleanly on failure."""
    if not path.exists():
        typer.echo(red(f"File not found: {path}"))
        raise typer.Exit(code=1)

    data, err = load_yaml(path)
    if err is not None:
        typer.echo(red(f"Invalid YAML: {err}"))
        raise typer.Exit(code=1)

    try:
        return parse_sim_config(data, path.parent), data or {}
    except ScenarioError as e:
        typer.echo(red("❌ Invalid scenario"))
        typer.echo(yellow(indent_message(str(e))))
        raise typer.Exit(code=1)
