from pathlib import Path
from typing import Any

import typer
import yaml

from ..utils.config_loader import ScenarioError, load_yaml, parse_sim_config
from ..utils.errors import SimulatorError
from ..utils.styling import bold, green, indent_message, red, yellow
from .resource_map import code_rate_report
from .sim_harness import check_config


def get_yaml_snippet(data: Any, loc: list[str]) -> dict[str, Any] | None:
    try:
        for idx, key in enumerate(loc):
            if isinstance(data, list):
                data = data[int(key)]
                continue
            if key not in data:
                return {loc[idx - 1]: data} if idx else None
            data = data[key]
        return {loc[-1]: data} if loc else None
    except Exception:
        return None


def validate(file: Path = typer.Argument(..., help="Scenario YAML file to validate")):
    """
    Validate a scenario file and check that its geometry is feasible.
    """
    if not file.exists():
        typer.echo(red(f"File not found: {file}"))
        raise typer.Exit(code=1)

    data, err = load_yaml(file)
    if err is not None:
        typer.echo(red(f"Invalid YAML: {err}"))
        raise typer.Exit(code=1)

    try:
        cfg = parse_sim_config(data, file.parent)
        chain = check_config(cfg)
    except ScenarioError as e:
        typer.echo(red("❌ Validation failed\n"))
        typer.echo(bold(yellow(f"Error at: {'.'.join(e.loc) or '<root>'}")))
        typer.echo(red(indent_message(str(e))))
        snippet = get_yaml_snippet(data, e.loc)
        if snippet is not None:
            typer.echo(bold("\nYAML snippet:"))
            typer.echo(yaml.dump(snippet, sort_keys=False, default_flow_style=False))
        raise typer.Exit(code=1)
    except SimulatorError as e:
        typer.echo(red("❌ Validation failed\n"))
        typer.echo(red(indent_message(str(e))))
        raise typer.Exit(code=1)

    report = code_rate_report(cfg.chain.dci_bits, chain.coreset)
    typer.echo(green("✅ Validation passed!"))
    typer.echo(
        indent_message(
            f"E = {chain.rm_len} bits, mother code {chain.mother_len} bits, "
            f"effective code rate {report.effective_cr}",
        ),
    )
