from dataclasses import replace
from pathlib import Path

import typer

from ..utils.config_loader import load_sim_config
from ..utils.errors import call_or_exit
from ..utils.styling import bold, format_cnr, green, point_summary
from .sim_harness import SimConfig, check_config, run_sweep, write_result_csv


class _PointProgress:
    """Renders one progress bar per CNR point from the harness callback."""

    def __init__(self, max_blocks: int):
        self.max_blocks = max_blocks
        self.cnr_db: float | None = None
        self.done = 0
        self.bar = None

    def __call__(self, cnr_db: float, blocks: int, block_errors: int) -> None:
        if cnr_db != self.cnr_db:
            self.close()
            self.bar = typer.progressbar(length=self.max_blocks, label=format_cnr(cnr_db))
            self.bar.__enter__()
            self.cnr_db, self.done = cnr_db, 0
        if self.bar is not None:
            self.bar.update(blocks - self.done)
        self.done = blocks

    def close(self) -> None:
        if self.bar is not None:
            self.bar.__exit__(None, None, None)
            self.bar = None


def _describe(cfg: SimConfig) -> str:
    chain = cfg.chain
    channel = chain.channel.model.value.upper()
    if chain.channel.speed_kmh:
        channel += f" @ {chain.channel.speed_kmh:g} km/h"
    return (
        f"{chain.standard.value.upper()} AL{chain.aggregation_level}, {channel}, "
        f"{chain.estimation.value} estimation, {len(cfg.cnr_grid)} CNR points"
    )


def sweep(
    config: Path = typer.Option(..., "--config", "-c", help="Scenario YAML file"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (overrides the scenario)"),
    workers: int = typer.Option(1, "--workers", "-w", min=1, help="Worker processes"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Result CSV (default: <name>.csv)"),
):
    """
    Run a BLER/BER sweep over the scenario's CNR grid.
    """
    cfg, _ = load_sim_config(config)
    if seed is not None:
        cfg = call_or_exit(replace, cfg, master_seed=seed)
    call_or_exit(check_config, cfg)

    typer.echo(bold(f"Sweeping {cfg.name or config.stem}: {_describe(cfg)}"))
    progress = _PointProgress(cfg.max_blocks)
    try:
        result = call_or_exit(run_sweep, cfg, workers, progress)
    finally:
        progress.close()

    for p in result.points:
        typer.echo(point_summary(p.cnr_db, p.blocks, p.block_errors, p.bler, p.ber))

    out = out or Path(f"{config.stem}.csv")
    write_result_csv(result, out)
    typer.echo(green(f"✅ Results written to {out}"))
