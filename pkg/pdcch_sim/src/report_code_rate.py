import typer

from ..utils.constants import DEFAULT_BANDWIDTH_MHZ, DEFAULT_DCI_BITS
from ..utils.errors import call_or_exit
from ..utils.styling import bold, indent_message
from .dci_codec import Standard
from .link_chain import DEFAULT_CONTROL_SYMBOLS
from .resource_map import CoresetConfig, DmrsAccounting, code_rate_report


def coderate(
    standard: Standard = typer.Option(..., "--standard", "-s", help="lte or nr"),
    aggregation_level: int = typer.Option(1, "--al", help="Aggregation level"),
    dci_bits: int = typer.Option(DEFAULT_DCI_BITS, "--dci-bits", help="DCI payload length"),
    bandwidth_mhz: float = typer.Option(DEFAULT_BANDWIDTH_MHZ, "--bandwidth", help="MHz"),
    coreset_symbols: int | None = typer.Option(None, "--symbols", help="Control symbols"),
    dmrs_accounting: DmrsAccounting = typer.Option(
        DmrsAccounting.FORMULA,
        "--dmrs",
        help="NR pilot accounting: formula or geometry",
    ),
):
    """
    Print the resource and effective-code-rate accounting for one PDCCH.
    """
    symbols = coreset_symbols or DEFAULT_CONTROL_SYMBOLS[standard]
    cfg = call_or_exit(
        CoresetConfig,
        standard,
        aggregation_level,
        bandwidth_mhz,
        symbols,
        dmrs_accounting,
    )
    report = code_rate_report(dci_bits, cfg)

    typer.echo(bold(f"{standard.value.upper()} AL{aggregation_level} at {bandwidth_mhz:g} MHz"))
    lines = [
        f"REs: {cfg.total_res} ({cfg.regs} REGs x {cfg.res_per_reg}), "
        f"{cfg.dmrs_res} carry DMRS",
        f"CORESET: {cfg.rb_count} RBs x {cfg.coreset_symbols} symbols",
        f"DCI + CRC: {report.dci_bits} + {report.crc_bits} bits",
        f"Rate-matched length E: {report.available_bits} bits",
        f"Effective code rate: {report.effective_cr} ≈ {float(report.effective_cr):.4f}",
    ]
    typer.echo(indent_message("\n".join(lines)))
