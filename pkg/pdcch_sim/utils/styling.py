import math

import typer


# Colors
def red(msg):
    return typer.style(msg, fg=typer.colors.RED, bold=True)


def green(msg):
    return typer.style(msg, fg=typer.colors.GREEN, bold=True)


def yellow(msg):
    return typer.style(msg, fg=typer.colors.YELLOW, bold=True)


def bold(msg):
    return typer.style(msg, bold=True)


def indent_message(msg: str, indent: str = "  ") -> str:
    return "\n".join(indent + line for line in msg.splitlines())


def format_rate(value: float) -> str:
    """Error rates in scientific notation; exact zero stays readable."""
    if value == 0:
        return "0"
    return f"{value:.3e}"


def format_cnr(cnr_db: float) -> str:
    if math.isinf(cnr_db):
        return "noiseless"
    return f"{cnr_db:+.2f} dB"


def point_summary(cnr_db: float, blocks: int, block_errors: int, bler: float, ber: float) -> str:
    """One styled progress line per CNR point; green once BLER is at or below 1e-3."""
    line = (
        f"CNR {format_cnr(cnr_db)}: {block_errors}/{blocks} blocks failed, "
        f"BLER {format_rate(bler)}, BER {format_rate(ber)}"
    )
    if bler <= 1e-3:
        return green(line)
    return line
