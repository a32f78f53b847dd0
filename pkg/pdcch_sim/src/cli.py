import typer

from .emit_goldens import goldens
from .find_threshold import threshold
from .report_code_rate import coderate
from .sweep_scenario import sweep
from .validate_scenario import validate

app = typer.Typer(help="pdcch-sim – LTE eMBMS vs NR PDCCH link-level simulator.")

app.command(name="sweep")(sweep)
app.command(name="threshold")(threshold)
app.command(name="validate")(validate)
app.command(name="coderate")(coderate)
app.command(name="goldens")(goldens)
