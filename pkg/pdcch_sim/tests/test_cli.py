from typer.testing import CliRunner

from pdcch_sim.src.cli import app

runner = CliRunner()


def test_help():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    assert "pdcch-sim" in result.output
    for command in ("sweep", "threshold", "validate", "coderate", "goldens"):
        assert command in result.output


def test_every_command_has_help():
    for command in ("sweep", "threshold", "validate", "coderate", "goldens"):
        result = runner.invoke(app, [command, "--help"])
        assert result.exit_code == 0, f"'{command}' is not registered"
