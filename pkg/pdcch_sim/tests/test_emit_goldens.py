from pathlib import Path

import numpy as np
from typer.testing import CliRunner

from pdcch_sim.src.cli import app
from pdcch_sim.src.dci_codec import DciFormat, crc_check, crc_config_for
from pdcch_sim.src.emit_goldens import write_goldens
from pdcch_sim.src.fec import polar_construct, polar_list_decode, tbcc_decode
from pdcch_sim.utils.bits import text_to_bits

runner = CliRunner()

EXPECTED = {
    "crc16.txt",
    "crc24c.txt",
    "tbcc.txt",
    "polar.txt",
    "lte_rm.txt",
    "nr_rm.txt",
    "scramble.txt",
    "grid_lte_al1.csv",
    "grid_nr_al1.csv",
}


def _pairs(path: Path) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = []
    for line in path.read_text().splitlines():
        left, right = line.split("\t")
        pairs.append((text_to_bits(left), text_to_bits(right)))
    return pairs


def test_goldens_command(tmp_path: Path):
    out = tmp_path / "goldens"
    result = runner.invoke(app, ["goldens", "-o", str(out), "--cases", "3"])
    assert result.exit_code == 0, result.output
    assert f"Writing golden vectors to {out}/" in result.output
    assert "✅ Golden vectors written" in result.output
    assert {p.name for p in out.iterdir()} == EXPECTED
    for name in EXPECTED:
        assert name in result.output
    assert len((out / "tbcc.txt").read_text().splitlines()) == 3
    assert len((out / "scramble.txt").read_text().splitlines()) == 2


def test_goldens_are_seeded(tmp_path: Path):
    a = write_goldens(tmp_path / "a", 5, 4)
    b = write_goldens(tmp_path / "b", 5, 4)
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
    c = write_goldens(tmp_path / "c", 6, 4)
    assert (tmp_path / "a" / "crc16.txt").read_bytes() != c[0].read_bytes()


def test_golden_vectors_are_consistent(tmp_path: Path):
    write_goldens(tmp_path, 1, 4)

    for payload, codeword in _pairs(tmp_path / "crc16.txt"):
        assert payload.size == 12
        assert codeword.size == 28
        assert crc_check(codeword, crc_config_for(DciFormat.LTE_1C))
    for _, codeword in _pairs(tmp_path / "crc24c.txt"):
        assert codeword.size == 36
        assert crc_check(codeword, crc_config_for(DciFormat.NR_1_0))

    for info, coded in _pairs(tmp_path / "tbcc.txt"):
        assert coded.size == 84
        llr = 1.0 - 2.0 * coded
        assert np.array_equal(tbcc_decode(llr), info)

    polar = polar_construct(36, 126)
    for _, coded in _pairs(tmp_path / "polar.txt"):
        assert coded.size == polar.block_len

    for mother, matched in _pairs(tmp_path / "lte_rm.txt"):
        assert (mother.size, matched.size) == (84, 72)
    for mother, matched in _pairs(tmp_path / "nr_rm.txt"):
        assert (mother.size, matched.size) == (128, 126)

    for zeros, scrambled in _pairs(tmp_path / "scramble.txt"):
        assert not zeros.any()
        assert scrambled.size == 72


def test_polar_goldens_decode_back(tmp_path: Path):
    write_goldens(tmp_path, 2, 3)
    polar = polar_construct(36, 126)
    for info, coded in _pairs(tmp_path / "polar.txt"):
        candidates, _ = polar_list_decode(1.0 - 2.0 * coded, polar)
        assert np.array_equal(candidates[0], info)


def test_grid_dumps(tmp_path: Path):
    write_goldens(tmp_path, 3, 1)
    assert len((tmp_path / "grid_lte_al1.csv").read_text().splitlines()) == 37
    assert len((tmp_path / "grid_nr_al1.csv").read_text().splitlines()) == 73
