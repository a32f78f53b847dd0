from collections.abc import Callable
from pathlib import Path

import numpy as np
import typer

from ..utils.bits import BitBlock, bits_to_text
from ..utils.constants import DEFAULT_MASTER_SEED
from ..utils.errors import call_or_exit
from ..utils.styling import bold, green
from .dci_codec import DciFormat, Standard, crc_attach, crc_config_for
from .fec import polar_construct, polar_encode, tbcc_encode
from .link_chain import ChainConfig, build_chain, transmit
from .rate_match import lte_rate_match, nr_rate_match
from .resource_map import dump_grid_csv, scramble, scrambling_seed

# canonical AL1 shapes: K=28 TBCC into E=72, K=36 polar (N=128) into E=126
LTE_INFO_LEN = 28
LTE_RM_LEN = 72
NR_INFO_LEN = 36
NR_RM_LEN = 126
DCI_BITS = 12


def _vectors(
    rng: np.random.Generator,
    cases: int,
    length: int,
    transform: Callable[[BitBlock], BitBlock],
) -> list[str]:
    lines = []
    for _ in range(cases):
        bits = rng.integers(0, 2, length, dtype=np.uint8)
        lines.append(f"{bits_to_text(bits)}\t{bits_to_text(transform(bits))}")
    return lines


def write_goldens(out_dir: Path, seed: int, cases: int) -> list[Path]:
    """Per-module golden vectors (``input<TAB>output`` per line) plus AL1 grid dumps."""
    rng = np.random.default_rng(seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    polar = polar_construct(NR_INFO_LEN, NR_RM_LEN)
    lte_crc = crc_config_for(DciFormat.LTE_1C)
    nr_crc = crc_config_for(DciFormat.NR_1_0)
    files = {
        "crc16.txt": _vectors(rng, cases, DCI_BITS, lambda b: crc_attach(b, lte_crc)),
        "crc24c.txt": _vectors(rng, cases, DCI_BITS, lambda b: crc_attach(b, nr_crc)),
        "tbcc.txt": _vectors(rng, cases, LTE_INFO_LEN, tbcc_encode),
        "polar.txt": _vectors(rng, cases, NR_INFO_LEN, lambda b: polar_encode(b, polar)),
        "lte_rm.txt": _vectors(
            rng,
            cases,
            3 * LTE_INFO_LEN,
            lambda b: lte_rate_match(b, LTE_RM_LEN),
        ),
        "nr_rm.txt": _vectors(
            rng,
            cases,
            polar.block_len,
            lambda b: nr_rate_match(b, NR_RM_LEN, polar),
        ),
    }
    files["scramble.txt"] = [
        f"{bits_to_text(np.zeros(LTE_RM_LEN, dtype=np.uint8))}\t"
        f"{bits_to_text(scramble(np.zeros(LTE_RM_LEN, dtype=np.uint8), scrambling_seed(s)))}"
        for s in Standard
    ]

    written = []
    for name, lines in files.items():
        path = out_dir / name
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    for standard in Standard:
        chain = build_chain(ChainConfig(standard, 1))
        path = out_dir / f"grid_{standard.value}_al1.csv"
        dump_grid_csv(transmit(chain, rng).grid, path)
        written.append(path)
    return written


def goldens(
    out: Path = typer.Option(Path("goldens"), "--out", "-o", help="Output directory"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, "--seed", help="Seed for the random inputs"),
    cases: int = typer.Option(8, "--cases", min=1, help="Vectors per file"),
):
    """
    Emit golden test vectors for each transmit-chain module.
    """
    typer.echo(bold(f"Writing golden vectors to {out}/"))
    for path in call_or_exit(write_goldens, out, seed, cases):
        typer.echo(f"  {path.name}")
    typer.echo(green("✅ Golden vectors written"))
