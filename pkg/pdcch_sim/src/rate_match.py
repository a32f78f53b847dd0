"""Rate matching to the resource budget E and soft rate recovery at the receiver.

Both matchers are expressed as a selection table: ``sel[k]`` is the mother-codeword index sent
as the k-th output bit. Matching gathers through the table; recovery scatter-adds through it,
so repeated positions sum their LLRs and positions never sent stay at zero.
"""

from functools import cache

import numpy as np
import numpy.typing as npt

from ..utils.bits import BitBlock, LlrBlock, as_bits
from ..utils.constants import KNOWN_BIT_LLR
from ..utils.errors import ConfigurationError, FormatError
from ..utils.tables import LTE_CONV_COLUMN_PERMUTATION
from .dci_codec import Standard
from .fec import PolarConfig, subblock_permutation

LTE_INTERLEAVER_COLUMNS = 32
TBCC_STREAMS = 3


def _check_rm_len(rm_len: int) -> None:
    if rm_len <= 0:
        raise ConfigurationError(f"rate-matched length must be positive, got {rm_len}")


@cache
def lte_circular_buffer(info_len: int) -> npt.NDArray[np.int64]:
    """Mother-codeword indices in circular-buffer order, dummy bits removed.

    Each stream fills a 32-column matrix row by row behind leading dummy bits, the columns are
    permuted and read out column by column; the three interleaved streams are concatenated.
    """
    cols = LTE_INTERLEAVER_COLUMNS
    rows = -(-info_len // cols)
    dummies = rows * cols - info_len
    k = np.arange(rows * cols)
    perm = np.asarray(LTE_CONV_COLUMN_PERMUTATION)
    slot = perm[k // rows] + cols * (k % rows)
    kept = slot[slot >= dummies] - dummies
    buffer = np.concatenate([TBCC_STREAMS * kept + stream for stream in range(TBCC_STREAMS)])
    buffer.setflags(write=False)
    return buffer


@cache
def lte_selection(info_len: int, rm_len: int) -> npt.NDArray[np.int64]:
    buffer = lte_circular_buffer(info_len)
    sel = buffer[np.arange(rm_len) % buffer.size]
    sel.setflags(write=False)
    return sel


def lte_rate_match(coded: object, rm_len: int) -> BitBlock:
    bits = as_bits(coded)
    _check_rm_len(rm_len)
    if bits.size == 0 or bits.size % TBCC_STREAMS:
        raise FormatError(f"TBCC output length {bits.size} is not a positive multiple of 3")
    return bits[lte_selection(bits.size // TBCC_STREAMS, rm_len)]


@cache
def nr_selection(block_len: int, rm_len: int, mode: str) -> npt.NDArray[np.int64]:
    perm = subblock_permutation(block_len)
    if mode == "repetition":
        positions = np.arange(rm_len) % block_len
    elif mode == "puncturing":
        positions = np.arange(block_len - rm_len, block_len)
    elif mode == "shortening":
        positions = np.arange(rm_len)
    else:
        raise ConfigurationError(f"unknown polar rate-matching mode {mode!r}")
    sel = perm[positions]
    sel.setflags(write=False)
    return sel


def nr_rate_match(coded: object, rm_len: int, cfg: PolarConfig) -> BitBlock:
    """Sub-block interleave then collect E bits; channel interleaving stays bypassed."""
    bits = as_bits(coded)
    _check_rm_len(rm_len)
    if bits.size != cfg.block_len:
        raise FormatError(f"polar codeword has {bits.size} bits, expected {cfg.block_len}")
    if rm_len < cfg.block_len and cfg.rm_mode == "repetition":
        raise ConfigurationError(f"E={rm_len} below N={cfg.block_len} needs puncturing/shortening")
    return bits[nr_selection(cfg.block_len, rm_len, cfg.rm_mode)]


def rate_recover(
    llr: LlrBlock,
    scheme: Standard,
    mother_len: int,
    cfg: PolarConfig | None = None,
) -> LlrBlock:
    """Undo the matcher on soft values with additive combining of repetitions."""
    llr = np.asarray(llr, dtype=np.float64).ravel()
    _check_rm_len(llr.size)
    if scheme is Standard.LTE:
        if mother_len <= 0 or mother_len % TBCC_STREAMS:
            raise FormatError(f"TBCC mother length {mother_len} is not a multiple of 3")
        sel = lte_selection(mother_len // TBCC_STREAMS, llr.size)
    else:
        if cfg is None:
            raise ConfigurationError("NR rate recovery needs the polar configuration")
        if mother_len != cfg.block_len or llr.size != cfg.rm_len:
            raise FormatError(
                f"got {llr.size} LLRs for N={mother_len}, configured for "
                f"E={cfg.rm_len}, N={cfg.block_len}",
            )
        sel = nr_selection(cfg.block_len, cfg.rm_len, cfg.rm_mode)
    combined = np.zeros(mother_len)
    np.add.at(combined, sel, llr)
    if scheme is Standard.NR and cfg is not None and cfg.rm_mode == "shortening":
        perm = subblock_permutation(cfg.block_len)
        combined[perm[cfg.rm_len :]] = KNOWN_BIT_LLR
    return combined
